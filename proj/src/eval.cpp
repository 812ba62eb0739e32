#include "sesr/eval.hpp"

#include <filesystem>

#include "sesr/io.hpp"
#include "sesr/parallel.hpp"
#include "sesr/resize.hpp"

namespace fs = std::filesystem;

namespace sesr {

void ExperimentConfig::validate() const {
    if (classifier_path.empty() || upscaled_classifier_path.empty())
        throw ConfigError("evaluate: both classifier paths are required");
    if (dataset_dir.empty() || output_dir.empty())
        throw ConfigError("evaluate: dataset and output directories are required");
    if (attacks.empty()) throw ConfigError("evaluate: at least one attack required");
    if (upscalers.empty()) throw ConfigError("evaluate: at least one upscaler required");
    if (subset <= 0) throw ConfigError("evaluate: subset must be positive");
    for (Upscaler u : upscalers) {
        if (u == Upscaler::None)
            throw ConfigError("evaluate: upscaler 'none' has no defended row (no 2x output)");
        if (upscaler_is_network(u) && weight_paths.find(u) == weight_paths.end())
            throw ConfigError("evaluate: no weight path configured for " + upscaler_name(u));
    }
}

namespace {

struct EvalImage {
    Tensor4 clean;
    int label = 0;
    std::string name;  // class/file used for the adversarial directory layout
};

std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == '/' || c == '\\') c = '_';
    return out;
}

}  // namespace

EvalResult eval_robustness(const ExperimentConfig& cfg) {
    cfg.validate();
    Classifier base = load_classifier(cfg.classifier_path);
    Classifier upscaled = load_classifier(cfg.upscaled_classifier_path);
    if (upscaled.input_size != 2 * base.input_size)
        throw ConfigError("evaluate: upscaled classifier input (" +
                          std::to_string(upscaled.input_size) + ") must be twice the base input (" +
                          std::to_string(base.input_size) + ")");

    Dataset ds = load_dataset(cfg.dataset_dir);

    // Keep only images both consumers get right on clean inputs, mirroring a
    // 100%-clean-correct evaluation pool.
    std::vector<EvalImage> pool;
    std::size_t base_correct = 0;
    for (std::size_t i = 0; i < ds.items.size(); ++i) {
        const auto& item = ds.items[i];
        if (item.image.h != base.input_size || item.image.w != base.input_size)
            throw ConfigError("evaluate: image " + ds.paths[i] + " is not " +
                              std::to_string(base.input_size) + "x" +
                              std::to_string(base.input_size));
        const bool base_ok = classify(base, item.image) == item.label;
        if (base_ok) base_correct += 1;
        const bool up_ok =
            classify(upscaled, bicubic_upscale(item.image, 2)) == item.label;
        if (base_ok && up_ok && static_cast<int>(pool.size()) < cfg.subset) {
            EvalImage ev;
            ev.clean = item.image;
            ev.label = item.label;
            const fs::path p(ds.paths[i]);
            ev.name = sanitize(p.parent_path().filename().string() + "_" + p.filename().string());
            pool.push_back(std::move(ev));
        }
    }
    if (pool.empty())
        throw ConfigError("evaluate: clean-accuracy filter left no images to evaluate");

    EvalResult result;
    result.filtered_count = static_cast<int>(pool.size());
    result.pool_clean_accuracy =
        100.0 * static_cast<double>(base_correct) / static_cast<double>(ds.items.size());

    fs::create_directories(cfg.output_dir);

    RobustnessReport& report = result.report;
    for (AttackKind a : cfg.attacks) report.attack_columns.push_back(attack_name(a));
    report.settings["classifier"] = base.net.name;
    report.settings["images"] = std::to_string(pool.size());
    report.settings["epsilon"] = std::to_string(cfg.attack_base.epsilon);
    report.settings["steps"] = std::to_string(cfg.attack_base.steps);
    report.settings["alpha"] = std::to_string(cfg.attack_base.alpha);
    report.settings["momentum"] = std::to_string(cfg.attack_base.momentum);
    report.settings["diversity_prob"] = std::to_string(cfg.attack_base.diversity_prob);
    report.settings["jpeg_quality"] =
        cfg.defense_base.jpeg_enabled ? std::to_string(cfg.defense_base.jpeg_quality) : "off";
    report.settings["wavelet"] = cfg.defense_base.wavelet_enabled
                                     ? wavelet_name(cfg.defense_base.wavelet) + "/" +
                                           std::to_string(cfg.defense_base.levels)
                                     : "off";
    report.settings["seed"] = std::to_string(cfg.seed);

    // Adversarial images are generated once per attack and shared by every
    // defense row; the attacker never adapts to the defense.
    std::map<AttackKind, std::vector<Tensor4>> adversarial;
    for (AttackKind kind : cfg.attacks) {
        const fs::path adv_dir = fs::path(cfg.output_dir) / ("adv_" + attack_name(kind));
        std::vector<Tensor4>& images = adversarial[kind];
        images.resize(pool.size());
        bool cached = fs::is_directory(adv_dir);
        if (cached)
            for (const auto& ev : pool)
                cached = cached && fs::is_regular_file(adv_dir / ev.name);
        if (!cached) {
            fs::create_directories(adv_dir);
            parallel_for(pool.size(), [&](std::size_t i) {
                AttackConfig ac = cfg.attack_base;
                ac.kind = kind;
                ac.seed = derive_seed(cfg.seed, i);
                const Tensor4 adv = run_attack(pool[i].clean, {pool[i].label}, base, ac);
                write_ppm((adv_dir / pool[i].name).string(), adv);
            });
        }
        // Read back through the byte format so every row sees the same
        // quantized adversarial pixels.
        for (std::size_t i = 0; i < pool.size(); ++i)
            images[i] = read_ppm((adv_dir / pool[i].name).string());
    }

    // no-defense row: the base classifier eats the adversarial image directly
    {
        ReportRow row;
        row.classifier = base.net.name;
        row.sr_method = "no_defense";
        for (AttackKind kind : cfg.attacks) {
            const auto& images = adversarial[kind];
            std::vector<int> correct(pool.size(), 0);
            parallel_for(pool.size(), [&](std::size_t i) {
                correct[i] = classify(base, images[i]) == pool[i].label ? 1 : 0;
            });
            int total = 0;
            for (int c : correct) total += c;
            row.accuracy.push_back(100.0 * total / static_cast<double>(pool.size()));
        }
        report.rows.push_back(std::move(row));
    }

    for (Upscaler up : cfg.upscalers) {
        DefenseConfig dc = cfg.defense_base;
        dc.upscaler = up;
        if (upscaler_is_network(up)) dc.weight_path = cfg.weight_paths.at(up);
        const DefensePipeline pipeline = prepare_defense(dc);

        ReportRow row;
        row.classifier = base.net.name;
        row.sr_method = upscaler_name(up);
        if (upscaler_is_network(up)) {
            const NetworkSpec preset = build_preset(upscaler_name(up));
            row.params = count_params(preset);
            row.macs = count_macs(preset, base.input_size, base.input_size);
        }
        for (AttackKind kind : cfg.attacks) {
            const auto& images = adversarial[kind];
            std::vector<int> correct(pool.size(), 0);
            parallel_for(pool.size(), [&](std::size_t i) {
                Tensor4 defended = pipeline.apply(images[i]);
                if (defended.h != upscaled.input_size || defended.w != upscaled.input_size)
                    defended = center_crop(defended, upscaled.input_size, upscaled.input_size);
                correct[i] = classify(upscaled, defended) == pool[i].label ? 1 : 0;
            });
            int total = 0;
            for (int c : correct) total += c;
            row.accuracy.push_back(100.0 * total / static_cast<double>(pool.size()));
        }
        report.rows.push_back(std::move(row));
    }

    write_text_file((fs::path(cfg.output_dir) / "robustness.csv").string(),
                    report_to_csv(report));
    write_text_file((fs::path(cfg.output_dir) / "robustness.md").string(),
                    report_to_markdown(report));
    return result;
}

}  // namespace sesr
