#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "sesr/collapse.hpp"
#include "sesr/config.hpp"
#include "sesr/costmodel.hpp"
#include "sesr/defense.hpp"
#include "sesr/eval.hpp"
#include "sesr/io.hpp"
#include "sesr/kernels.hpp"
#include "sesr/models.hpp"
#include "sesr/parallel.hpp"
#include "sesr/report.hpp"
#include "sesr/resize.hpp"
#include "sesr/synth.hpp"
#include "sesr/training.hpp"

namespace fs = std::filesystem;
using namespace sesr;

namespace {

// fsrcnn has no expanded form and trains directly; the SESR presets train
// expanded and collapse afterwards.
NetworkSpec training_arch(const std::string& arch, int expansion, bool* direct) {
    *direct = false;
    if (arch == "fsrcnn") {
        *direct = true;
        return build_fsrcnn();
    }
    SesrConfig cfg;
    if (arch == "sesr_m2") cfg = SesrConfig::m2();
    else if (arch == "sesr_m3") cfg = SesrConfig::m3();
    else if (arch == "sesr_m5") cfg = SesrConfig::m5();
    else if (arch == "sesr_xl") cfg = SesrConfig::xl();
    else
        throw ConfigError("unknown --arch '" + arch +
                          "' (sesr_m2|sesr_m3|sesr_m5|sesr_xl|fsrcnn)");
    cfg.expansion = expansion;
    return build_sesr(cfg, NetForm::Expanded);
}

std::vector<AttackKind> parse_attack_list(const std::string& csv) {
    std::vector<AttackKind> kinds;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) kinds.push_back(attack_from_name(item));
    if (kinds.empty()) throw ConfigError("empty attack list");
    return kinds;
}

std::vector<Upscaler> parse_upscaler_list(const std::string& csv) {
    std::vector<Upscaler> ups;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) ups.push_back(upscaler_from_name(item));
    if (ups.empty()) throw ConfigError("empty upscaler list");
    return ups;
}

std::pair<int, int> parse_size(const std::string& spec) {
    const auto x = spec.find('x');
    if (x == std::string::npos)
        throw ConfigError("--input must look like 299x299, got '" + spec + "'");
    return {std::stoi(spec.substr(0, x)), std::stoi(spec.substr(x + 1))};
}

DeviceProfile parse_device(const std::string& spec, double utilization) {
    std::string s = spec;
    double value = 0.0;
    if (s.size() > 4 && s.substr(s.size() - 4) == "tops") {
        value = std::stod(s.substr(0, s.size() - 4));
        return DeviceProfile::from_tops(value, utilization);
    }
    if (s.size() > 4 && s.substr(s.size() - 4) == "macs") {
        DeviceProfile d;
        d.peak_macs_per_second = std::stod(s.substr(0, s.size() - 4));
        d.utilization = utilization;
        d.validate();
        return d;
    }
    throw ConfigError("--device must end in 'tops' or 'macs', e.g. 0.5tops");
}

// All *.ppm under dir (depth <= 1); returns dir-relative paths.
std::vector<std::string> collect_ppms(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("input directory '" + dir + "' does not exist");
    std::vector<std::string> rel;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".ppm")
            rel.push_back(entry.path().filename().string());
        else if (entry.is_directory())
            for (const auto& inner : fs::directory_iterator(entry.path()))
                if (inner.is_regular_file() && inner.path().extension() == ".ppm")
                    rel.push_back((entry.path().filename() / inner.path().filename()).string());
    }
    std::sort(rel.begin(), rel.end());
    if (rel.empty()) throw ConfigError("no .ppm files under '" + dir + "'");
    return rel;
}

void print_cost(const CostReport& r, bool csv) {
    if (csv) {
        std::printf("stage,params,macs,latency_ms,fps\n");
        std::printf("%s,%llu,%llu,%.4f,%.2f\n", r.stage.c_str(),
                    static_cast<unsigned long long>(r.params),
                    static_cast<unsigned long long>(r.macs), r.latency_ms, r.fps);
    } else {
        std::printf("%-12s params %-10llu macs %-14llu latency %8.2f ms  fps %6.2f\n",
                    r.stage.c_str(), static_cast<unsigned long long>(r.params),
                    static_cast<unsigned long long>(r.macs), r.latency_ms, r.fps);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2x super-resolution toolkit: collapsible-block SR, preprocessing "
                 "defense, gradient attacks and compute-cost accounting"};
    app.require_subcommand(1);

    // ---- train-sr ----
    auto* train_sr_cmd = app.add_subcommand("train-sr", "train an expanded SR network");
    std::string ts_arch = "sesr_m2", ts_data, ts_out = "expanded.wts", ts_loss = "mae";
    int ts_expansion = 64, ts_epochs = 100, ts_patch = 24, ts_pairs = 64, ts_batch = 8;
    float ts_lr = 1e-3f;
    std::uint64_t ts_seed = 1;
    train_sr_cmd->add_option("--arch", ts_arch, "sesr_m2|sesr_m3|sesr_m5|sesr_xl");
    train_sr_cmd->add_option("--expansion", ts_expansion, "expanded channel count");
    train_sr_cmd->add_option("--data", ts_data, "directory of HR ppm images")->required();
    train_sr_cmd->add_option("--epochs", ts_epochs);
    train_sr_cmd->add_option("--lr", ts_lr);
    train_sr_cmd->add_option("--patch", ts_patch, "LR patch extent");
    train_sr_cmd->add_option("--pairs", ts_pairs, "number of training patch pairs");
    train_sr_cmd->add_option("--batch", ts_batch);
    train_sr_cmd->add_option("--loss", ts_loss, "mae|mse");
    train_sr_cmd->add_option("--seed", ts_seed);
    train_sr_cmd->add_option("--out", ts_out)->required();

    // ---- train-classifier ----
    auto* train_cls_cmd = app.add_subcommand("train-classifier", "train the toy classifier");
    std::string tc_data, tc_out = "classifier.wts";
    int tc_epochs = 12;
    float tc_lr = 2e-3f;
    std::uint64_t tc_seed = 1;
    bool tc_upscaled = false;
    train_cls_cmd->add_option("--data", tc_data, "labeled dataset directory")->required();
    train_cls_cmd->add_option("--epochs", tc_epochs);
    train_cls_cmd->add_option("--lr", tc_lr);
    train_cls_cmd->add_option("--seed", tc_seed);
    train_cls_cmd->add_flag("--upscaled", tc_upscaled,
                            "train on bicubic 2x upscaled images (defended-input variant)");
    train_cls_cmd->add_option("--out", tc_out)->required();

    // ---- collapse ----
    auto* collapse_cmd = app.add_subcommand("collapse", "collapse an expanded network");
    std::string co_in, co_out;
    collapse_cmd->add_option("--in", co_in)->required();
    collapse_cmd->add_option("--out", co_out)->required();

    // ---- verify-collapse ----
    auto* verify_cmd = app.add_subcommand("verify-collapse", "compare expanded vs collapsed");
    std::string vc_expanded, vc_collapsed;
    int vc_trials = 10, vc_size = 64;
    float vc_tol = 1e-4f;
    std::uint64_t vc_seed = 1234;
    verify_cmd->add_option("--expanded", vc_expanded)->required();
    verify_cmd->add_option("--collapsed", vc_collapsed)->required();
    verify_cmd->add_option("--trials", vc_trials);
    verify_cmd->add_option("--tol", vc_tol);
    verify_cmd->add_option("--size", vc_size, "input extent");
    verify_cmd->add_option("--seed", vc_seed);

    // ---- attack ----
    auto* attack_cmd = app.add_subcommand("attack", "generate adversarial images");
    std::string at_model, at_kind = "pgd", at_in, at_out;
    float at_eps = 8.0f / 255.0f, at_alpha = 2.0f / 255.0f, at_momentum = 0.9f, at_div = 0.5f;
    int at_steps = 10;
    bool at_no_random_start = false;
    std::uint64_t at_seed = 7;
    attack_cmd->add_option("--model", at_model, "classifier weight file")->required();
    attack_cmd->add_option("--kind", at_kind, "fgsm|pgd|apgd|di2fgsm");
    attack_cmd->add_option("--eps", at_eps);
    attack_cmd->add_option("--steps", at_steps);
    attack_cmd->add_option("--alpha", at_alpha);
    attack_cmd->add_option("--momentum", at_momentum);
    attack_cmd->add_option("--diversity-prob", at_div);
    attack_cmd->add_flag("--no-random-start", at_no_random_start);
    attack_cmd->add_option("--in", at_in, "labeled dataset directory")->required();
    attack_cmd->add_option("--out", at_out)->required();
    attack_cmd->add_option("--seed", at_seed);

    // ---- defend ----
    auto* defend_cmd = app.add_subcommand("defend", "run the preprocessing defense");
    std::string de_in, de_out, de_wavelet = "db2", de_upscaler = "sesr_m2", de_weights;
    int de_quality = 75, de_levels = 2;
    bool de_no_jpeg = false, de_no_wavelet = false;
    defend_cmd->add_option("--in", de_in)->required();
    defend_cmd->add_option("--out", de_out)->required();
    defend_cmd->add_option("--jpeg-quality", de_quality);
    defend_cmd->add_flag("--no-jpeg", de_no_jpeg);
    defend_cmd->add_option("--wavelet", de_wavelet, "haar|db2");
    defend_cmd->add_option("--levels", de_levels);
    defend_cmd->add_flag("--no-wavelet", de_no_wavelet);
    defend_cmd->add_option("--upscaler", de_upscaler,
                           "none|nearest|bicubic|sesr_m2|sesr_m3|sesr_m5|sesr_xl|fsrcnn");
    defend_cmd->add_option("--weights", de_weights, "SR weight file for network upscalers");

    // ---- evaluate ----
    auto* eval_cmd = app.add_subcommand("evaluate", "robustness experiment");
    std::string ev_config, ev_classifier, ev_classifier2x, ev_data, ev_out;
    std::string ev_attacks = "fgsm,pgd", ev_upscalers = "nearest,sesr_m2";
    std::string ev_w_m2, ev_w_m3, ev_w_m5, ev_w_xl, ev_w_fsrcnn;
    std::string ev_wavelet = "db2";
    int ev_subset = 500, ev_quality = 75, ev_levels = 2, ev_steps = 10;
    float ev_eps = 8.0f / 255.0f, ev_alpha = 2.0f / 255.0f;
    bool ev_no_jpeg = false, ev_no_wavelet = false;
    std::uint64_t ev_seed = 7;
    eval_cmd->add_option("--config", ev_config, "key = value config file");
    auto* o_cls = eval_cmd->add_option("--classifier", ev_classifier);
    auto* o_cls2 = eval_cmd->add_option("--classifier-2x", ev_classifier2x);
    auto* o_data = eval_cmd->add_option("--data", ev_data);
    auto* o_out = eval_cmd->add_option("--out", ev_out);
    auto* o_attacks = eval_cmd->add_option("--attacks", ev_attacks, "comma list");
    auto* o_ups = eval_cmd->add_option("--upscalers", ev_upscalers, "comma list");
    auto* o_wm2 = eval_cmd->add_option("--weights-sesr-m2", ev_w_m2);
    auto* o_wm3 = eval_cmd->add_option("--weights-sesr-m3", ev_w_m3);
    auto* o_wm5 = eval_cmd->add_option("--weights-sesr-m5", ev_w_m5);
    auto* o_wxl = eval_cmd->add_option("--weights-sesr-xl", ev_w_xl);
    auto* o_wfs = eval_cmd->add_option("--weights-fsrcnn", ev_w_fsrcnn);
    auto* o_subset = eval_cmd->add_option("--subset", ev_subset);
    auto* o_quality = eval_cmd->add_option("--jpeg-quality", ev_quality);
    auto* o_nojpeg = eval_cmd->add_flag("--no-jpeg", ev_no_jpeg);
    auto* o_wavelet = eval_cmd->add_option("--wavelet", ev_wavelet);
    auto* o_levels = eval_cmd->add_option("--levels", ev_levels);
    auto* o_nowav = eval_cmd->add_flag("--no-wavelet", ev_no_wavelet);
    auto* o_eps = eval_cmd->add_option("--eps", ev_eps);
    auto* o_steps = eval_cmd->add_option("--steps", ev_steps);
    auto* o_alpha = eval_cmd->add_option("--alpha", ev_alpha);
    auto* o_seed = eval_cmd->add_option("--seed", ev_seed);

    // ---- cost ----
    auto* cost_cmd = app.add_subcommand("cost", "parameter/MAC/latency accounting");
    std::string cs_net = "sesr_m2", cs_input = "299x299", cs_device = "0.5tops",
                cs_report = "text";
    double cs_util = 1.0, cs_cls_latency = 0.0;
    cost_cmd->add_option("--net", cs_net, "preset name or description file");
    cost_cmd->add_option("--input", cs_input, "HxW");
    cost_cmd->add_option("--device", cs_device, "e.g. 0.5tops or 0.25e12macs");
    cost_cmd->add_option("--utilization", cs_util);
    cost_cmd->add_option("--report", cs_report, "text|csv");
    cost_cmd->add_option("--cls-latency", cs_cls_latency,
                         "add an end-to-end row on top of this classification latency (ms)");

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "reformat a robustness report");
    std::string rp_in, rp_format = "markdown", rp_out;
    report_cmd->add_option("--in", rp_in, "report csv")->required();
    report_cmd->add_option("--format", rp_format, "markdown|csv");
    report_cmd->add_option("--out", rp_out, "output file (stdout if omitted)");

    // ---- synth-data ----
    auto* synth_cmd = app.add_subcommand("synth-data", "generate synthetic datasets");
    std::string sy_kind = "textures", sy_out;
    int sy_count = 60, sy_size = 32;
    std::uint64_t sy_seed = 11;
    synth_cmd->add_option("--kind", sy_kind, "textures|corpus");
    synth_cmd->add_option("--out", sy_out)->required();
    synth_cmd->add_option("--count", sy_count, "images per class (textures) or total (corpus)");
    synth_cmd->add_option("--size", sy_size, "image extent");
    synth_cmd->add_option("--seed", sy_seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_sr_cmd) {
            bool direct = false;
            const NetworkSpec net = training_arch(ts_arch, ts_expansion, &direct);
            const std::vector<Tensor4> images = load_image_dir(ts_data);
            if (images.empty()) throw ConfigError("no training images in '" + ts_data + "'");
            const PairDataset pairs = make_lr_hr_pairs(images, ts_patch, ts_pairs, ts_seed);
            if (pairs.skipped_images > 0)
                std::fprintf(stderr, "warning: %d images smaller than %dx%d were skipped\n",
                             pairs.skipped_images, 2 * ts_patch, 2 * ts_patch);
            TrainConfig cfg;
            cfg.epochs = ts_epochs;
            cfg.batch_size = ts_batch;
            cfg.learning_rate = ts_lr;
            cfg.seed = ts_seed;
            cfg.patch_size = ts_patch;
            cfg.loss = ts_loss == "mse" ? LossKind::Mse : LossKind::Mae;
            cfg.allow_plain = direct;
            const SrTrainResult trained = train_sr(net, pairs, cfg);
            save_weights(ts_out, net, trained.weights);
            std::printf("trained %s on %zu pairs, final loss %.5f, saved %s\n", ts_arch.c_str(),
                        pairs.pairs.size(), trained.log.epoch_losses.back(), ts_out.c_str());
        } else if (*train_cls_cmd) {
            Dataset ds = load_dataset(tc_data);
            std::vector<LabeledImage> items = ds.items;
            if (tc_upscaled)
                for (auto& item : items) item.image = bicubic_upscale(item.image, 2);
            const ClassifierTrainResult trained =
                train_toy_classifier(items, tc_epochs, tc_lr, tc_seed);
            save_classifier(tc_out, trained.model);
            std::printf("trained %s (%d classes, %dx%d input), holdout accuracy %.1f%%, saved %s\n",
                        trained.model.net.name.c_str(), trained.model.num_classes,
                        trained.model.input_size, trained.model.input_size,
                        100.0 * trained.holdout_accuracy, tc_out.c_str());
        } else if (*collapse_cmd) {
            const LoadedNetwork loaded = load_weights(co_in);
            auto [net, store] = collapse_network(loaded.net, loaded.store);
            net.name = loaded.net.name;
            save_weights(co_out, net, store);
            std::printf("collapsed %s: %llu -> %llu parameters, saved %s\n", co_in.c_str(),
                        static_cast<unsigned long long>(count_params(loaded.net)),
                        static_cast<unsigned long long>(count_params(net)), co_out.c_str());
        } else if (*verify_cmd) {
            const LoadedNetwork expanded = load_weights(vc_expanded);
            const LoadedNetwork collapsed = load_weights(vc_collapsed);
            const CollapseReport rep =
                verify_collapse(expanded.net, expanded.store, collapsed.net, collapsed.store,
                                vc_trials, vc_tol, vc_size, vc_size, vc_seed);
            std::printf("verify-collapse: %d trials at %dx%d, max |diff| = %.3g, tol %.3g -> %s\n",
                        rep.trials, vc_size, vc_size, rep.max_abs_diff, vc_tol,
                        rep.pass ? "PASS" : "FAIL");
            return rep.pass ? 0 : 1;
        } else if (*attack_cmd) {
            const Classifier model = load_classifier(at_model);
            const Dataset ds = load_dataset(at_in);
            AttackConfig cfg;
            cfg.kind = attack_from_name(at_kind);
            cfg.epsilon = at_eps;
            cfg.steps = at_steps;
            cfg.alpha = at_alpha;
            cfg.momentum = at_momentum;
            cfg.diversity_prob = at_div;
            cfg.random_start = !at_no_random_start;
            cfg.validate();
            for (const auto& name : ds.class_names)
                fs::create_directories(fs::path(at_out) / name);
            std::vector<int> flipped(ds.items.size(), 0);
            parallel_for(ds.items.size(), [&](std::size_t i) {
                AttackConfig ac = cfg;
                ac.seed = derive_seed(at_seed, i);
                const Tensor4 adv =
                    run_attack(ds.items[i].image, {ds.items[i].label}, model, ac);
                const fs::path rel = fs::relative(ds.paths[i], at_in);
                write_ppm((fs::path(at_out) / rel).string(), adv);
                flipped[i] = classify(model, adv) != ds.items[i].label ? 1 : 0;
            });
            int fooled = 0;
            for (int f : flipped) fooled += f;
            std::printf("%s: %zu images attacked, %d now misclassified (%.1f%%), written to %s\n",
                        at_kind.c_str(), ds.items.size(), fooled,
                        100.0 * fooled / static_cast<double>(ds.items.size()), at_out.c_str());
        } else if (*defend_cmd) {
            DefenseConfig cfg;
            cfg.jpeg_enabled = !de_no_jpeg;
            cfg.jpeg_quality = de_quality;
            cfg.wavelet_enabled = !de_no_wavelet;
            cfg.wavelet = wavelet_from_name(de_wavelet);
            cfg.levels = de_levels;
            cfg.upscaler = upscaler_from_name(de_upscaler);
            cfg.weight_path = de_weights;
            const DefensePipeline pipeline = prepare_defense(cfg);
            const auto rel_paths = collect_ppms(de_in);
            for (const auto& rel : rel_paths)
                fs::create_directories((fs::path(de_out) / rel).parent_path());
            parallel_for(rel_paths.size(), [&](std::size_t i) {
                const Tensor4 img = read_ppm((fs::path(de_in) / rel_paths[i]).string());
                write_ppm((fs::path(de_out) / rel_paths[i]).string(), pipeline.apply(img));
            });
            std::printf("defended %zu images -> %s\n", rel_paths.size(), de_out.c_str());
        } else if (*eval_cmd) {
            ExperimentConfig cfg;
            if (!ev_config.empty()) {
                // config file provides values only where no flag was passed
                const auto kv = load_config_file(ev_config);
                auto get = [&](const std::string& key, const CLI::Option* opt,
                               std::string* dst) {
                    auto it = kv.find(key);
                    if (it != kv.end() && opt->count() == 0) *dst = it->second;
                };
                std::string tmp;
                get("experiment.classifier", o_cls, &ev_classifier);
                get("experiment.classifier_2x", o_cls2, &ev_classifier2x);
                get("experiment.data", o_data, &ev_data);
                get("experiment.out", o_out, &ev_out);
                tmp.clear(); get("experiment.subset", o_subset, &tmp);
                if (!tmp.empty()) ev_subset = std::stoi(tmp);
                tmp.clear(); get("experiment.seed", o_seed, &tmp);
                if (!tmp.empty()) ev_seed = std::stoull(tmp);
                get("attack.kinds", o_attacks, &ev_attacks);
                tmp.clear(); get("attack.eps", o_eps, &tmp);
                if (!tmp.empty()) ev_eps = std::stof(tmp);
                tmp.clear(); get("attack.steps", o_steps, &tmp);
                if (!tmp.empty()) ev_steps = std::stoi(tmp);
                tmp.clear(); get("attack.alpha", o_alpha, &tmp);
                if (!tmp.empty()) ev_alpha = std::stof(tmp);
                tmp.clear(); get("defense.jpeg", o_nojpeg, &tmp);
                if (tmp == "off") ev_no_jpeg = true;
                tmp.clear(); get("defense.jpeg_quality", o_quality, &tmp);
                if (!tmp.empty()) ev_quality = std::stoi(tmp);
                tmp.clear(); get("defense.wavelet", o_nowav, &tmp);
                if (tmp == "off") ev_no_wavelet = true;
                else if (!tmp.empty() && o_wavelet->count() == 0) ev_wavelet = tmp;
                tmp.clear(); get("defense.levels", o_levels, &tmp);
                if (!tmp.empty()) ev_levels = std::stoi(tmp);
                get("defense.upscalers", o_ups, &ev_upscalers);
                get("defense.weights_sesr_m2", o_wm2, &ev_w_m2);
                get("defense.weights_sesr_m3", o_wm3, &ev_w_m3);
                get("defense.weights_sesr_m5", o_wm5, &ev_w_m5);
                get("defense.weights_sesr_xl", o_wxl, &ev_w_xl);
                get("defense.weights_fsrcnn", o_wfs, &ev_w_fsrcnn);
            }
            cfg.classifier_path = ev_classifier;
            cfg.upscaled_classifier_path = ev_classifier2x;
            cfg.dataset_dir = ev_data;
            cfg.output_dir = ev_out;
            cfg.attacks = parse_attack_list(ev_attacks);
            cfg.upscalers = parse_upscaler_list(ev_upscalers);
            cfg.attack_base.epsilon = ev_eps;
            cfg.attack_base.steps = ev_steps;
            cfg.attack_base.alpha = ev_alpha;
            cfg.defense_base.jpeg_enabled = !ev_no_jpeg;
            cfg.defense_base.jpeg_quality = ev_quality;
            cfg.defense_base.wavelet_enabled = !ev_no_wavelet;
            cfg.defense_base.wavelet = wavelet_from_name(ev_wavelet);
            cfg.defense_base.levels = ev_levels;
            cfg.subset = ev_subset;
            cfg.seed = ev_seed;
            if (!ev_w_m2.empty()) cfg.weight_paths[Upscaler::SesrM2] = ev_w_m2;
            if (!ev_w_m3.empty()) cfg.weight_paths[Upscaler::SesrM3] = ev_w_m3;
            if (!ev_w_m5.empty()) cfg.weight_paths[Upscaler::SesrM5] = ev_w_m5;
            if (!ev_w_xl.empty()) cfg.weight_paths[Upscaler::SesrXl] = ev_w_xl;
            if (!ev_w_fsrcnn.empty()) cfg.weight_paths[Upscaler::Fsrcnn] = ev_w_fsrcnn;
            const EvalResult result = eval_robustness(cfg);
            std::printf("pool clean accuracy %.1f%%, %d images kept after filtering\n",
                        result.pool_clean_accuracy, result.filtered_count);
            std::printf("%s", report_to_markdown(result.report).c_str());
            std::printf("reports written to %s/robustness.{csv,md}\n", ev_out.c_str());
        } else if (*cost_cmd) {
            NetworkSpec net;
            if (fs::is_regular_file(cs_net))
                net = load_net_description(cs_net);
            else
                net = build_preset(cs_net);
            const auto [h, w] = parse_size(cs_input);
            const DeviceProfile device = parse_device(cs_device, cs_util);
            const CostReport sr = stage_cost(net, h, w, device);
            const bool csv = cs_report == "csv";
            print_cost(sr, csv);
            if (cs_cls_latency > 0.0) {
                CostReport cls;
                cls.stage = "classification";
                cls.latency_ms = cs_cls_latency;
                cls.fps = 1000.0 / cs_cls_latency;
                CostReport total = end_to_end(cls, sr);
                print_cost(cls, csv);
                print_cost(total, csv);
            }
        } else if (*report_cmd) {
            const RobustnessReport rep = report_from_csv(read_text_file(rp_in));
            const std::string body =
                rp_format == "csv" ? report_to_csv(rep) : report_to_markdown(rep);
            if (rp_out.empty())
                std::printf("%s", body.c_str());
            else
                write_text_file(rp_out, body);
        } else if (*synth_cmd) {
            if (sy_kind == "textures") {
                write_texture_dataset(sy_out, sy_count, sy_size, sy_seed);
                std::printf("wrote %d x 4 class images (%dx%d) to %s\n", sy_count, sy_size,
                            sy_size, sy_out.c_str());
            } else if (sy_kind == "corpus") {
                write_image_corpus(sy_out, sy_count, sy_size, sy_size, sy_seed);
                std::printf("wrote %d images (%dx%d) to %s\n", sy_count, sy_size, sy_size,
                            sy_out.c_str());
            } else {
                throw ConfigError("--kind must be textures or corpus");
            }
        }
    } catch (const FormatError& e) {
        std::fprintf(stderr, "format error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
