#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "sesr/eval.hpp"
#include "sesr/io.hpp"
#include "sesr/models.hpp"
#include "sesr/resize.hpp"
#include "sesr/synth.hpp"

using namespace sesr;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    fs::path root;
    std::string data_dir, cls32, cls64, sr_weights;

    Fixture() {
        root = fs::temp_directory_path() / ("sesr_eval_" + std::to_string(::getpid()));
        fs::remove_all(root);
        fs::create_directories(root);
        data_dir = (root / "data").string();
        write_texture_dataset(data_dir, 12, 16, 42);

        const Dataset ds = load_dataset(data_dir);
        const ClassifierTrainResult small = train_toy_classifier(ds.items, 8, 2e-3f, 3);
        cls32 = (root / "cls16.wts").string();
        save_classifier(cls32, small.model);

        std::vector<LabeledImage> upscaled = ds.items;
        for (auto& item : upscaled) item.image = bicubic_upscale(item.image, 2);
        const ClassifierTrainResult big = train_toy_classifier(upscaled, 8, 2e-3f, 4);
        cls64 = (root / "cls32.wts").string();
        save_classifier(cls64, big.model);

        const NetworkSpec net = build_preset("sesr_m2");
        sr_weights = (root / "m2.wts").string();
        save_weights(sr_weights, net, init_weights(net, 7));
    }
    ~Fixture() { fs::remove_all(root); }

    ExperimentConfig config(const std::string& out_name) const {
        ExperimentConfig cfg;
        cfg.classifier_path = cls32;
        cfg.upscaled_classifier_path = cls64;
        cfg.dataset_dir = data_dir;
        cfg.output_dir = (root / out_name).string();
        cfg.attacks = {AttackKind::Fgsm, AttackKind::Pgd};
        cfg.attack_base.steps = 4;
        cfg.upscalers = {Upscaler::Nearest, Upscaler::SesrM2};
        cfg.weight_paths[Upscaler::SesrM2] = sr_weights;
        cfg.subset = 24;
        cfg.seed = 11;
        return cfg;
    }
};

}  // namespace

TEST_CASE("robustness evaluation produces the expected table and caches attacks") {
    Fixture fx;
    ExperimentConfig cfg = fx.config("run1");
    const EvalResult result = eval_robustness(cfg);

    CHECK(result.filtered_count > 0);
    const RobustnessReport& report = result.report;
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].sr_method == "no_defense");
    CHECK(report.rows[1].sr_method == "nearest");
    CHECK(report.rows[2].sr_method == "sesr_m2");
    CHECK(report.attack_columns == std::vector<std::string>{"fgsm", "pgd"});

    // cost columns come straight from the counters at the eval resolution
    CHECK_FALSE(report.rows[1].params.has_value());
    REQUIRE(report.rows[2].params.has_value());
    CHECK(*report.rows[2].params == 10608);
    CHECK(*report.rows[2].macs == count_macs(build_preset("sesr_m2"), 16, 16));

    for (const auto& row : report.rows)
        for (double acc : row.accuracy) {
            CHECK(acc >= 0.0);
            CHECK(acc <= 100.0);
        }

    // adversarial directories exist once per attack and are reused: a second
    // run must reproduce the byte-identical report
    const std::string csv1 = read_text_file((fs::path(cfg.output_dir) / "robustness.csv").string());
    const EvalResult again = eval_robustness(cfg);
    (void)again;
    const std::string csv2 = read_text_file((fs::path(cfg.output_dir) / "robustness.csv").string());
    CHECK(csv1 == csv2);
    CHECK(fs::is_directory(fs::path(cfg.output_dir) / "adv_fgsm"));
    CHECK(fs::is_directory(fs::path(cfg.output_dir) / "adv_pgd"));

    // full-run determinism: a fresh output directory regenerates everything
    // and still lands on the same bytes
    ExperimentConfig cfg2 = fx.config("run2");
    eval_robustness(cfg2);
    const std::string csv3 =
        read_text_file((fs::path(cfg2.output_dir) / "robustness.csv").string());
    CHECK(csv3 == csv1);
}

TEST_CASE("validation failures") {
    Fixture fx;
    ExperimentConfig cfg = fx.config("run3");
    cfg.weight_paths.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = fx.config("run4");
    cfg.upscalers = {Upscaler::None};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = fx.config("run5");
    cfg.subset = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("an always-wrong classifier empties the filter") {
    Fixture fx;
    // dataset whose only populated class sorts second: a zero-weight
    // classifier predicts class 0 for everything, so nothing passes
    const fs::path data = fx.root / "mismatch";
    fs::create_directories(data / "a_empty");
    write_texture_dataset((data / "_tmp").string(), 3, 16, 5);
    fs::rename(data / "_tmp" / "checker", data / "b_only");
    fs::remove_all(data / "_tmp");

    Classifier zero = build_toy_classifier(16, 4, 1);
    for (auto& layer : zero.weights) std::fill(layer.begin(), layer.end(), 0.0f);
    const std::string zero_path = (fx.root / "zero16.wts").string();
    save_classifier(zero_path, zero);
    Classifier zero_big = build_toy_classifier(32, 4, 1);
    for (auto& layer : zero_big.weights) std::fill(layer.begin(), layer.end(), 0.0f);
    const std::string zero_big_path = (fx.root / "zero32.wts").string();
    save_classifier(zero_big_path, zero_big);

    ExperimentConfig cfg = fx.config("run6");
    cfg.classifier_path = zero_path;
    cfg.upscaled_classifier_path = zero_big_path;
    cfg.dataset_dir = data.string();
    CHECK_THROWS_AS(eval_robustness(cfg), ConfigError);
}
