#pragma once

#include <map>
#include <string>
#include <vector>

#include "sesr/attacks.hpp"
#include "sesr/defense.hpp"
#include "sesr/report.hpp"

namespace sesr {

// Robustness experiment: attack the base classifier in the clear (gray-box:
// the attacker never sees the defense), then measure accuracy of the defended
// pipeline on the adversarial images.
struct ExperimentConfig {
    std::string classifier_path;          // consumes dataset-resolution images
    std::string upscaled_classifier_path; // consumes 2x defended images
    std::string dataset_dir;
    std::string output_dir;
    std::vector<AttackKind> attacks = {AttackKind::Fgsm, AttackKind::Pgd};
    AttackConfig attack_base;             // kind field ignored, one run per entry of `attacks`
    DefenseConfig defense_base;           // upscaler/weight fields ignored per row
    std::vector<Upscaler> upscalers = {Upscaler::Nearest, Upscaler::SesrM2};
    std::map<Upscaler, std::string> weight_paths;
    int subset = 500;                     // eval images taken from the clean-correct pool
    std::uint64_t seed = 7;

    void validate() const;
};

struct EvalResult {
    RobustnessReport report;
    int filtered_count = 0;      // images kept by the clean-accuracy filter
    double pool_clean_accuracy = 0.0;  // base classifier accuracy before filtering
};

EvalResult eval_robustness(const ExperimentConfig& cfg);

}  // namespace sesr
