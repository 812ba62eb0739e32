#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sesr/network.hpp"

namespace sesr {

enum class AttackKind { Fgsm, Pgd, Apgd, Di2Fgsm };

AttackKind attack_from_name(const std::string& name);
std::string attack_name(AttackKind kind);

// L-infinity attack hyperparameters. Only the budget epsilon comes fixed at
// 8/255; the rest are the conventional settings and get recorded in reports.
struct AttackConfig {
    AttackKind kind = AttackKind::Pgd;
    float epsilon = 8.0f / 255.0f;
    int steps = 10;
    float alpha = 2.0f / 255.0f;
    bool random_start = true;   // pgd only
    float momentum = 0.9f;      // apgd heavy-ball / di2fgsm gradient momentum
    float diversity_prob = 0.5f;
    bool adaptive = true;       // apgd step halving
    std::uint64_t seed = 0;

    void validate() const;
};

// Differentiable stand-in classifier: conv/relu/pool stages and a dense head
// over fixed-size inputs.
struct Classifier {
    NetworkSpec net;
    WeightStore weights;
    int input_size = 32;
    int num_classes = 0;
};

// 3 conv blocks (3->16->32->64, 3x3, relu, 2x2 mean pool) + dense head.
Classifier build_toy_classifier(int input_size, int num_classes, std::uint64_t seed);

Tensor4 classifier_logits(const Classifier& model, const Tensor4& x);

// Argmax over logits; ties break toward the lowest class index.
int classify(const Classifier& model, const Tensor4& image,
             std::vector<float>* logits_out = nullptr);

// Mean cross-entropy of model(x) against labels plus its gradient w.r.t. x.
std::pair<double, Tensor4> classifier_loss_grad(const Classifier& model, const Tensor4& x,
                                                const std::vector<int>& labels);

// All attacks return a point inside the epsilon-ball around x intersected
// with [0,1]; they see only the classifier, never the defense.
Tensor4 fgsm(const Tensor4& x, const std::vector<int>& labels, const Classifier& model,
             float epsilon);
Tensor4 pgd(const Tensor4& x, const std::vector<int>& labels, const Classifier& model,
            const AttackConfig& cfg, std::vector<Tensor4>* trajectory = nullptr);
// Momentum PGD with checkpointed step halving; returns the best-loss iterate.
Tensor4 apgd(const Tensor4& x, const std::vector<int>& labels, const Classifier& model,
             const AttackConfig& cfg, std::vector<Tensor4>* trajectory = nullptr);
// Iterative FGSM where each step routes the gradient through a random
// resize-and-pad transform with probability diversity_prob.
Tensor4 di2fgsm(const Tensor4& x, const std::vector<int>& labels, const Classifier& model,
                const AttackConfig& cfg, std::vector<Tensor4>* trajectory = nullptr);

Tensor4 run_attack(const Tensor4& x, const std::vector<int>& labels, const Classifier& model,
                   const AttackConfig& cfg);

struct LabeledImage {
    Tensor4 image;  // (1,3,h,w)
    int label = 0;
};

struct ClassifierTrainResult {
    Classifier model;
    double holdout_accuracy = 0.0;
    std::vector<double> epoch_losses;
};

// Cross-entropy training with Adam on an 80/20 deterministic split; reports
// clean accuracy on the held-out part.
ClassifierTrainResult train_toy_classifier(const std::vector<LabeledImage>& dataset, int epochs,
                                           float learning_rate, std::uint64_t seed);

}  // namespace sesr
