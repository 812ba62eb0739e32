#pragma once

#include <cstdint>
#include <vector>

#include "sesr/network.hpp"

namespace sesr {

enum class LossKind { Mae, Mse, CrossEntropy };
enum class OptimizerKind { Adam, Sgd };

struct TrainConfig {
    int epochs = 100;
    int batch_size = 8;
    float learning_rate = 1e-3f;
    OptimizerKind optimizer = OptimizerKind::Adam;
    LossKind loss = LossKind::Mae;
    std::uint64_t seed = 1;
    int patch_size = 32;  // LR patch extent; HR pairs are 2x
    // train_sr normally insists on expanded (linear-block) networks; plain
    // nets like fsrcnn opt in to direct training with this flag
    bool allow_plain = false;

    void validate() const;
};

// Bias-corrected Adam (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) over a set of
// parameter arrays. One state per trained store.
struct AdamState {
    std::vector<std::vector<float>> m, v;
    std::uint64_t step = 0;
};
AdamState make_adam_state(const WeightStore& params);
void adam_step(WeightStore& params, const WeightStore& grads, AdamState& state,
               float learning_rate);
void sgd_step(WeightStore& params, const WeightStore& grads, float learning_rate);

// Mean-reduced losses with their input gradients.
struct LossValue {
    double value = 0.0;
    Tensor4 grad;
};
LossValue mae_loss(const Tensor4& pred, const Tensor4& target);
LossValue mse_loss(const Tensor4& pred, const Tensor4& target);
// logits: (n, classes, 1, 1); mean cross-entropy over the batch.
LossValue cross_entropy_loss(const Tensor4& logits, const std::vector<int>& labels);

// 10*log10(peak^2 / MSE) over all elements; +infinity when images match.
double psnr(const Tensor4& a, const Tensor4& b, double peak = 1.0);

struct SrPair {
    Tensor4 lr;  // (1,3,k,k)
    Tensor4 hr;  // (1,3,2k,2k)
};
struct PairDataset {
    std::vector<SrPair> pairs;
    int skipped_images = 0;
};
// Random HR crops of 2*patch with bicubic-downscaled LR halves. Images too
// small for a crop are skipped and counted.
PairDataset make_lr_hr_pairs(const std::vector<Tensor4>& hr_images, int patch, int count,
                             std::uint64_t seed);

struct TrainingLog {
    std::vector<double> epoch_losses;
    // fraction of consecutive epoch-window mean pairs (window = epochs/10)
    // that do not rise beyond a 1e-4 absolute slack
    double nonincreasing_fraction = 0.0;
};
struct SrTrainResult {
    WeightStore weights;
    TrainingLog log;
};
// Trains an expanded-form SR net on LR/HR pairs; MAE by default. Throws
// TrainingDivergedError when the loss leaves the finite range.
SrTrainResult train_sr(const NetworkSpec& net, const PairDataset& data, const TrainConfig& cfg);

}  // namespace sesr
