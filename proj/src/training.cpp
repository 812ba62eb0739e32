#include "sesr/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sesr/resize.hpp"

namespace sesr {

void TrainConfig::validate() const {
    if (epochs <= 0 || batch_size <= 0 || patch_size <= 0)
        throw ConfigError("train config: epochs, batch size and patch size must be positive");
    if (learning_rate <= 0.0f) throw ConfigError("train config: learning rate must be positive");
}

AdamState make_adam_state(const WeightStore& params) {
    AdamState s;
    s.m.resize(params.size());
    s.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        s.m[i].assign(params[i].size(), 0.0f);
        s.v[i].assign(params[i].size(), 0.0f);
    }
    return s;
}

void adam_step(WeightStore& params, const WeightStore& grads, AdamState& state,
               float learning_rate) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (grads.size() != params.size()) throw StateError("adam_step: gradient store mismatch");
    state.step += 1;
    const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].size() != params[i].size())
            throw StateError("adam_step: gradient array mismatch at layer " + std::to_string(i));
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t j = 0; j < params[i].size(); ++j) {
            const double g = grads[i][j];
            const double mj = beta1 * m[j] + (1.0 - beta1) * g;
            const double vj = beta2 * v[j] + (1.0 - beta2) * g * g;
            m[j] = static_cast<float>(mj);
            v[j] = static_cast<float>(vj);
            const double m_hat = mj / corr1;
            const double v_hat = vj / corr2;
            params[i][j] -= static_cast<float>(learning_rate * m_hat / (std::sqrt(v_hat) + eps));
        }
    }
}

void sgd_step(WeightStore& params, const WeightStore& grads, float learning_rate) {
    if (grads.size() != params.size()) throw StateError("sgd_step: gradient store mismatch");
    for (std::size_t i = 0; i < params.size(); ++i)
        for (std::size_t j = 0; j < params[i].size(); ++j)
            params[i][j] -= learning_rate * grads[i][j];
}

LossValue mae_loss(const Tensor4& pred, const Tensor4& target) {
    if (!pred.same_shape(target)) throw DimensionError("mae_loss: shape mismatch");
    LossValue lv;
    lv.grad = Tensor4(pred.n, pred.c, pred.h, pred.w);
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - static_cast<double>(target.data[i]);
        acc += std::fabs(d);
        lv.grad.data[i] = static_cast<float>((d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) * inv_n);
    }
    lv.value = acc * inv_n;
    return lv;
}

LossValue mse_loss(const Tensor4& pred, const Tensor4& target) {
    if (!pred.same_shape(target)) throw DimensionError("mse_loss: shape mismatch");
    LossValue lv;
    lv.grad = Tensor4(pred.n, pred.c, pred.h, pred.w);
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - static_cast<double>(target.data[i]);
        acc += d * d;
        lv.grad.data[i] = static_cast<float>(2.0 * d * inv_n);
    }
    lv.value = acc * inv_n;
    return lv;
}

LossValue cross_entropy_loss(const Tensor4& logits, const std::vector<int>& labels) {
    if (logits.h != 1 || logits.w != 1)
        throw DimensionError("cross_entropy_loss: logits must be (n,classes,1,1)");
    if (static_cast<int>(labels.size()) != logits.n)
        throw DimensionError("cross_entropy_loss: label count does not match batch axis");
    LossValue lv;
    lv.grad = Tensor4(logits.n, logits.c, 1, 1);
    const double inv_n = 1.0 / static_cast<double>(logits.n);
    double acc = 0.0;
    for (int in = 0; in < logits.n; ++in) {
        const int y = labels[in];
        if (y < 0 || y >= logits.c)
            throw ConfigError("cross_entropy_loss: label " + std::to_string(y) + " out of range");
        double max_logit = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < logits.c; ++k)
            max_logit = std::max(max_logit, static_cast<double>(logits.at(in, k, 0, 0)));
        double denom = 0.0;
        for (int k = 0; k < logits.c; ++k)
            denom += std::exp(static_cast<double>(logits.at(in, k, 0, 0)) - max_logit);
        acc -= static_cast<double>(logits.at(in, y, 0, 0)) - max_logit - std::log(denom);
        for (int k = 0; k < logits.c; ++k) {
            const double p =
                std::exp(static_cast<double>(logits.at(in, k, 0, 0)) - max_logit) / denom;
            lv.grad.at(in, k, 0, 0) = static_cast<float>((p - (k == y ? 1.0 : 0.0)) * inv_n);
        }
    }
    lv.value = acc * inv_n;
    return lv;
}

double psnr(const Tensor4& a, const Tensor4& b, double peak) {
    if (!a.same_shape(b)) throw DimensionError("psnr: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

PairDataset make_lr_hr_pairs(const std::vector<Tensor4>& hr_images, int patch, int count,
                             std::uint64_t seed) {
    if (patch <= 0 || count <= 0) throw ConfigError("make_lr_hr_pairs: bad patch/count");
    PairDataset ds;
    const int hr_patch = 2 * patch;
    std::vector<const Tensor4*> usable;
    for (const auto& img : hr_images) {
        if (img.h >= hr_patch && img.w >= hr_patch)
            usable.push_back(&img);
        else
            ds.skipped_images += 1;
    }
    if (usable.empty()) return ds;
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        const Tensor4& img = *usable[rng.next_below(usable.size())];
        // even offsets keep the LR grid aligned with the HR grid
        const int max_y = (img.h - hr_patch) / 2;
        const int max_x = (img.w - hr_patch) / 2;
        const int y0 = 2 * (max_y > 0 ? rng.uniform_int(0, max_y) : 0);
        const int x0 = 2 * (max_x > 0 ? rng.uniform_int(0, max_x) : 0);
        SrPair pair;
        pair.hr = Tensor4(1, img.c, hr_patch, hr_patch);
        for (int c = 0; c < img.c; ++c)
            for (int y = 0; y < hr_patch; ++y)
                for (int x = 0; x < hr_patch; ++x)
                    pair.hr.at(0, c, y, x) = img.at(0, c, y0 + y, x0 + x);
        pair.lr = bicubic_downscale(pair.hr, 2);
        ds.pairs.push_back(std::move(pair));
    }
    return ds;
}

SrTrainResult train_sr(const NetworkSpec& net, const PairDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.pairs.empty()) throw ConfigError("train_sr: empty dataset");
    if (!cfg.allow_plain)
        for (const auto& layer : net.layers)
            if (std::holds_alternative<ConvLayer>(layer) ||
                std::holds_alternative<ConvTransposeLayer>(layer))
                throw StructuralError(
                    "train_sr: network is not in expanded form (plain conv found); "
                    "expand it or opt into direct training with allow_plain");

    SrTrainResult res;
    res.weights = init_weights(net, cfg.seed);
    AdamState adam = make_adam_state(res.weights);
    Rng rng(derive_seed(cfg.seed, 0x5e5e));

    std::vector<std::size_t> order(data.pairs.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the project RNG, deterministic under seed
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.next_below(i)]);

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const int bn = static_cast<int>(end - start);
            const Tensor4& proto_lr = data.pairs[order[start]].lr;
            const Tensor4& proto_hr = data.pairs[order[start]].hr;
            Tensor4 lr(bn, proto_lr.c, proto_lr.h, proto_lr.w);
            Tensor4 hr(bn, proto_hr.c, proto_hr.h, proto_hr.w);
            for (int b = 0; b < bn; ++b) {
                const SrPair& pair = data.pairs[order[start + b]];
                std::copy(pair.lr.data.begin(), pair.lr.data.end(),
                          lr.data.begin() + static_cast<std::size_t>(b) * pair.lr.size());
                std::copy(pair.hr.data.begin(), pair.hr.data.end(),
                          hr.data.begin() + static_cast<std::size_t>(b) * pair.hr.size());
            }
            ForwardTrace trace = forward_traced(net, res.weights, lr);
            LossValue loss = cfg.loss == LossKind::Mse ? mse_loss(trace.output, hr)
                                                       : mae_loss(trace.output, hr);
            if (!std::isfinite(loss.value))
                throw TrainingDivergedError("train_sr: loss became non-finite", epoch);
            BackwardResult grads = backward(net, res.weights, trace, loss.grad);
            if (cfg.optimizer == OptimizerKind::Adam)
                adam_step(res.weights, grads.grad_store, adam, cfg.learning_rate);
            else
                sgd_step(res.weights, grads.grad_store, cfg.learning_rate);
            epoch_loss += loss.value;
            batches += 1;
        }
        res.log.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
    }

    // Trend check over epoch-averaged windows: consecutive window means must
    // not rise beyond a small absolute slack (absorbs converged-floor noise).
    const std::size_t window = std::max<std::size_t>(1, res.log.epoch_losses.size() / 10);
    std::vector<double> means;
    for (std::size_t start = 0; start + window <= res.log.epoch_losses.size(); start += window) {
        double acc = 0.0;
        for (std::size_t i = start; i < start + window; ++i) acc += res.log.epoch_losses[i];
        means.push_back(acc / static_cast<double>(window));
    }
    std::size_t ok = 0, total = 0;
    for (std::size_t i = 1; i < means.size(); ++i) {
        total += 1;
        if (means[i] <= means[i - 1] + 1e-4) ok += 1;
    }
    res.log.nonincreasing_fraction = total == 0 ? 1.0 : static_cast<double>(ok) / total;
    return res;
}

}  // namespace sesr
