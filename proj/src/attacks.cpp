#include "sesr/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sesr/training.hpp"

namespace sesr {

AttackKind attack_from_name(const std::string& name) {
    if (name == "fgsm") return AttackKind::Fgsm;
    if (name == "pgd") return AttackKind::Pgd;
    if (name == "apgd") return AttackKind::Apgd;
    if (name == "di2fgsm") return AttackKind::Di2Fgsm;
    throw ConfigError("unknown attack '" + name + "'");
}

std::string attack_name(AttackKind kind) {
    switch (kind) {
        case AttackKind::Fgsm: return "fgsm";
        case AttackKind::Pgd: return "pgd";
        case AttackKind::Apgd: return "apgd";
        default: return "di2fgsm";
    }
}

void AttackConfig::validate() const {
    if (epsilon <= 0.0f || epsilon > 1.0f)
        throw ConfigError("attack: epsilon must be in (0,1]");
    if (alpha <= 0.0f) throw ConfigError("attack: alpha must be positive");
    if (diversity_prob < 0.0f || diversity_prob > 1.0f)
        throw ConfigError("attack: diversity_prob must be in [0,1]");
    if (kind != AttackKind::Fgsm && steps < 1) throw ConfigError("attack: steps must be >= 1");
    if (kind == AttackKind::Apgd && steps < 2)
        throw ConfigError("attack: apgd needs at least 2 steps");
}

Classifier build_toy_classifier(int input_size, int num_classes, std::uint64_t seed) {
    if (input_size % 8 != 0)
        throw ConfigError("toy classifier input size must be divisible by 8");
    if (num_classes < 2) throw ConfigError("toy classifier needs at least 2 classes");
    Classifier m;
    m.input_size = input_size;
    m.num_classes = num_classes;
    m.net.name = "toy_cnn_" + std::to_string(input_size);
    auto block = [&](int c_in, int c_out) {
        ConvLayer conv;
        conv.spec = ConvSpec::same(3, c_in, c_out);
        m.net.layers.emplace_back(conv);
        m.net.layers.emplace_back(ActivationLayer{ActKind::Relu});
        m.net.layers.emplace_back(AvgPoolLayer{});
    };
    block(3, 16);
    block(16, 32);
    block(32, 64);
    m.net.layers.emplace_back(FlattenLayer{});
    DenseLayer head;
    head.spec.in = 64 * (input_size / 8) * (input_size / 8);
    head.spec.out = num_classes;
    m.net.layers.emplace_back(head);
    m.weights = init_weights(m.net, seed);
    return m;
}

Tensor4 classifier_logits(const Classifier& model, const Tensor4& x) {
    if (x.h != model.input_size || x.w != model.input_size)
        throw DimensionError("classifier: expected " + std::to_string(model.input_size) + "x" +
                             std::to_string(model.input_size) + " input, got " +
                             std::to_string(x.h) + "x" + std::to_string(x.w));
    return forward(model.net, model.weights, x);
}

int classify(const Classifier& model, const Tensor4& image, std::vector<float>* logits_out) {
    Tensor4 logits = classifier_logits(model, image);
    int best = 0;
    for (int k = 1; k < logits.c; ++k)
        if (logits.at(0, k, 0, 0) > logits.at(0, best, 0, 0)) best = k;
    if (logits_out) {
        logits_out->resize(logits.c);
        for (int k = 0; k < logits.c; ++k) (*logits_out)[k] = logits.at(0, k, 0, 0);
    }
    return best;
}

std::pair<double, Tensor4> classifier_loss_grad(const Classifier& model, const Tensor4& x,
                                                const std::vector<int>& labels) {
    ForwardTrace trace = forward_traced(model.net, model.weights, x);
    LossValue loss = cross_entropy_loss(trace.output, labels);
    BackwardResult back = backward(model.net, model.weights, trace, loss.grad);
    return {loss.value, std::move(back.grad_input)};
}

namespace {

inline float sign_of(float v) { return v > 0.0f ? 1.0f : (v < 0.0f ? -1.0f : 0.0f); }

Tensor4 signed_step(const Tensor4& x, const Tensor4& grad, float alpha) {
    Tensor4 out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += alpha * sign_of(grad.data[i]);
    return out;
}

Tensor4 project(const Tensor4& x, const Tensor4& origin, float eps) {
    return clamp01(clamp_ball(x, origin, eps));
}

}  // namespace

Tensor4 fgsm(const Tensor4& x, const std::vector<int>& labels, const Classifier& model,
             float epsilon) {
    if (epsilon == 0.0f) return x;
    if (epsilon < 0.0f || epsilon > 1.0f) throw ConfigError("fgsm: epsilon must be in [0,1]");
    auto [loss, grad] = classifier_loss_grad(model, x, labels);
    (void)loss;
    return clamp01(signed_step(x, grad, epsilon));
}

Tensor4 pgd(const Tensor4& x, const std::vector<int>& labels, const Classifier& model,
            const AttackConfig& cfg, std::vector<Tensor4>* trajectory) {
    cfg.validate();
    Tensor4 cur = x;
    if (cfg.random_start) {
        Rng rng(derive_seed(cfg.seed, 0x9d));
        for (auto& v : cur.data) v += rng.uniform(-cfg.epsilon, cfg.epsilon);
        cur = project(cur, x, cfg.epsilon);
    }
    for (int step = 0; step < cfg.steps; ++step) {
        auto [loss, grad] = classifier_loss_grad(model, cur, labels);
        (void)loss;
        cur = project(signed_step(cur, grad, cfg.alpha), x, cfg.epsilon);
        if (trajectory) trajectory->push_back(cur);
    }
    return cur;
}

Tensor4 apgd(const Tensor4& x, const std::vector<int>& labels, const Classifier& model,
             const AttackConfig& cfg, std::vector<Tensor4>* trajectory) {
    cfg.validate();
    // checkpoint steps where the improvement rate is reviewed
    constexpr double kFractions[] = {0.22, 0.4, 0.55, 0.7, 0.85};
    std::vector<int> checkpoints;
    for (double f : kFractions) {
        const int s = static_cast<int>(std::ceil(f * cfg.steps));
        if (s >= 1 && s < cfg.steps && (checkpoints.empty() || checkpoints.back() != s))
            checkpoints.push_back(s);
    }

    Tensor4 cur = x;
    if (cfg.random_start) {
        Rng rng(derive_seed(cfg.seed, 0xa9d));
        for (auto& v : cur.data) v += rng.uniform(-cfg.epsilon, cfg.epsilon);
        cur = project(cur, x, cfg.epsilon);
    }
    Tensor4 prev = cur;

    auto [loss, grad] = classifier_loss_grad(model, cur, labels);
    Tensor4 best = cur;
    double best_loss = loss;
    double prev_loss = loss;

    float alpha = cfg.alpha;
    int improving = 0;
    int since_checkpoint = 0;
    std::size_t next_checkpoint = 0;

    for (int step = 1; step <= cfg.steps; ++step) {
        Tensor4 candidate = signed_step(cur, grad, alpha);
        if (cfg.momentum != 0.0f)
            for (std::size_t i = 0; i < candidate.size(); ++i)
                candidate.data[i] += cfg.momentum * (cur.data[i] - prev.data[i]);
        prev = cur;
        cur = project(candidate, x, cfg.epsilon);
        if (trajectory) trajectory->push_back(cur);

        std::tie(loss, grad) = classifier_loss_grad(model, cur, labels);
        since_checkpoint += 1;
        if (loss > prev_loss) improving += 1;
        prev_loss = loss;
        if (loss > best_loss) {
            best_loss = loss;
            best = cur;
        }

        if (cfg.adaptive && next_checkpoint < checkpoints.size() &&
            step == checkpoints[next_checkpoint]) {
            const double rate = static_cast<double>(improving) / since_checkpoint;
            if (rate < 0.75) {
                alpha *= 0.5f;
                cur = best;  // restart from the best iterate found so far
                prev = cur;
                std::tie(loss, grad) = classifier_loss_grad(model, cur, labels);
                prev_loss = loss;
            }
            improving = 0;
            since_checkpoint = 0;
            next_checkpoint += 1;
        }
    }
    return best;
}

namespace {

// Random resize-to-r (nearest) then zero-pad back to the original extent.
struct DiverseTransform {
    int r = 0, pad_y = 0, pad_x = 0;
    std::vector<int> map_y, map_x;

    static DiverseTransform sample(int h, int w, Rng& rng) {
        DiverseTransform t;
        const int lo = static_cast<int>(std::ceil(0.9 * h));
        t.r = rng.uniform_int(std::min(lo, h), h);
        t.pad_y = t.r < h ? rng.uniform_int(0, h - t.r) : 0;
        t.pad_x = t.r < w ? rng.uniform_int(0, w - t.r) : 0;
        t.map_y.resize(t.r);
        t.map_x.resize(t.r);
        for (int i = 0; i < t.r; ++i) {
            t.map_y[i] = std::min(h - 1, static_cast<int>((i + 0.5) * h / t.r));
            t.map_x[i] = std::min(w - 1, static_cast<int>((i + 0.5) * w / t.r));
        }
        return t;
    }

    Tensor4 apply(const Tensor4& x) const {
        Tensor4 out(x.n, x.c, x.h, x.w);
        for (int n = 0; n < x.n; ++n)
            for (int c = 0; c < x.c; ++c)
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j)
                        out.at(n, c, pad_y + i, pad_x + j) = x.at(n, c, map_y[i], map_x[j]);
        return out;
    }

    Tensor4 backward(const Tensor4& grad_out, const Tensor4& x) const {
        Tensor4 gx(x.n, x.c, x.h, x.w);
        for (int n = 0; n < x.n; ++n)
            for (int c = 0; c < x.c; ++c)
                for (int i = 0; i < r; ++i)
                    for (int j = 0; j < r; ++j)
                        gx.at(n, c, map_y[i], map_x[j]) +=
                            grad_out.at(n, c, pad_y + i, pad_x + j);
        return gx;
    }
};

}  // namespace

Tensor4 di2fgsm(const Tensor4& x, const std::vector<int>& labels, const Classifier& model,
                const AttackConfig& cfg, std::vector<Tensor4>* trajectory) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 0xd1));
    Tensor4 cur = x;
    Tensor4 momentum_acc(x.n, x.c, x.h, x.w);
    for (int step = 0; step < cfg.steps; ++step) {
        Tensor4 grad(x.n, x.c, x.h, x.w);
        if (rng.next_float() < cfg.diversity_prob) {
            const DiverseTransform t = DiverseTransform::sample(x.h, x.w, rng);
            Tensor4 transformed = t.apply(cur);
            auto [loss, g_t] = classifier_loss_grad(model, transformed, labels);
            (void)loss;
            grad = t.backward(g_t, cur);
        } else {
            auto [loss, g] = classifier_loss_grad(model, cur, labels);
            (void)loss;
            grad = std::move(g);
        }
        // MI-FGSM style accumulator; L1 scaling keeps the sign untouched
        double l1 = 0.0;
        for (float v : grad.data) l1 += std::fabs(v);
        const float inv = l1 > 0.0 ? static_cast<float>(1.0 / l1) : 0.0f;
        for (std::size_t i = 0; i < grad.size(); ++i)
            momentum_acc.data[i] = cfg.momentum * momentum_acc.data[i] + inv * grad.data[i];
        cur = project(signed_step(cur, momentum_acc, cfg.alpha), x, cfg.epsilon);
        if (trajectory) trajectory->push_back(cur);
    }
    return cur;
}

Tensor4 run_attack(const Tensor4& x, const std::vector<int>& labels, const Classifier& model,
                   const AttackConfig& cfg) {
    switch (cfg.kind) {
        case AttackKind::Fgsm: return fgsm(x, labels, model, cfg.epsilon);
        case AttackKind::Pgd: return pgd(x, labels, model, cfg);
        case AttackKind::Apgd: return apgd(x, labels, model, cfg);
        default: return di2fgsm(x, labels, model, cfg);
    }
}

ClassifierTrainResult train_toy_classifier(const std::vector<LabeledImage>& dataset, int epochs,
                                           float learning_rate, std::uint64_t seed) {
    if (dataset.empty()) throw ConfigError("train_toy_classifier: empty dataset");
    int num_classes = 0;
    for (const auto& item : dataset) num_classes = std::max(num_classes, item.label + 1);
    if (num_classes < 2) throw ConfigError("train_toy_classifier: need at least 2 classes");
    const int input_size = dataset.front().image.h;

    ClassifierTrainResult res;
    res.model = build_toy_classifier(input_size, num_classes, derive_seed(seed, 0xc1a55));

    // deterministic shuffle, 80/20 train/holdout split
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(derive_seed(seed, 0x5717));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[split_rng.next_below(i)]);
    const std::size_t train_count = std::max<std::size_t>(1, dataset.size() * 8 / 10);

    AdamState adam = make_adam_state(res.model.weights);
    Rng rng(derive_seed(seed, 0xba7c4));
    constexpr int kBatch = 16;
    std::vector<std::size_t> train_order(order.begin(), order.begin() + train_count);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = train_order.size(); i > 1; --i)
            std::swap(train_order[i - 1], train_order[rng.next_below(i)]);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < train_order.size(); start += kBatch) {
            const std::size_t end = std::min(train_order.size(), start + kBatch);
            const int bn = static_cast<int>(end - start);
            Tensor4 batch(bn, 3, input_size, input_size);
            std::vector<int> labels(bn);
            for (int b = 0; b < bn; ++b) {
                const auto& item = dataset[train_order[start + b]];
                std::copy(item.image.data.begin(), item.image.data.end(),
                          batch.data.begin() + static_cast<std::size_t>(b) * item.image.size());
                labels[b] = item.label;
            }
            ForwardTrace trace = forward_traced(res.model.net, res.model.weights, batch);
            LossValue loss = cross_entropy_loss(trace.output, labels);
            if (!std::isfinite(loss.value))
                throw TrainingDivergedError("train_toy_classifier: loss became non-finite", epoch);
            BackwardResult grads = backward(res.model.net, res.model.weights, trace, loss.grad);
            adam_step(res.model.weights, grads.grad_store, adam, learning_rate);
            epoch_loss += loss.value;
            batches += 1;
        }
        res.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
    }

    std::size_t correct = 0, total = 0;
    for (std::size_t i = train_count; i < order.size(); ++i) {
        const auto& item = dataset[order[i]];
        if (classify(res.model, item.image) == item.label) correct += 1;
        total += 1;
    }
    res.holdout_accuracy = total == 0 ? 0.0 : static_cast<double>(correct) / total;
    return res;
}

}  // namespace sesr
