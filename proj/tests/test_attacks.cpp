#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sesr/attacks.hpp"
#include "sesr/synth.hpp"

using namespace sesr;

namespace {

constexpr float kEps = 8.0f / 255.0f;

// One-pixel model with dense weights (0, 1): for label 0 the loss gradient
// w.r.t. the pixel is p1 * 1 > 0 everywhere, so sign(grad) = +1.
Classifier one_pixel_model() {
    Classifier m;
    m.input_size = 1;
    m.num_classes = 2;
    m.net.name = "one_pixel";
    m.net.layers.emplace_back(FlattenLayer{});
    DenseLayer head;
    head.spec.in = 3;
    head.spec.out = 2;
    m.net.layers.emplace_back(head);
    m.weights.resize(2);
    m.weights[1] = {0.0f, 0.0f, 0.0f,   // class 0 row
                    1.0f, 1.0f, 1.0f,   // class 1 row
                    0.0f, 0.0f};        // bias
    return m;
}

Tensor4 gray_pixel(float v) {
    Tensor4 x(1, 3, 1, 1);
    for (auto& d : x.data) d = v;
    return x;
}

bool in_ball_and_range(const Tensor4& adv, const Tensor4& x, float eps) {
    for (std::size_t i = 0; i < adv.size(); ++i) {
        if (std::fabs(adv.data[i] - x.data[i]) > eps + 1e-6f) return false;
        if (adv.data[i] < 0.0f || adv.data[i] > 1.0f) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("fgsm: zero epsilon is the identity") {
    const Classifier m = one_pixel_model();
    const Tensor4 x = gray_pixel(0.5f);
    CHECK(fgsm(x, {0}, m, 0.0f).data == x.data);
}

TEST_CASE("fgsm: analytic one-pixel model moves by exactly epsilon") {
    const Classifier m = one_pixel_model();
    const Tensor4 x = gray_pixel(0.5f);
    const Tensor4 adv = fgsm(x, {0}, m, kEps);
    for (float v : adv.data) CHECK(v == doctest::Approx(0.5f + kEps));
}

TEST_CASE("pgd: two constant-gradient steps move by 2*alpha") {
    const Classifier m = one_pixel_model();
    const Tensor4 x = gray_pixel(0.5f);
    AttackConfig cfg;
    cfg.kind = AttackKind::Pgd;
    cfg.steps = 2;
    cfg.alpha = 2.0f / 255.0f;
    cfg.epsilon = kEps;
    cfg.random_start = false;
    const Tensor4 adv = pgd(x, {0}, m, cfg);
    for (float v : adv.data) CHECK(v == doctest::Approx(0.5f + 4.0f / 255.0f));
}

TEST_CASE("pgd with one step, no start and alpha=eps equals fgsm") {
    const Classifier toy = build_toy_classifier(16, 3, 21);
    Rng rng(3);
    Tensor4 x = Tensor4::random_uniform(1, 3, 16, 16, rng);
    AttackConfig cfg;
    cfg.kind = AttackKind::Pgd;
    cfg.steps = 1;
    cfg.alpha = kEps;
    cfg.epsilon = kEps;
    cfg.random_start = false;
    CHECK(pgd(x, {1}, toy, cfg).data == fgsm(x, {1}, toy, kEps).data);
}

TEST_CASE("every attack respects the ball and range invariants") {
    const Classifier toy = build_toy_classifier(16, 4, 2024);
    Rng rng(55);
    for (int trial = 0; trial < 5; ++trial) {
        Tensor4 x = Tensor4::random_uniform(1, 3, 16, 16, rng);
        const int label = static_cast<int>(rng.next_below(4));
        AttackConfig cfg;
        cfg.epsilon = kEps;
        cfg.steps = 6;
        cfg.seed = 100 + trial;
        CHECK(in_ball_and_range(fgsm(x, {label}, toy, kEps), x, kEps));
        cfg.kind = AttackKind::Pgd;
        CHECK(in_ball_and_range(pgd(x, {label}, toy, cfg), x, kEps));
        cfg.kind = AttackKind::Apgd;
        CHECK(in_ball_and_range(apgd(x, {label}, toy, cfg), x, kEps));
        cfg.kind = AttackKind::Di2Fgsm;
        CHECK(in_ball_and_range(di2fgsm(x, {label}, toy, cfg), x, kEps));
    }
}

TEST_CASE("pgd raises the loss on most random starts") {
    const Classifier toy = build_toy_classifier(16, 3, 9);
    Rng rng(77);
    int raised = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        Tensor4 x = Tensor4::random_uniform(1, 3, 16, 16, rng);
        const int label = static_cast<int>(rng.next_below(3));
        AttackConfig cfg;
        cfg.kind = AttackKind::Pgd;
        cfg.steps = 8;
        cfg.seed = t;
        const Tensor4 adv = pgd(x, {label}, toy, cfg);
        const double before = classifier_loss_grad(toy, x, {label}).first;
        const double after = classifier_loss_grad(toy, adv, {label}).first;
        if (after >= before) raised += 1;
    }
    CHECK(raised >= trials * 95 / 100);
}

TEST_CASE("apgd: disabled halving and zero momentum walk pgd's trajectory") {
    const Classifier toy = build_toy_classifier(16, 3, 5);
    Rng rng(8);
    Tensor4 x = Tensor4::random_uniform(1, 3, 16, 16, rng);
    AttackConfig cfg;
    cfg.steps = 6;
    cfg.epsilon = kEps;
    cfg.random_start = false;
    cfg.momentum = 0.0f;
    cfg.adaptive = false;

    std::vector<Tensor4> pgd_track, apgd_track;
    cfg.kind = AttackKind::Pgd;
    pgd(x, {2}, toy, cfg, &pgd_track);
    cfg.kind = AttackKind::Apgd;
    apgd(x, {2}, toy, cfg, &apgd_track);
    REQUIRE(pgd_track.size() == apgd_track.size());
    for (std::size_t i = 0; i < pgd_track.size(); ++i)
        CHECK(pgd_track[i].data == apgd_track[i].data);
}

TEST_CASE("apgd best-iterate bookkeeping") {
    // benign monotone 1-D landscape: both walks climb to the ball boundary,
    // and the best iterate must attain at least pgd's final loss
    const Classifier m = one_pixel_model();
    const Tensor4 x = gray_pixel(0.5f);
    AttackConfig cfg;
    cfg.steps = 12;
    cfg.epsilon = kEps;
    cfg.alpha = 2.0f / 255.0f;
    cfg.random_start = false;
    cfg.kind = AttackKind::Pgd;
    cfg.momentum = 0.0f;
    const Tensor4 plain = pgd(x, {0}, m, cfg);
    cfg.kind = AttackKind::Apgd;
    cfg.momentum = 0.75f;
    const Tensor4 best = apgd(x, {0}, m, cfg);
    const double pgd_loss = classifier_loss_grad(m, plain, {0}).first;
    const double apgd_loss = classifier_loss_grad(m, best, {0}).first;
    CHECK(apgd_loss >= pgd_loss - 1e-9);

    // on any model the returned iterate can never lose to the start point
    const Classifier toy = build_toy_classifier(16, 3, 63);
    Rng rng(15);
    for (int t = 0; t < 5; ++t) {
        Tensor4 xr = Tensor4::random_uniform(1, 3, 16, 16, rng);
        const int label = static_cast<int>(rng.next_below(3));
        AttackConfig ac;
        ac.kind = AttackKind::Apgd;
        ac.steps = 12;
        ac.epsilon = kEps;
        ac.random_start = false;
        ac.seed = 900 + t;
        const Tensor4 adv = apgd(xr, {label}, toy, ac);
        CHECK(classifier_loss_grad(toy, adv, {label}).first >=
              classifier_loss_grad(toy, xr, {label}).first - 1e-9);
    }
}

TEST_CASE("di2fgsm with zero diversity and zero momentum is plain pgd") {
    const Classifier toy = build_toy_classifier(16, 3, 99);
    Rng rng(4);
    Tensor4 x = Tensor4::random_uniform(1, 3, 16, 16, rng);
    AttackConfig cfg;
    cfg.steps = 5;
    cfg.epsilon = kEps;
    cfg.random_start = false;
    cfg.momentum = 0.0f;
    cfg.diversity_prob = 0.0f;

    std::vector<Tensor4> a, b;
    cfg.kind = AttackKind::Di2Fgsm;
    di2fgsm(x, {0}, toy, cfg, &a);
    cfg.kind = AttackKind::Pgd;
    pgd(x, {0}, toy, cfg, &b);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);
}

TEST_CASE("di2fgsm is bit-deterministic under a fixed seed") {
    const Classifier toy = build_toy_classifier(16, 3, 1);
    Rng rng(2);
    Tensor4 x = Tensor4::random_uniform(1, 3, 16, 16, rng);
    AttackConfig cfg;
    cfg.kind = AttackKind::Di2Fgsm;
    cfg.steps = 6;
    cfg.seed = 777;
    const Tensor4 a = di2fgsm(x, {1}, toy, cfg);
    const Tensor4 b = di2fgsm(x, {1}, toy, cfg);
    CHECK(a.data == b.data);
}

TEST_CASE("attack config validation") {
    AttackConfig cfg;
    cfg.epsilon = 0.0f;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = AttackConfig{};
    cfg.kind = AttackKind::Apgd;
    cfg.steps = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = AttackConfig{};
    cfg.diversity_prob = 1.5f;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("toy classifier: linearly separable brightness classes train to 99%") {
    std::vector<LabeledImage> items;
    Rng rng(10);
    for (int i = 0; i < 120; ++i) {
        LabeledImage item;
        item.label = i % 2;
        const float base = item.label == 0 ? 0.25f : 0.75f;
        item.image = Tensor4(1, 3, 16, 16);
        for (auto& v : item.image.data) v = base + rng.uniform(-0.1f, 0.1f);
        items.push_back(std::move(item));
    }
    const ClassifierTrainResult res = train_toy_classifier(items, 60, 2e-3f, 3);
    CHECK(res.holdout_accuracy >= 0.99);
    CHECK_THROWS_AS(train_toy_classifier({}, 1, 1e-3f, 1), ConfigError);
}

TEST_CASE("classify breaks ties toward the lowest class index") {
    Classifier m;
    m.input_size = 1;
    m.num_classes = 3;
    m.net.layers.emplace_back(FlattenLayer{});
    DenseLayer head;
    head.spec.in = 3;
    head.spec.out = 3;
    m.net.layers.emplace_back(head);
    m.weights.resize(2);
    m.weights[1].assign(3 * 3 + 3, 0.0f);  // all logits identical
    CHECK(classify(m, gray_pixel(0.4f)) == 0);
}
