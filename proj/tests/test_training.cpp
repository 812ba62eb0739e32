#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "sesr/models.hpp"
#include "sesr/resize.hpp"
#include "sesr/synth.hpp"
#include "sesr/training.hpp"

using namespace sesr;

TEST_CASE("adam: zero gradient leaves parameters untouched, state decays") {
    WeightStore params = {{1.0f, -2.0f}};
    WeightStore grads = {{0.0f, 0.0f}};
    AdamState state = make_adam_state(params);
    state.m[0] = {0.5f, 0.5f};
    state.v[0] = {0.25f, 0.25f};
    adam_step(params, grads, state, 0.0f);
    CHECK(params[0][0] == 1.0f);
    CHECK(params[0][1] == -2.0f);
    CHECK(state.m[0][0] == doctest::Approx(0.45f));   // beta1 decay
    CHECK(state.v[0][0] == doctest::Approx(0.24975f));  // beta2 decay
}

TEST_CASE("adam: first-step magnitude matches the hand-computed value") {
    WeightStore params = {{0.0f}};
    WeightStore grads = {{0.1f}};
    AdamState state = make_adam_state(params);
    adam_step(params, grads, state, 0.01f);
    // bias-corrected first step: -lr * g / (|g| + eps) = -0.00999999...
    CHECK(params[0][0] == doctest::Approx(-0.00999999).epsilon(1e-6));
}

TEST_CASE("adam treats identical tensors identically") {
    WeightStore params = {{0.3f, -0.7f}, {0.3f, -0.7f}};
    WeightStore grads = {{0.05f, -0.2f}, {0.05f, -0.2f}};
    AdamState state = make_adam_state(params);
    adam_step(params, grads, state, 1e-3f);
    CHECK(params[0] == params[1]);
}

TEST_CASE("psnr unit cases") {
    Tensor4 a(1, 1, 2, 2), b(1, 1, 2, 2);
    for (auto& v : a.data) v = 0.5f;
    b = a;
    CHECK(psnr(a, b) == std::numeric_limits<double>::infinity());

    for (auto& v : b.data) v = 1.5f;  // MSE = 1 = peak^2
    CHECK(psnr(a, b, 1.0) == doctest::Approx(0.0));

    Tensor4 zeros(1, 1, 2, 2), halves(1, 1, 2, 2);
    for (auto& v : halves.data) v = 0.5f;
    CHECK(psnr(zeros, halves) == doctest::Approx(10.0 * std::log10(1.0 / 0.25)).epsilon(1e-6));

    CHECK_THROWS_AS(psnr(a, Tensor4(1, 1, 3, 3)), DimensionError);
}

TEST_CASE("make_lr_hr_pairs: constants, determinism, counts, skipping") {
    Tensor4 flat(1, 3, 64, 64);
    for (auto& v : flat.data) v = 0.6f;
    const PairDataset constant = make_lr_hr_pairs({flat}, 16, 4, 5);
    REQUIRE(constant.pairs.size() == 4);
    for (const auto& pair : constant.pairs) {
        CHECK(pair.lr.h == 16);
        CHECK(pair.hr.h == 32);
        for (float v : pair.lr.data) CHECK(v == doctest::Approx(0.6f).epsilon(1e-6));
    }

    const auto images = make_natural_images(3, 64, 64, 77);
    const PairDataset a = make_lr_hr_pairs(images, 12, 10, 21);
    const PairDataset b = make_lr_hr_pairs(images, 12, 10, 21);
    REQUIRE(a.pairs.size() == b.pairs.size());
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
        CHECK(a.pairs[i].lr.data == b.pairs[i].lr.data);
        CHECK(a.pairs[i].hr.data == b.pairs[i].hr.data);
    }

    Tensor4 tiny(1, 3, 8, 8);
    const PairDataset skipped = make_lr_hr_pairs({tiny, flat}, 16, 6, 1);
    CHECK(skipped.skipped_images == 1);
    CHECK(skipped.pairs.size() == 6);
}

TEST_CASE("train_sr rejects collapsed networks and empty data") {
    const NetworkSpec collapsed = build_sesr(SesrConfig::m2(), NetForm::Collapsed);
    TrainConfig cfg;
    cfg.epochs = 1;
    PairDataset empty;
    CHECK_THROWS_AS(train_sr(collapsed, empty, cfg), ConfigError);
    Tensor4 flat(1, 3, 64, 64);
    const PairDataset data = make_lr_hr_pairs({flat}, 8, 2, 1);
    CHECK_THROWS_AS(train_sr(collapsed, data, cfg), StructuralError);
}

TEST_CASE("plain nets train directly when flagged") {
    const NetworkSpec fsrcnn = build_fsrcnn();
    const auto images = make_natural_images(2, 32, 32, 40);
    const PairDataset data = make_lr_hr_pairs(images, 8, 4, 11);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 2;
    cfg.seed = 12;
    CHECK_THROWS_AS(train_sr(fsrcnn, data, cfg), StructuralError);
    cfg.allow_plain = true;
    const SrTrainResult res = train_sr(fsrcnn, data, cfg);
    CHECK(res.log.epoch_losses.back() < res.log.epoch_losses.front());
}

TEST_CASE("single-pair overfit drives the loss down") {
    SesrConfig small = SesrConfig::m2();
    small.expansion = 16;
    const NetworkSpec net = build_sesr(small, NetForm::Expanded);
    const auto images = make_natural_images(1, 32, 32, 3);
    const PairDataset data = make_lr_hr_pairs(images, 8, 1, 9);
    TrainConfig cfg;
    cfg.epochs = 150;
    cfg.batch_size = 1;
    cfg.learning_rate = 1e-3f;
    cfg.seed = 4;
    const SrTrainResult res = train_sr(net, data, cfg);
    CHECK(res.log.epoch_losses.back() < 1e-2);
    CHECK(res.log.nonincreasing_fraction >= 0.9);
}

TEST_CASE("mae and mse produce different trajectories") {
    SesrConfig small = SesrConfig::m2();
    small.expansion = 16;
    const NetworkSpec net = build_sesr(small, NetForm::Expanded);
    const auto images = make_natural_images(2, 32, 32, 8);
    const PairDataset data = make_lr_hr_pairs(images, 8, 4, 2);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 5;
    cfg.loss = LossKind::Mae;
    const SrTrainResult mae = train_sr(net, data, cfg);
    cfg.loss = LossKind::Mse;
    const SrTrainResult mse = train_sr(net, data, cfg);
    CHECK(mae.weights[1] != mse.weights[1]);
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
    SesrConfig small = SesrConfig::m2();
    small.expansion = 8;
    const NetworkSpec net = build_sesr(small, NetForm::Expanded);
    const auto images = make_natural_images(2, 32, 32, 13);
    const PairDataset data = make_lr_hr_pairs(images, 8, 3, 6);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.seed = 77;
    const SrTrainResult a = train_sr(net, data, cfg);
    const SrTrainResult b = train_sr(net, data, cfg);
    for (std::size_t i = 0; i < a.weights.size(); ++i) CHECK(a.weights[i] == b.weights[i]);
}

TEST_CASE("nearest-upscale targets are learned nearly exactly") {
    // HR = nearest(LR) is representable with zero convs through the global
    // skip, so training must reach a tiny error quickly.
    SesrConfig small = SesrConfig::m2();
    small.expansion = 16;
    const NetworkSpec net = build_sesr(small, NetForm::Expanded);
    const auto images = make_natural_images(2, 40, 40, 30);
    PairDataset data;
    Rng rng(31);
    for (int i = 0; i < 4; ++i) {
        SrPair pair;
        pair.lr = Tensor4::random_uniform(1, 3, 16, 16, rng);
        pair.hr = nearest_upscale(pair.lr, 2);
        data.pairs.push_back(std::move(pair));
    }
    TrainConfig cfg;
    cfg.epochs = 120;
    cfg.batch_size = 2;
    cfg.learning_rate = 1e-3f;
    cfg.seed = 15;
    const SrTrainResult res = train_sr(net, data, cfg);
    CHECK(res.log.epoch_losses.back() < 0.02);
}
