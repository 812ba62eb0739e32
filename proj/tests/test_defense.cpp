#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "sesr/defense.hpp"
#include "sesr/io.hpp"
#include "sesr/jpeg.hpp"
#include "sesr/models.hpp"
#include "sesr/resize.hpp"
#include "sesr/synth.hpp"

using namespace sesr;
namespace fs = std::filesystem;

namespace {

DefenseConfig all_off() {
    DefenseConfig cfg;
    cfg.jpeg_enabled = false;
    cfg.wavelet_enabled = false;
    cfg.upscaler = Upscaler::None;
    return cfg;
}

Tensor4 noisy_test_image(int size, std::uint64_t seed) {
    Tensor4 img = make_natural_images(1, size, size, seed).front();
    Rng rng(seed + 1);
    for (auto& v : img.data)
        v = std::min(1.0f, std::max(0.0f, v + rng.uniform(-0.05f, 0.05f)));
    return img;
}

}  // namespace

TEST_CASE("all stages disabled is the identity") {
    Rng rng(1);
    Tensor4 img = Tensor4::random_uniform(1, 3, 16, 16, rng);
    CHECK(max_abs_diff(defend(img, all_off()), img) == 0.0f);
}

TEST_CASE("stages run compression -> denoising -> upscale, in that order") {
    const Tensor4 img = noisy_test_image(32, 99);
    DefenseConfig cfg;
    cfg.jpeg_enabled = true;
    cfg.jpeg_quality = 60;
    cfg.wavelet_enabled = true;
    cfg.wavelet = Wavelet::Db2;
    cfg.levels = 2;
    cfg.upscaler = Upscaler::Nearest;

    const Tensor4 got = defend(img, cfg);
    const Tensor4 want =
        nearest_upscale(wavelet_denoise(jpeg_round_trip(img, 60), Wavelet::Db2, 2), 2);
    CHECK(max_abs_diff(got, want) == 0.0f);

    // the swapped composition is a different function on real images
    const Tensor4 swapped =
        nearest_upscale(jpeg_round_trip(wavelet_denoise(img, Wavelet::Db2, 2), 60), 2);
    CHECK(max_abs_diff(got, swapped) > 0.0f);
}

TEST_CASE("toggling the compression stage changes only that stage") {
    const Tensor4 img = noisy_test_image(32, 5);
    DefenseConfig with_jpeg;
    with_jpeg.upscaler = Upscaler::Nearest;
    DefenseConfig without = with_jpeg;
    without.jpeg_enabled = false;
    const Tensor4 a = defend(img, with_jpeg);
    const Tensor4 b = defend(img, without);
    CHECK(max_abs_diff(a, b) > 0.0f);
    const Tensor4 manual =
        nearest_upscale(wavelet_denoise(img, without.wavelet, without.levels), 2);
    CHECK(max_abs_diff(b, manual) == 0.0f);
}

TEST_CASE("every upscaler doubles the extents; outputs stay in range") {
    const Tensor4 img = noisy_test_image(32, 7);
    const fs::path dir = fs::temp_directory_path() / "sesr_defense_test";
    fs::create_directories(dir);
    const std::string weights = (dir / "m2.wts").string();
    {
        const NetworkSpec net = build_preset("sesr_m2");
        save_weights(weights, net, init_weights(net, 12));
    }
    for (Upscaler up : {Upscaler::Nearest, Upscaler::Bicubic, Upscaler::SesrM2}) {
        DefenseConfig cfg;
        cfg.upscaler = up;
        if (upscaler_is_network(up)) cfg.weight_path = weights;
        const Tensor4 out = defend(img, cfg);
        CHECK(out.h == 64);
        CHECK(out.w == 64);
        for (float v : out.data) {
            CHECK(v >= 0.0f);
            CHECK(v <= 1.0f);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("299x299 inputs defend to 598x598") {
    const Tensor4 img = make_natural_images(1, 299, 299, 4242).front();
    DefenseConfig cfg;
    cfg.upscaler = Upscaler::Nearest;
    const Tensor4 out = defend(img, cfg);
    CHECK(out.h == 598);
    CHECK(out.w == 598);
}

TEST_CASE("defend is deterministic") {
    const Tensor4 img = noisy_test_image(32, 3);
    DefenseConfig cfg;
    cfg.upscaler = Upscaler::Bicubic;
    const Tensor4 a = defend(img, cfg);
    const Tensor4 b = defend(img, cfg);
    CHECK(a.data == b.data);
}

TEST_CASE("network upscalers demand a weight file") {
    DefenseConfig cfg;
    cfg.upscaler = Upscaler::SesrM2;
    cfg.weight_path = "";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    DefenseConfig bad_quality;
    bad_quality.jpeg_quality = 0;
    CHECK_THROWS_AS(bad_quality.validate(), ConfigError);
    bad_quality.jpeg_quality = 101;
    CHECK_THROWS_AS(bad_quality.validate(), ConfigError);
}
