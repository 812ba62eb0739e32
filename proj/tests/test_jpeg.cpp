#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sesr/jpeg.hpp"
#include "sesr/training.hpp"

using namespace sesr;

TEST_CASE("quality 50 leaves the base tables untouched") {
    const auto luma = jpeg_quant_table(50, false);
    CHECK(luma[0] == 16);
    CHECK(luma[1] == 11);
    CHECK(luma[63] == 99);
    const auto chroma = jpeg_quant_table(50, true);
    CHECK(chroma[0] == 17);
    CHECK(chroma[63] == 99);
}

TEST_CASE("quality 100 clamps every entry to 1") {
    for (bool chroma : {false, true})
        for (int entry : jpeg_quant_table(100, chroma)) CHECK(entry == 1);
}

TEST_CASE("quality scaling formula spot checks") {
    // q=10 -> scale 500: 16*500/100 = 80
    CHECK(jpeg_quant_table(10, false)[0] == 80);
    // q=90 -> scale 20: round(16*20/100) = round(3.2) = 3
    CHECK(jpeg_quant_table(90, false)[0] == 3);
    // clamp at 255 for tiny qualities
    CHECK(jpeg_quant_table(1, false)[63] == 255);
    CHECK_THROWS_AS(jpeg_quant_table(0, false), ConfigError);
    CHECK_THROWS_AS(jpeg_quant_table(101, false), ConfigError);
}

TEST_CASE("dct of a constant block is a lone DC coefficient") {
    double block[64], coeffs[64];
    for (auto& v : block) v = 37.0;
    dct8x8_forward(block, coeffs);
    CHECK(coeffs[0] == doctest::Approx(8.0 * 37.0));  // DC = 8 * value for orthonormal scaling
    for (int i = 1; i < 64; ++i) CHECK(std::fabs(coeffs[i]) < 1e-9);

    double back[64];
    dct8x8_inverse(coeffs, back);
    for (int i = 0; i < 64; ++i) CHECK(back[i] == doctest::Approx(37.0).epsilon(1e-12));
}

TEST_CASE("dct round trip and energy preservation on random blocks") {
    Rng rng(4);
    double block[64], coeffs[64], back[64];
    for (auto& v : block) v = 255.0 * rng.next_double() - 128.0;
    dct8x8_forward(block, coeffs);
    dct8x8_inverse(coeffs, back);
    double in_energy = 0.0, out_energy = 0.0;
    for (int i = 0; i < 64; ++i) {
        CHECK(back[i] == doctest::Approx(block[i]).epsilon(1e-10));
        in_energy += block[i] * block[i];
        out_energy += coeffs[i] * coeffs[i];
    }
    CHECK(in_energy == doctest::Approx(out_energy).epsilon(1e-10));
}

TEST_CASE("quality 100 round trip loses only coefficient rounding") {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        Tensor4 img = Tensor4::random_uniform(1, 3, 64, 64, rng);
        const Tensor4 rt = jpeg_round_trip(img, 100);
        CHECK(psnr(rt, img) > 45.0);
    }
}

TEST_CASE("constant-color image reconstructs almost exactly") {
    // Per-pixel error for a constant block is bounded by the DC quantizer
    // entry / 16 per plane; entries stay small enough from quality 50 up.
    for (int quality : {50, 60, 75, 90, 95, 100}) {
        Tensor4 img(1, 3, 24, 24);
        for (int c = 0; c < 3; ++c) {
            const float value = 0.2f + 0.25f * c;
            float* p = img.plane(0, c);
            for (int i = 0; i < 24 * 24; ++i) p[i] = value;
        }
        const Tensor4 rt = jpeg_round_trip(img, quality);
        CHECK(max_abs_diff(rt, img) < 2.0f / 255.0f);
    }
}

TEST_CASE("non-multiple-of-8 extents survive via edge padding") {
    Rng rng(12);
    Tensor4 img = Tensor4::random_uniform(1, 3, 19, 13, rng);
    const Tensor4 rt = jpeg_round_trip(img, 75);
    CHECK(rt.h == 19);
    CHECK(rt.w == 13);
    for (float v : rt.data) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("round trip is deterministic") {
    Rng rng(5);
    Tensor4 img = Tensor4::random_uniform(1, 3, 16, 16, rng);
    const Tensor4 a = jpeg_round_trip(img, 75);
    const Tensor4 b = jpeg_round_trip(img, 75);
    CHECK(a.data == b.data);
}
