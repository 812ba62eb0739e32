#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sesr/layers.hpp"
#include "sesr/network.hpp"
#include "sesr/rng.hpp"

using namespace sesr;

namespace {

// Independent reference: direct nested-loop cross-correlation, written before
// the library kernels and kept free of them.
Tensor4 naive_conv(const Tensor4& x, const ConvSpec& spec, const std::vector<float>& w) {
    const int p = spec.pad_h();
    const int oh = (x.h + 2 * p - spec.kh) / spec.stride + 1;
    const int ow = (x.w + 2 * p - spec.kw) / spec.stride + 1;
    Tensor4 out(x.n, spec.c_out, oh, ow);
    for (int n = 0; n < x.n; ++n)
        for (int oc = 0; oc < spec.c_out; ++oc)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = 0.0;
                    for (int ic = 0; ic < spec.c_in; ++ic)
                        for (int ky = 0; ky < spec.kh; ++ky)
                            for (int kx = 0; kx < spec.kw; ++kx) {
                                const int iy = oy * spec.stride + ky - p;
                                const int ix = ox * spec.stride + kx - p;
                                if (iy < 0 || iy >= x.h || ix < 0 || ix >= x.w) continue;
                                acc += static_cast<double>(
                                           w[((static_cast<std::size_t>(oc) * spec.c_in + ic) *
                                                  spec.kh +
                                              ky) *
                                                 spec.kw +
                                             kx]) *
                                       x.at(n, ic, iy, ix);
                            }
                    out.at(n, oc, oy, ox) = static_cast<float>(acc);
                }
    return out;
}

std::vector<float> random_weights(std::size_t count, Rng& rng, float lim = 0.5f) {
    std::vector<float> w(count);
    for (auto& v : w) v = rng.uniform(-lim, lim);
    return w;
}

}  // namespace

TEST_CASE("conv2d trivial cases") {
    // 1x1 kernel scales every value
    Tensor4 ones(1, 1, 3, 3);
    for (auto& v : ones.data) v = 1.0f;
    ConvSpec scale1 = ConvSpec::explicit_pad(1, 1, 1, 1, 0);
    Tensor4 scaled = conv2d(ones, scale1, {2.0f});
    CHECK(scaled.h == 3);
    for (float v : scaled.data) CHECK(v == doctest::Approx(2.0f));

    // single pixel under a 3x3 all-ones kernel with same padding: only the
    // center tap lands on data
    Tensor4 single(1, 1, 1, 1);
    single.data[0] = 1.0f;
    ConvSpec same3 = ConvSpec::same(3, 1, 1);
    Tensor4 padded = conv2d(single, same3, std::vector<float>(9, 1.0f));
    CHECK(padded.h == 1);
    CHECK(padded.data[0] == doctest::Approx(1.0f));
}

TEST_CASE("conv2d matches the naive loop reference") {
    Rng rng(42);
    Tensor4 x = Tensor4::random_uniform(1, 3, 8, 8, rng);
    ConvSpec spec = ConvSpec::same(3, 3, 5);
    const auto w = random_weights(spec.weight_count(), rng);
    const Tensor4 got = conv2d(x, spec, w);
    const Tensor4 want = naive_conv(x, spec, w);
    CHECK(max_abs_diff(got, want) < 1e-6f);

    // strided, explicitly padded variant
    ConvSpec strided = ConvSpec::explicit_pad(3, 3, 4, 2, 1);
    const auto w2 = random_weights(strided.weight_count(), rng);
    CHECK(max_abs_diff(conv2d(x, strided, w2), naive_conv(x, strided, w2)) < 1e-6f);
}

TEST_CASE("conv2d rejects mismatched shapes with the axis named") {
    Tensor4 x(1, 2, 4, 4);
    ConvSpec spec = ConvSpec::same(3, 3, 5);
    CHECK_THROWS_WITH_AS(conv2d(x, spec, std::vector<float>(spec.weight_count(), 0.0f)),
                         doctest::Contains("channel axis"), DimensionError);
    CHECK_THROWS_AS(conv2d(Tensor4(1, 3, 4, 4), spec, std::vector<float>(3, 0.0f)),
                    DimensionError);
}

TEST_CASE("conv2d linearity") {
    Rng rng(7);
    ConvSpec spec = ConvSpec::same(3, 2, 3);
    const auto w = random_weights(spec.weight_count(), rng);
    Tensor4 x = Tensor4::random_uniform(1, 2, 6, 6, rng);
    Tensor4 y = Tensor4::random_uniform(1, 2, 6, 6, rng);
    const float a = 0.7f, b = -1.3f;
    Tensor4 lhs = conv2d(add(scale(x, a), scale(y, b)), spec, w);
    Tensor4 rhs = add(scale(conv2d(x, spec, w), a), scale(conv2d(y, spec, w), b));
    CHECK(max_abs_diff(lhs, rhs) < 1e-5f);
}

TEST_CASE("conv2d_transpose stamps the kernel") {
    Tensor4 x(1, 1, 1, 1);
    x.data[0] = 1.0f;
    ConvSpec spec = ConvSpec::explicit_pad(2, 1, 1, 2, 0);
    const std::vector<float> kernel = {1.0f, 2.0f, 3.0f, 4.0f};
    Tensor4 out = conv2d_transpose(x, spec, kernel);
    REQUIRE(out.h == 2);
    REQUIRE(out.w == 2);
    CHECK(out.at(0, 0, 0, 0) == doctest::Approx(1.0f));
    CHECK(out.at(0, 0, 0, 1) == doctest::Approx(2.0f));
    CHECK(out.at(0, 0, 1, 0) == doctest::Approx(3.0f));
    CHECK(out.at(0, 0, 1, 1) == doctest::Approx(4.0f));
}

TEST_CASE("conv2d / conv2d_transpose adjointness") {
    Rng rng(99);
    ConvSpec fwd = ConvSpec::same(3, 2, 4);
    const auto w = random_weights(fwd.weight_count(), rng);
    // channel-swapped weights for the transpose direction
    ConvSpec bwd = ConvSpec::same(3, 4, 2);
    std::vector<float> wt(w.size());
    for (int o = 0; o < 4; ++o)
        for (int i = 0; i < 2; ++i)
            for (int t = 0; t < 9; ++t)
                wt[(static_cast<std::size_t>(i) * 4 + o) * 9 + t] =
                    w[(static_cast<std::size_t>(o) * 2 + i) * 9 + t];

    Tensor4 x = Tensor4::random_uniform(1, 2, 7, 7, rng, -1.0f, 1.0f);
    Tensor4 y = Tensor4::random_uniform(1, 4, 7, 7, rng, -1.0f, 1.0f);
    const double lhs = dot(conv2d(x, fwd, w), y);
    const double rhs = dot(x, conv2d_transpose(y, bwd, wt));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
}

TEST_CASE("transposed conv output size arithmetic lands on 2x") {
    // 9x9 stride-2 head: 299 -> 598 needs padding 4 and output padding 1
    ConvSpec head = ConvSpec::explicit_pad(9, 56, 3, 2, 4);
    head.output_padding = 1;
    NetworkSpec net;
    net.layers.emplace_back(ConvTransposeLayer{head});
    const ShapeCHW out = infer_output_shape(net, {56, 299, 299});
    CHECK(out.c == 3);
    CHECK(out.h == 598);
    CHECK(out.w == 598);

    // negative computed size is a configuration error
    Tensor4 tiny(1, 1, 1, 1);
    ConvSpec bad = ConvSpec::explicit_pad(2, 1, 1, 1, 3);
    CHECK_THROWS_AS(conv2d_transpose(tiny, bad, std::vector<float>(4, 0.0f)), ConfigError);
}

TEST_CASE("depth_to_space definition and inverse") {
    Tensor4 x(1, 4, 1, 1);
    x.data = {1.0f, 2.0f, 3.0f, 4.0f};
    Tensor4 out = depth_to_space(x, 2);
    REQUIRE(out.c == 1);
    REQUIRE(out.h == 2);
    CHECK(out.at(0, 0, 0, 0) == 1.0f);
    CHECK(out.at(0, 0, 0, 1) == 2.0f);
    CHECK(out.at(0, 0, 1, 0) == 3.0f);
    CHECK(out.at(0, 0, 1, 1) == 4.0f);

    // block 1 is the identity
    Rng rng(5);
    Tensor4 r = Tensor4::random_uniform(2, 3, 4, 4, rng);
    CHECK(max_abs_diff(depth_to_space(r, 1), r) == 0.0f);

    // exact round trip with the inverse
    Tensor4 big = Tensor4::random_uniform(2, 8, 3, 5, rng);
    CHECK(max_abs_diff(space_to_depth(depth_to_space(big, 2), 2), big) == 0.0f);

    Tensor4 bad(1, 3, 2, 2);
    CHECK_THROWS_AS(depth_to_space(bad, 2), DimensionError);
}

TEST_CASE("relu and prelu") {
    Tensor4 x(1, 1, 1, 3);
    x.data = {-1.0f, 0.0f, 2.0f};
    Tensor4 r = relu_forward(x);
    CHECK(r.data[0] == 0.0f);
    CHECK(r.data[1] == 0.0f);
    CHECK(r.data[2] == 2.0f);

    Tensor4 neg(1, 1, 1, 1);
    neg.data = {-4.0f};
    CHECK(prelu_forward(neg, 0.25f).data[0] == doctest::Approx(-1.0f));

    Rng rng(3);
    Tensor4 any = Tensor4::random_uniform(1, 2, 5, 5, rng, -2.0f, 2.0f);
    CHECK(max_abs_diff(prelu_forward(any, 1.0f), any) == 0.0f);
}

TEST_CASE("determinism: same seed, same bits") {
    Rng a(123), b(123);
    Tensor4 xa = Tensor4::random_uniform(1, 3, 6, 6, a);
    Tensor4 xb = Tensor4::random_uniform(1, 3, 6, 6, b);
    CHECK(xa.data == xb.data);

    ConvSpec spec = ConvSpec::same(3, 3, 4);
    const auto w = random_weights(spec.weight_count(), a);
    Tensor4 yo = conv2d(xa, spec, w);
    Tensor4 yt = conv2d(xa, spec, w);
    CHECK(yo.data == yt.data);
}

TEST_CASE("tile_channels and its adjoint") {
    Rng rng(17);
    Tensor4 x = Tensor4::random_uniform(1, 3, 2, 2, rng);
    Tensor4 tiled = tile_channels(x, 4);
    REQUIRE(tiled.c == 12);
    for (int t = 0; t < 4; ++t)
        for (int c = 0; c < 3; ++c)
            CHECK(tiled.at(0, t * 3 + c, 1, 1) == x.at(0, c, 1, 1));
    Tensor4 summed = sum_channel_tiles(tiled, 4);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(summed.data[i] == doctest::Approx(4.0f * x.data[i]));
}
