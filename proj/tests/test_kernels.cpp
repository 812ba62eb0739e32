#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sesr/kernels.hpp"
#include "sesr/rng.hpp"

using namespace sesr;
namespace k = sesr::kernels;

namespace {

struct Shape {
    int c_in, h, w, c_out, kh, kw, stride, pad;
};

std::vector<float> randu(std::size_t n, Rng& rng, float lim = 1.0f) {
    std::vector<float> v(n);
    for (auto& x : v) x = rng.uniform(-lim, lim);
    return v;
}

}  // namespace

// The AVX2 forward and grad-input kernels follow the scalar reduction order
// exactly, so their float32 results must be bit-identical. grad-weight uses
// partial sums and is held to a tight tolerance instead.
#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 kernels match the scalar reference") {
    if (!k::avx2_supported()) {
        MESSAGE("avx2 not available on this CPU; dispatch test only");
        CHECK(k::active_backend() == k::Backend::Scalar);
        return;
    }

    const Shape shapes[] = {
        {3, 8, 8, 5, 3, 3, 1, 1},    {1, 5, 5, 1, 1, 1, 1, 0},  {4, 16, 16, 8, 5, 5, 1, 2},
        {2, 9, 33, 3, 3, 3, 1, 1},   {3, 32, 32, 16, 5, 5, 1, 2},
        {6, 7, 18, 2, 3, 3, 2, 1},  // strided: vector path falls back to scalar
    };
    Rng rng(2024);
    for (const auto& s : shapes) {
        CAPTURE(s.h);
        CAPTURE(s.w);
        CAPTURE(s.stride);
        const int oh = (s.h + 2 * s.pad - s.kh) / s.stride + 1;
        const int ow = (s.w + 2 * s.pad - s.kw) / s.stride + 1;
        const auto x = randu(static_cast<std::size_t>(s.c_in) * s.h * s.w, rng);
        const auto w = randu(static_cast<std::size_t>(s.c_out) * s.c_in * s.kh * s.kw, rng);
        const auto go = randu(static_cast<std::size_t>(s.c_out) * oh * ow, rng);

        std::vector<float> out_scalar(static_cast<std::size_t>(s.c_out) * oh * ow);
        std::vector<float> out_avx(out_scalar.size());
        k::detail::conv2d_forward_scalar(x.data(), s.c_in, s.h, s.w, w.data(), s.c_out, s.kh,
                                         s.kw, s.stride, s.pad, out_scalar.data(), oh, ow);
        k::detail::conv2d_forward_avx2(x.data(), s.c_in, s.h, s.w, w.data(), s.c_out, s.kh, s.kw,
                                       s.stride, s.pad, out_avx.data(), oh, ow);
        CHECK(out_scalar == out_avx);  // bit-identical

        std::vector<float> gx_scalar(x.size()), gx_avx(x.size());
        k::detail::conv2d_grad_input_scalar(go.data(), s.c_out, oh, ow, w.data(), s.c_in, s.kh,
                                            s.kw, s.stride, s.pad, gx_scalar.data(), s.h, s.w);
        k::detail::conv2d_grad_input_avx2(go.data(), s.c_out, oh, ow, w.data(), s.c_in, s.kh,
                                          s.kw, s.stride, s.pad, gx_avx.data(), s.h, s.w);
        CHECK(gx_scalar == gx_avx);  // bit-identical

        std::vector<float> gw_scalar(w.size(), 0.0f), gw_avx(w.size(), 0.0f);
        k::detail::conv2d_grad_weight_scalar(x.data(), s.c_in, s.h, s.w, go.data(), s.c_out, oh,
                                             ow, s.kh, s.kw, s.stride, s.pad, gw_scalar.data());
        k::detail::conv2d_grad_weight_avx2(x.data(), s.c_in, s.h, s.w, go.data(), s.c_out, oh, ow,
                                           s.kh, s.kw, s.stride, s.pad, gw_avx.data());
        float max_rel = 0.0f;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const float denom = std::max(1.0f, std::fabs(gw_scalar[i]));
            max_rel = std::max(max_rel, std::fabs(gw_scalar[i] - gw_avx[i]) / denom);
        }
        CHECK(max_rel < 1e-6f);
    }
}
#endif  // x86_64

TEST_CASE("backend selection is explicit and reversible") {
    const k::Backend original = k::active_backend();
    k::set_backend(k::Backend::Scalar);
    CHECK(k::active_backend() == k::Backend::Scalar);
    CHECK(k::backend_name(k::Backend::Scalar) == "scalar");
    if (k::avx2_supported()) {
        k::set_backend(k::Backend::Avx2);
        CHECK(k::active_backend() == k::Backend::Avx2);
    } else {
        CHECK_THROWS(k::set_backend(k::Backend::Avx2));
    }
    k::set_backend(original);
}

TEST_CASE("kernels are usable whatever the backend") {
    // scalar path sanity on every platform: 1x1 identity kernel
    const float x[4] = {1.0f, 2.0f, 3.0f, 4.0f};
    const float w1[1] = {1.0f};
    float out[4] = {};
    k::conv2d_forward(x, 1, 2, 2, w1, 1, 1, 1, 1, 0, out, 2, 2);
    for (int i = 0; i < 4; ++i) CHECK(out[i] == x[i]);
}

TEST_CASE("dispatched conv is identical under either backend") {
    if (!k::avx2_supported()) return;
    Rng rng(31);
    const int c_in = 3, h = 21, w = 19, c_out = 6, kk = 3, pad = 1;
    const auto x = randu(static_cast<std::size_t>(c_in) * h * w, rng);
    const auto wts = randu(static_cast<std::size_t>(c_out) * c_in * kk * kk, rng);
    std::vector<float> a(static_cast<std::size_t>(c_out) * h * w), b(a.size());

    const k::Backend original = k::active_backend();
    k::set_backend(k::Backend::Scalar);
    k::conv2d_forward(x.data(), c_in, h, w, wts.data(), c_out, kk, kk, 1, pad, a.data(), h, w);
    k::set_backend(k::Backend::Avx2);
    k::conv2d_forward(x.data(), c_in, h, w, wts.data(), c_out, kk, kk, 1, pad, b.data(), h, w);
    k::set_backend(original);
    CHECK(a == b);
}
