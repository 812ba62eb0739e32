#include "sesr/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace sesr {

static void require_same_shape(const Tensor4& a, const Tensor4& b, const char* op) {
    if (!a.same_shape(b))
        throw DimensionError(std::string(op) + ": shape mismatch (" + std::to_string(a.n) + "," +
                             std::to_string(a.c) + "," + std::to_string(a.h) + "," +
                             std::to_string(a.w) + ") vs (" + std::to_string(b.n) + "," +
                             std::to_string(b.c) + "," + std::to_string(b.h) + "," +
                             std::to_string(b.w) + ")");
}

Tensor4 add(const Tensor4& a, const Tensor4& b) {
    require_same_shape(a, b, "add");
    Tensor4 out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b.data[i];
    return out;
}

Tensor4 sub(const Tensor4& a, const Tensor4& b) {
    require_same_shape(a, b, "sub");
    Tensor4 out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b.data[i];
    return out;
}

Tensor4 scale(const Tensor4& a, float s) {
    Tensor4 out = a;
    for (auto& v : out.data) v *= s;
    return out;
}

Tensor4 tile_channels(const Tensor4& x, int times) {
    if (times < 1) throw DimensionError("tile_channels: times must be >= 1");
    Tensor4 out(x.n, x.c * times, x.h, x.w);
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    for (int in = 0; in < x.n; ++in)
        for (int t = 0; t < times; ++t)
            for (int ic = 0; ic < x.c; ++ic)
                std::copy_n(x.plane(in, ic), plane, out.plane(in, t * x.c + ic));
    return out;
}

Tensor4 sum_channel_tiles(const Tensor4& x, int times) {
    if (times < 1 || x.c % times != 0)
        throw DimensionError("sum_channel_tiles: channel axis (" + std::to_string(x.c) +
                             ") not divisible by tile count " + std::to_string(times));
    const int c_out = x.c / times;
    Tensor4 out(x.n, c_out, x.h, x.w);
    const std::size_t plane = static_cast<std::size_t>(x.h) * x.w;
    for (int in = 0; in < x.n; ++in)
        for (int t = 0; t < times; ++t)
            for (int ic = 0; ic < c_out; ++ic) {
                const float* src = x.plane(in, t * c_out + ic);
                float* dst = out.plane(in, ic);
                for (std::size_t i = 0; i < plane; ++i) dst[i] += src[i];
            }
    return out;
}

Tensor4 clamp01(const Tensor4& x) {
    Tensor4 out = x;
    for (auto& v : out.data) v = std::min(1.0f, std::max(0.0f, v));
    return out;
}

Tensor4 clamp_ball(const Tensor4& x, const Tensor4& ref, float eps) {
    require_same_shape(x, ref, "clamp_ball");
    Tensor4 out = x;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const float lo = ref.data[i] - eps;
        const float hi = ref.data[i] + eps;
        out.data[i] = std::min(hi, std::max(lo, out.data[i]));
    }
    return out;
}

float max_abs_diff(const Tensor4& a, const Tensor4& b) {
    require_same_shape(a, b, "max_abs_diff");
    float m = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

double dot(const Tensor4& a, const Tensor4& b) {
    require_same_shape(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += static_cast<double>(a.data[i]) * static_cast<double>(b.data[i]);
    return acc;
}

bool all_finite(const Tensor4& x) {
    for (float v : x.data)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor4 center_crop(const Tensor4& x, int out_h, int out_w) {
    if (out_h > x.h || out_w > x.w)
        throw DimensionError("center_crop: crop larger than source");
    const int y0 = (x.h - out_h) / 2;
    const int x0 = (x.w - out_w) / 2;
    Tensor4 out(x.n, x.c, out_h, out_w);
    for (int in = 0; in < x.n; ++in)
        for (int ic = 0; ic < x.c; ++ic)
            for (int y = 0; y < out_h; ++y)
                std::copy_n(x.plane(in, ic) + static_cast<std::size_t>(y0 + y) * x.w + x0, out_w,
                            out.plane(in, ic) + static_cast<std::size_t>(y) * out_w);
    return out;
}

}  // namespace sesr
