#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sesr/errors.hpp"
#include "sesr/rng.hpp"

namespace sesr {

// Dense 4-D float tensor in (batch, channel, height, width) order, row-major.
// The universal value type for images, feature maps and gradients.
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<float> data;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0f) {
        if (n_ < 0 || c_ < 0 || h_ < 0 || w_ < 0)
            throw DimensionError("Tensor4: negative extent");
    }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor4& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    float& at(int in, int ic, int iy, int ix) {
        return data[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
    }
    float at(int in, int ic, int iy, int ix) const {
        return data[((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix];
    }

    // Pointer to the start of one (sample, channel) plane.
    float* plane(int in, int ic) {
        return data.data() + (static_cast<std::size_t>(in) * c + ic) * h * w;
    }
    const float* plane(int in, int ic) const {
        return data.data() + (static_cast<std::size_t>(in) * c + ic) * h * w;
    }

    static Tensor4 random_uniform(int n, int c, int h, int w, Rng& rng,
                                  float lo = 0.0f, float hi = 1.0f) {
        Tensor4 t(n, c, h, w);
        for (auto& v : t.data) v = rng.uniform(lo, hi);
        return t;
    }
};

Tensor4 add(const Tensor4& a, const Tensor4& b);
Tensor4 sub(const Tensor4& a, const Tensor4& b);
Tensor4 scale(const Tensor4& a, float s);

// Repeats the channel dimension `times` times: (n,c,h,w) -> (n,c*times,h,w),
// channel blocks in source order. Used by the global residual of 2x nets.
Tensor4 tile_channels(const Tensor4& x, int times);
// Adjoint of tile_channels: sums the `times` channel blocks back to c channels.
Tensor4 sum_channel_tiles(const Tensor4& x, int times);

Tensor4 clamp01(const Tensor4& x);
// Clamps each element of x into [ref-eps, ref+eps]; shapes must match.
Tensor4 clamp_ball(const Tensor4& x, const Tensor4& ref, float eps);

float max_abs_diff(const Tensor4& a, const Tensor4& b);
double dot(const Tensor4& a, const Tensor4& b);  // 64-bit accumulation
bool all_finite(const Tensor4& x);

Tensor4 center_crop(const Tensor4& x, int out_h, int out_w);

}  // namespace sesr
