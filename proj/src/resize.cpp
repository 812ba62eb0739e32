#include "sesr/resize.hpp"

#include <cmath>
#include <vector>

namespace sesr {

Tensor4 nearest_upscale(const Tensor4& image, int scale) {
    if (scale < 1) throw ConfigError("nearest_upscale: scale must be >= 1");
    Tensor4 out(image.n, image.c, image.h * scale, image.w * scale);
    for (int n = 0; n < image.n; ++n)
        for (int c = 0; c < image.c; ++c)
            for (int y = 0; y < out.h; ++y)
                for (int x = 0; x < out.w; ++x)
                    out.at(n, c, y, x) = image.at(n, c, y / scale, x / scale);
    return out;
}

namespace {

// Cubic convolution kernel with a = -0.5.
double cubic_weight(double t) {
    constexpr double a = -0.5;
    t = std::fabs(t);
    if (t <= 1.0) return (a + 2.0) * t * t * t - (a + 3.0) * t * t + 1.0;
    if (t < 2.0) return a * t * t * t - 5.0 * a * t * t + 8.0 * a * t - 4.0 * a;
    return 0.0;
}

int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

// Resamples one axis; maps output index d to source position
// (d + 0.5) * (src_n / dst_n) - 0.5.
void resample_rows(const std::vector<double>& src, int src_h, int w, int dst_h,
                   std::vector<double>& dst) {
    const double ratio = static_cast<double>(src_h) / dst_h;
    dst.assign(static_cast<std::size_t>(dst_h) * w, 0.0);
    for (int y = 0; y < dst_h; ++y) {
        const double pos = (y + 0.5) * ratio - 0.5;
        const int base = static_cast<int>(std::floor(pos));
        double weights[4];
        int idx[4];
        for (int k = 0; k < 4; ++k) {
            const int tap = base - 1 + k;
            weights[k] = cubic_weight(pos - tap);
            idx[k] = clamp_index(tap, src_h);
        }
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k)
                acc += weights[k] * src[static_cast<std::size_t>(idx[k]) * w + x];
            dst[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
}

void resample_cols(const std::vector<double>& src, int h, int src_w, int dst_w,
                   std::vector<double>& dst) {
    const double ratio = static_cast<double>(src_w) / dst_w;
    dst.assign(static_cast<std::size_t>(h) * dst_w, 0.0);
    for (int x = 0; x < dst_w; ++x) {
        const double pos = (x + 0.5) * ratio - 0.5;
        const int base = static_cast<int>(std::floor(pos));
        double weights[4];
        int idx[4];
        for (int k = 0; k < 4; ++k) {
            const int tap = base - 1 + k;
            weights[k] = cubic_weight(pos - tap);
            idx[k] = clamp_index(tap, src_w);
        }
        for (int y = 0; y < h; ++y) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k)
                acc += weights[k] * src[static_cast<std::size_t>(y) * src_w + idx[k]];
            dst[static_cast<std::size_t>(y) * dst_w + x] = acc;
        }
    }
}

Tensor4 bicubic_resize(const Tensor4& image, int dst_h, int dst_w) {
    Tensor4 out(image.n, image.c, dst_h, dst_w);
    std::vector<double> plane(static_cast<std::size_t>(image.h) * image.w);
    std::vector<double> rows, full;
    for (int n = 0; n < image.n; ++n)
        for (int c = 0; c < image.c; ++c) {
            const float* src = image.plane(n, c);
            for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = src[i];
            resample_rows(plane, image.h, image.w, dst_h, rows);
            resample_cols(rows, dst_h, image.w, dst_w, full);
            float* dst = out.plane(n, c);
            for (std::size_t i = 0; i < full.size(); ++i)
                dst[i] = static_cast<float>(std::min(1.0, std::max(0.0, full[i])));
        }
    return out;
}

}  // namespace

Tensor4 bicubic_upscale(const Tensor4& image, int scale) {
    if (scale < 1) throw ConfigError("bicubic_upscale: scale must be >= 1");
    return bicubic_resize(image, image.h * scale, image.w * scale);
}

Tensor4 bicubic_downscale(const Tensor4& image, int scale) {
    if (scale < 1) throw ConfigError("bicubic_downscale: scale must be >= 1");
    if (image.h % scale != 0 || image.w % scale != 0)
        throw DimensionError("bicubic_downscale: extents not divisible by scale");
    return bicubic_resize(image, image.h / scale, image.w / scale);
}

}  // namespace sesr
