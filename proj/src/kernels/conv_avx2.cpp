#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>

#include "sesr/kernels.hpp"

namespace sesr::kernels::detail {

namespace {

// 16 output columns per tile: four 4-wide double accumulators.
constexpr int kTile = 16;

// Loads x[base + lane] for lane in [0,16) as doubles, zero-filling lanes
// outside [0, limit). Zero terms are exact no-ops in the accumulation, so
// border tiles stay bit-identical to the scalar reference.
inline void load_row16(const float* row, int base, int limit, __m256d v[4]) {
    if (base >= 0 && base + kTile <= limit) {
        v[0] = _mm256_cvtps_pd(_mm_loadu_ps(row + base));
        v[1] = _mm256_cvtps_pd(_mm_loadu_ps(row + base + 4));
        v[2] = _mm256_cvtps_pd(_mm_loadu_ps(row + base + 8));
        v[3] = _mm256_cvtps_pd(_mm_loadu_ps(row + base + 12));
        return;
    }
    alignas(32) float tmp[kTile];
    for (int i = 0; i < kTile; ++i) {
        const int ix = base + i;
        tmp[i] = (ix >= 0 && ix < limit) ? row[ix] : 0.0f;
    }
    v[0] = _mm256_cvtps_pd(_mm_load_ps(tmp));
    v[1] = _mm256_cvtps_pd(_mm_load_ps(tmp + 4));
    v[2] = _mm256_cvtps_pd(_mm_load_ps(tmp + 8));
    v[3] = _mm256_cvtps_pd(_mm_load_ps(tmp + 12));
}

inline void store_row16(float* dst, const __m256d v[4]) {
    _mm_storeu_ps(dst, _mm256_cvtpd_ps(v[0]));
    _mm_storeu_ps(dst + 4, _mm256_cvtpd_ps(v[1]));
    _mm_storeu_ps(dst + 8, _mm256_cvtpd_ps(v[2]));
    _mm_storeu_ps(dst + 12, _mm256_cvtpd_ps(v[3]));
}

}  // namespace

void conv2d_forward_avx2(const float* x, int c_in, int h, int w,
                         const float* weights, int c_out, int kh, int kw,
                         int stride, int pad, float* out, int oh, int ow) {
    if (stride != 1) {  // strided loads are not contiguous; keep the reference path
        conv2d_forward_scalar(x, c_in, h, w, weights, c_out, kh, kw, stride, pad, out, oh, ow);
        return;
    }
    const std::size_t in_plane = static_cast<std::size_t>(h) * w;
    const std::size_t k_plane = static_cast<std::size_t>(kh) * kw;
    const int full = ow - ow % kTile;
    for (int oc = 0; oc < c_out; ++oc) {
        const float* w_oc = weights + static_cast<std::size_t>(oc) * c_in * k_plane;
        float* out_plane_ptr = out + static_cast<std::size_t>(oc) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
            float* out_row = out_plane_ptr + static_cast<std::size_t>(oy) * ow;
            for (int ox0 = 0; ox0 < full; ox0 += kTile) {
                __m256d acc[4] = {_mm256_setzero_pd(), _mm256_setzero_pd(),
                                  _mm256_setzero_pd(), _mm256_setzero_pd()};
                for (int ic = 0; ic < c_in; ++ic) {
                    const float* x_ic = x + ic * in_plane;
                    const float* w_ic = w_oc + ic * k_plane;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = oy + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        const float* x_row = x_ic + static_cast<std::size_t>(iy) * w;
                        const float* w_row = w_ic + static_cast<std::size_t>(ky) * kw;
                        for (int kx = 0; kx < kw; ++kx) {
                            const __m256d wv = _mm256_set1_pd(static_cast<double>(w_row[kx]));
                            __m256d xv[4];
                            load_row16(x_row, ox0 + kx - pad, w, xv);
                            acc[0] = _mm256_fmadd_pd(wv, xv[0], acc[0]);
                            acc[1] = _mm256_fmadd_pd(wv, xv[1], acc[1]);
                            acc[2] = _mm256_fmadd_pd(wv, xv[2], acc[2]);
                            acc[3] = _mm256_fmadd_pd(wv, xv[3], acc[3]);
                        }
                    }
                }
                store_row16(out_row + ox0, acc);
            }
            // tail columns, reference order
            for (int ox = full; ox < ow; ++ox) {
                double acc = 0.0;
                for (int ic = 0; ic < c_in; ++ic) {
                    const float* x_ic = x + ic * in_plane;
                    const float* w_ic = w_oc + ic * k_plane;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = oy + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        const float* x_row = x_ic + static_cast<std::size_t>(iy) * w;
                        const float* w_row = w_ic + static_cast<std::size_t>(ky) * kw;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ox + kx - pad;
                            if (ix < 0 || ix >= w) continue;
                            acc += static_cast<double>(w_row[kx]) * static_cast<double>(x_row[ix]);
                        }
                    }
                }
                out_row[ox] = static_cast<float>(acc);
            }
        }
    }
}

void conv2d_grad_input_avx2(const float* grad_out, int c_out, int oh, int ow,
                            const float* weights, int c_in, int kh, int kw,
                            int stride, int pad, float* grad_x, int h, int w) {
    if (stride != 1) {
        conv2d_grad_input_scalar(grad_out, c_out, oh, ow, weights, c_in, kh, kw, stride, pad,
                                 grad_x, h, w);
        return;
    }
    const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
    const std::size_t k_plane = static_cast<std::size_t>(kh) * kw;
    const std::size_t w_per_oc = static_cast<std::size_t>(c_in) * k_plane;
    const int full = w - w % kTile;
    for (int ic = 0; ic < c_in; ++ic) {
        float* gx_ic = grad_x + static_cast<std::size_t>(ic) * h * w;
        for (int iy = 0; iy < h; ++iy) {
            float* gx_row = gx_ic + static_cast<std::size_t>(iy) * w;
            for (int ix0 = 0; ix0 < full; ix0 += kTile) {
                __m256d acc[4] = {_mm256_setzero_pd(), _mm256_setzero_pd(),
                                  _mm256_setzero_pd(), _mm256_setzero_pd()};
                for (int oc = 0; oc < c_out; ++oc) {
                    const float* go_oc = grad_out + oc * out_plane;
                    const float* w_base = weights + oc * w_per_oc + ic * k_plane;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int oy = iy + pad - ky;
                        if (oy < 0 || oy >= oh) continue;
                        const float* go_row = go_oc + static_cast<std::size_t>(oy) * ow;
                        const float* w_row = w_base + static_cast<std::size_t>(ky) * kw;
                        for (int kx = 0; kx < kw; ++kx) {
                            const __m256d wv = _mm256_set1_pd(static_cast<double>(w_row[kx]));
                            __m256d gv[4];
                            load_row16(go_row, ix0 + pad - kx, ow, gv);
                            acc[0] = _mm256_fmadd_pd(wv, gv[0], acc[0]);
                            acc[1] = _mm256_fmadd_pd(wv, gv[1], acc[1]);
                            acc[2] = _mm256_fmadd_pd(wv, gv[2], acc[2]);
                            acc[3] = _mm256_fmadd_pd(wv, gv[3], acc[3]);
                        }
                    }
                }
                store_row16(gx_row + ix0, acc);
            }
            for (int ix = full; ix < w; ++ix) {
                double acc = 0.0;
                for (int oc = 0; oc < c_out; ++oc) {
                    const float* go_oc = grad_out + oc * out_plane;
                    const float* w_base = weights + oc * w_per_oc + ic * k_plane;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int oy = iy + pad - ky;
                        if (oy < 0 || oy >= oh) continue;
                        const float* go_row = go_oc + static_cast<std::size_t>(oy) * ow;
                        const float* w_row = w_base + static_cast<std::size_t>(ky) * kw;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ox = ix + pad - kx;
                            if (ox < 0 || ox >= ow) continue;
                            acc += static_cast<double>(w_row[kx]) * static_cast<double>(go_row[ox]);
                        }
                    }
                }
                gx_row[ix] = static_cast<float>(acc);
            }
        }
    }
}

void conv2d_grad_weight_avx2(const float* x, int c_in, int h, int w,
                             const float* grad_out, int c_out, int oh, int ow,
                             int kh, int kw, int stride, int pad, float* grad_w) {
    if (stride != 1) {
        conv2d_grad_weight_scalar(x, c_in, h, w, grad_out, c_out, oh, ow, kh, kw, stride, pad,
                                  grad_w);
        return;
    }
    const std::size_t in_plane = static_cast<std::size_t>(h) * w;
    const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
    const std::size_t k_plane = static_cast<std::size_t>(kh) * kw;
    for (int oc = 0; oc < c_out; ++oc) {
        const float* go_oc = grad_out + oc * out_plane;
        for (int ic = 0; ic < c_in; ++ic) {
            const float* x_ic = x + ic * in_plane;
            float* gw = grad_w + (static_cast<std::size_t>(oc) * c_in + ic) * k_plane;
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx) {
                    // valid output columns: 0 <= ox < ow and 0 <= ox+kx-pad < w
                    const int lo = (pad - kx > 0) ? pad - kx : 0;
                    const int hi_bound = w - kx + pad;
                    const int hi = (hi_bound < ow) ? hi_bound : ow;
                    __m256d vacc = _mm256_setzero_pd();
                    double acc = 0.0;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        const float* x_row = x_ic + static_cast<std::size_t>(iy) * w + (kx - pad);
                        const float* go_row = go_oc + static_cast<std::size_t>(oy) * ow;
                        int ox = lo;
                        for (; ox + 4 <= hi; ox += 4) {
                            const __m256d gv = _mm256_cvtps_pd(_mm_loadu_ps(go_row + ox));
                            const __m256d xv = _mm256_cvtps_pd(_mm_loadu_ps(x_row + ox));
                            vacc = _mm256_fmadd_pd(gv, xv, vacc);
                        }
                        for (; ox < hi; ++ox)
                            acc += static_cast<double>(go_row[ox]) * static_cast<double>(x_row[ox]);
                    }
                    alignas(32) double lanes[4];
                    _mm256_store_pd(lanes, vacc);
                    acc += lanes[0] + lanes[1] + lanes[2] + lanes[3];
                    gw[static_cast<std::size_t>(ky) * kw + kx] += static_cast<float>(acc);
                }
            }
        }
    }
}

}  // namespace sesr::kernels::detail

#endif  // x86_64
