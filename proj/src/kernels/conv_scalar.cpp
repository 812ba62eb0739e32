#include "sesr/kernels.hpp"

#include <cstddef>

namespace sesr::kernels::detail {

// Reference kernels. Term order is the contract the vector kernels follow:
// forward and grad-input reduce over (ic|oc, ky, kx) sequentially per output
// element, with 64-bit accumulators.

void conv2d_forward_scalar(const float* x, int c_in, int h, int w,
                           const float* weights, int c_out, int kh, int kw,
                           int stride, int pad, float* out, int oh, int ow) {
    const std::size_t in_plane = static_cast<std::size_t>(h) * w;
    const std::size_t k_plane = static_cast<std::size_t>(kh) * kw;
    for (int oc = 0; oc < c_out; ++oc) {
        const float* w_oc = weights + static_cast<std::size_t>(oc) * c_in * k_plane;
        float* out_row = out + static_cast<std::size_t>(oc) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = 0.0;
                for (int ic = 0; ic < c_in; ++ic) {
                    const float* x_ic = x + ic * in_plane;
                    const float* w_ic = w_oc + ic * k_plane;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        const float* x_row = x_ic + static_cast<std::size_t>(iy) * w;
                        const float* w_row = w_ic + static_cast<std::size_t>(ky) * kw;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= w) continue;
                            acc += static_cast<double>(w_row[kx]) * static_cast<double>(x_row[ix]);
                        }
                    }
                }
                out_row[static_cast<std::size_t>(oy) * ow + ox] = static_cast<float>(acc);
            }
        }
    }
}

void conv2d_grad_input_scalar(const float* grad_out, int c_out, int oh, int ow,
                              const float* weights, int c_in, int kh, int kw,
                              int stride, int pad, float* grad_x, int h, int w) {
    const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
    const std::size_t k_plane = static_cast<std::size_t>(kh) * kw;
    const std::size_t w_per_oc = static_cast<std::size_t>(c_in) * k_plane;
    for (int ic = 0; ic < c_in; ++ic) {
        float* gx_ic = grad_x + static_cast<std::size_t>(ic) * h * w;
        for (int iy = 0; iy < h; ++iy) {
            for (int ix = 0; ix < w; ++ix) {
                double acc = 0.0;
                for (int oc = 0; oc < c_out; ++oc) {
                    const float* go_oc = grad_out + oc * out_plane;
                    const float* w_base = weights + oc * w_per_oc + ic * k_plane;
                    for (int ky = 0; ky < kh; ++ky) {
                        const int ty = iy + pad - ky;
                        if (ty < 0 || ty % stride != 0) continue;
                        const int oy = ty / stride;
                        if (oy >= oh) continue;
                        const float* go_row = go_oc + static_cast<std::size_t>(oy) * ow;
                        const float* w_row = w_base + static_cast<std::size_t>(ky) * kw;
                        for (int kx = 0; kx < kw; ++kx) {
                            const int tx = ix + pad - kx;
                            if (tx < 0 || tx % stride != 0) continue;
                            const int ox = tx / stride;
                            if (ox >= ow) continue;
                            acc += static_cast<double>(w_row[kx]) * static_cast<double>(go_row[ox]);
                        }
                    }
                }
                gx_ic[static_cast<std::size_t>(iy) * w + ix] = static_cast<float>(acc);
            }
        }
    }
}

void conv2d_grad_weight_scalar(const float* x, int c_in, int h, int w,
                               const float* grad_out, int c_out, int oh, int ow,
                               int kh, int kw, int stride, int pad, float* grad_w) {
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
                    double acc = 0.0;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        const float* x_row = x_ic + static_cast<std::size_t>(iy) * w;
                        const float* go_row = go_oc + static_cast<std::size_t>(oy) * ow;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= w) continue;
                            acc += static_cast<double>(go_row[ox]) * static_cast<double>(x_row[ix]);
                        }
                    }
                    gw[static_cast<std::size_t>(ky) * kw + kx] += static_cast<float>(acc);
                }
            }
        }
    }
}

}  // namespace sesr::kernels::detail
