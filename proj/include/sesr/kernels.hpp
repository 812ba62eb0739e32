#pragma once

#include <string>

namespace sesr::kernels {

// The convolution inner loops below exist in a scalar reference form and an
// AVX2 form, selected once at startup from CPUID. Both accumulate in 64-bit
// floats and store 32-bit results. The AVX2 forward and grad-input kernels
// reduce in the same (ic, ky, kx) term order as the scalar reference, and a
// float*float product is exact in double, so those two are bit-identical to
// the reference. The grad-weight kernel uses four partial sums over the
// output row and is equivalence-tested to tolerance instead.
enum class Backend { Scalar, Avx2 };

Backend active_backend();
void set_backend(Backend b);  // throws ConfigError if unsupported on this CPU
bool avx2_supported();
std::string backend_name(Backend b);

// out[oc,oy,ox] = sum_{ic,ky,kx} w[oc,ic,ky,kx] * x[ic, oy*stride+ky-pad, ox*stride+kx-pad]
// Single sample; zero padding; out must be pre-sized to (c_out, oh, ow).
void conv2d_forward(const float* x, int c_in, int h, int w,
                    const float* weights, int c_out, int kh, int kw,
                    int stride, int pad,
                    float* out, int oh, int ow);

// gx[ic,iy,ix] = sum_{oc,ky,kx} w[oc,ic,ky,kx] * go[oc,oy,ox]
// where oy = (iy + pad - ky)/stride, ox = (ix + pad - kx)/stride when integral
// and in range. gx is overwritten.
void conv2d_grad_input(const float* grad_out, int c_out, int oh, int ow,
                       const float* weights, int c_in, int kh, int kw,
                       int stride, int pad,
                       float* grad_x, int h, int w);

// gw[oc,ic,ky,kx] += sum_{oy,ox} go[oc,oy,ox] * x[ic, oy*stride+ky-pad, ox*stride+kx-pad]
// Accumulates into grad_w (callers zero it once per batch).
void conv2d_grad_weight(const float* x, int c_in, int h, int w,
                        const float* grad_out, int c_out, int oh, int ow,
                        int kh, int kw, int stride, int pad,
                        float* grad_w);

namespace detail {
void conv2d_forward_scalar(const float* x, int c_in, int h, int w,
                           const float* weights, int c_out, int kh, int kw,
                           int stride, int pad, float* out, int oh, int ow);
void conv2d_grad_input_scalar(const float* grad_out, int c_out, int oh, int ow,
                              const float* weights, int c_in, int kh, int kw,
                              int stride, int pad, float* grad_x, int h, int w);
void conv2d_grad_weight_scalar(const float* x, int c_in, int h, int w,
                               const float* grad_out, int c_out, int oh, int ow,
                               int kh, int kw, int stride, int pad, float* grad_w);
#if defined(__x86_64__) || defined(_M_X64)
void conv2d_forward_avx2(const float* x, int c_in, int h, int w,
                         const float* weights, int c_out, int kh, int kw,
                         int stride, int pad, float* out, int oh, int ow);
void conv2d_grad_input_avx2(const float* grad_out, int c_out, int oh, int ow,
                            const float* weights, int c_in, int kh, int kw,
                            int stride, int pad, float* grad_x, int h, int w);
void conv2d_grad_weight_avx2(const float* x, int c_in, int h, int w,
                             const float* grad_out, int c_out, int oh, int ow,
                             int kh, int kw, int stride, int pad, float* grad_w);
#endif
}  // namespace detail

}  // namespace sesr::kernels
