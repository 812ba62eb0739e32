#include "sesr/kernels.hpp"

#include "sesr/errors.hpp"

namespace sesr::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {
Backend pick_default() { return avx2_supported() ? Backend::Avx2 : Backend::Scalar; }
Backend g_backend = pick_default();
}  // namespace

Backend active_backend() { return g_backend; }

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_supported())
        throw ConfigError("kernel backend avx2 not supported on this CPU");
    g_backend = b;
}

std::string backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

void conv2d_forward(const float* x, int c_in, int h, int w,
                    const float* weights, int c_out, int kh, int kw,
                    int stride, int pad, float* out, int oh, int ow) {
#if defined(__x86_64__) || defined(_M_X64)
    if (g_backend == Backend::Avx2) {
        detail::conv2d_forward_avx2(x, c_in, h, w, weights, c_out, kh, kw, stride, pad, out, oh, ow);
        return;
    }
#endif
    detail::conv2d_forward_scalar(x, c_in, h, w, weights, c_out, kh, kw, stride, pad, out, oh, ow);
}

void conv2d_grad_input(const float* grad_out, int c_out, int oh, int ow,
                       const float* weights, int c_in, int kh, int kw,
                       int stride, int pad, float* grad_x, int h, int w) {
#if defined(__x86_64__) || defined(_M_X64)
    if (g_backend == Backend::Avx2) {
        detail::conv2d_grad_input_avx2(grad_out, c_out, oh, ow, weights, c_in, kh, kw, stride, pad,
                                       grad_x, h, w);
        return;
    }
#endif
    detail::conv2d_grad_input_scalar(grad_out, c_out, oh, ow, weights, c_in, kh, kw, stride, pad,
                                     grad_x, h, w);
}

void conv2d_grad_weight(const float* x, int c_in, int h, int w,
                        const float* grad_out, int c_out, int oh, int ow,
                        int kh, int kw, int stride, int pad, float* grad_w) {
#if defined(__x86_64__) || defined(_M_X64)
    if (g_backend == Backend::Avx2) {
        detail::conv2d_grad_weight_avx2(x, c_in, h, w, grad_out, c_out, oh, ow, kh, kw, stride,
                                        pad, grad_w);
        return;
    }
#endif
    detail::conv2d_grad_weight_scalar(x, c_in, h, w, grad_out, c_out, oh, ow, kh, kw, stride, pad,
                                      grad_w);
}

}  // namespace sesr::kernels
