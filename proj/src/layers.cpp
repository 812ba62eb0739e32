#include "sesr/layers.hpp"

#include <cmath>
#include <string>

#include "sesr/kernels.hpp"

namespace sesr {

int ConvSpec::pad_h() const { return same_padding ? (kh - 1) / 2 : padding; }
int ConvSpec::pad_w() const { return same_padding ? (kw - 1) / 2 : padding; }

std::size_t ConvSpec::weight_count() const {
    std::size_t n = static_cast<std::size_t>(c_out) * c_in * kh * kw;
    if (has_bias) n += static_cast<std::size_t>(c_out);
    return n;
}

void ConvSpec::validate() const {
    if (kh <= 0 || kw <= 0 || c_in <= 0 || c_out <= 0)
        throw DimensionError("ConvSpec: non-positive extent");
    if (stride <= 0) throw ConfigError("ConvSpec: stride must be positive");
    if (same_padding && (kh % 2 == 0 || kw % 2 == 0))
        throw ConfigError("ConvSpec: 'same' padding requires odd kernel extents");
    if (!same_padding && padding < 0) throw ConfigError("ConvSpec: negative padding");
    if (output_padding < 0) throw ConfigError("ConvSpec: negative output padding");
}

static void check_conv_input(const Tensor4& x, const ConvSpec& spec,
                             const std::vector<float>& weights, const char* op) {
    spec.validate();
    if (x.c != spec.c_in)
        throw DimensionError(std::string(op) + ": input channel axis is " + std::to_string(x.c) +
                             ", spec expects c_in=" + std::to_string(spec.c_in));
    if (weights.size() != spec.weight_count())
        throw DimensionError(std::string(op) + ": weight array has " +
                             std::to_string(weights.size()) + " values, spec expects " +
                             std::to_string(spec.weight_count()));
}

Tensor4 conv2d(const Tensor4& x, const ConvSpec& spec, const std::vector<float>& weights) {
    check_conv_input(x, spec, weights, "conv2d");
    const int ph = spec.pad_h(), pw = spec.pad_w();
    if (ph != pw)
        throw ConfigError("conv2d: asymmetric padding unsupported");
    const int oh = (x.h + 2 * ph - spec.kh) / spec.stride + 1;
    const int ow = (x.w + 2 * pw - spec.kw) / spec.stride + 1;
    if (oh <= 0 || ow <= 0)
        throw DimensionError("conv2d: computed output height/width non-positive (" +
                             std::to_string(oh) + "x" + std::to_string(ow) + ")");
    Tensor4 out(x.n, spec.c_out, oh, ow);
    for (int in = 0; in < x.n; ++in)
        kernels::conv2d_forward(x.plane(in, 0), x.c, x.h, x.w, weights.data(), spec.c_out,
                                spec.kh, spec.kw, spec.stride, ph, out.plane(in, 0), oh, ow);
    if (spec.has_bias) {
        const float* bias = weights.data() + static_cast<std::size_t>(spec.c_out) * spec.c_in *
                                                 spec.kh * spec.kw;
        for (int in = 0; in < out.n; ++in)
            for (int oc = 0; oc < out.c; ++oc) {
                float* p = out.plane(in, oc);
                for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i)
                    p[i] += bias[oc];
            }
    }
    return out;
}

Tensor4 conv2d_transpose(const Tensor4& x, const ConvSpec& spec,
                         const std::vector<float>& weights) {
    check_conv_input(x, spec, weights, "conv2d_transpose");
    const int ph = spec.pad_h(), pw = spec.pad_w();
    const int oh = (x.h - 1) * spec.stride - 2 * ph + spec.kh + spec.output_padding;
    const int ow = (x.w - 1) * spec.stride - 2 * pw + spec.kw + spec.output_padding;
    if (oh <= 0 || ow <= 0)
        throw ConfigError("conv2d_transpose: computed output size non-positive (" +
                          std::to_string(oh) + "x" + std::to_string(ow) + ")");
    Tensor4 out(x.n, spec.c_out, oh, ow);
    const std::size_t k_plane = static_cast<std::size_t>(spec.kh) * spec.kw;
    // scatter in double, one output plane at a time
    std::vector<double> acc(static_cast<std::size_t>(oh) * ow);
    for (int in = 0; in < x.n; ++in) {
        for (int oc = 0; oc < spec.c_out; ++oc) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int ic = 0; ic < spec.c_in; ++ic) {
                const float* xp = x.plane(in, ic);
                const float* wk =
                    weights.data() + (static_cast<std::size_t>(oc) * spec.c_in + ic) * k_plane;
                for (int iy = 0; iy < x.h; ++iy)
                    for (int ix = 0; ix < x.w; ++ix) {
                        const double v = xp[static_cast<std::size_t>(iy) * x.w + ix];
                        if (v == 0.0) continue;
                        for (int ky = 0; ky < spec.kh; ++ky) {
                            const int ty = iy * spec.stride + ky - ph;
                            if (ty < 0 || ty >= oh) continue;
                            for (int kx = 0; kx < spec.kw; ++kx) {
                                const int tx = ix * spec.stride + kx - pw;
                                if (tx < 0 || tx >= ow) continue;
                                acc[static_cast<std::size_t>(ty) * ow + tx] +=
                                    v * static_cast<double>(wk[static_cast<std::size_t>(ky) * spec.kw + kx]);
                            }
                        }
                    }
            }
            float* op = out.plane(in, oc);
            for (std::size_t i = 0; i < acc.size(); ++i) op[i] = static_cast<float>(acc[i]);
        }
    }
    if (spec.has_bias) {
        const float* bias = weights.data() + static_cast<std::size_t>(spec.c_out) * spec.c_in *
                                                 spec.kh * spec.kw;
        for (int in = 0; in < out.n; ++in)
            for (int oc = 0; oc < out.c; ++oc) {
                float* p = out.plane(in, oc);
                for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i)
                    p[i] += bias[oc];
            }
    }
    return out;
}

ConvGrads conv2d_backward(const Tensor4& x, const ConvSpec& spec,
                          const std::vector<float>& weights, const Tensor4& grad_out) {
    check_conv_input(x, spec, weights, "conv2d_backward");
    const int ph = spec.pad_h();
    const int oh = (x.h + 2 * ph - spec.kh) / spec.stride + 1;
    const int ow = (x.w + 2 * spec.pad_w() - spec.kw) / spec.stride + 1;
    if (grad_out.n != x.n || grad_out.c != spec.c_out || grad_out.h != oh || grad_out.w != ow)
        throw StateError("conv2d_backward: grad shape does not match cached forward shape");
    ConvGrads g;
    g.grad_x = Tensor4(x.n, x.c, x.h, x.w);
    g.grad_w.assign(weights.size(), 0.0f);
    for (int in = 0; in < x.n; ++in) {
        kernels::conv2d_grad_input(grad_out.plane(in, 0), spec.c_out, oh, ow, weights.data(),
                                   spec.c_in, spec.kh, spec.kw, spec.stride, ph,
                                   g.grad_x.plane(in, 0), x.h, x.w);
        kernels::conv2d_grad_weight(x.plane(in, 0), x.c, x.h, x.w, grad_out.plane(in, 0),
                                    spec.c_out, oh, ow, spec.kh, spec.kw, spec.stride, ph,
                                    g.grad_w.data());
    }
    if (spec.has_bias) {
        float* gb = g.grad_w.data() + static_cast<std::size_t>(spec.c_out) * spec.c_in * spec.kh *
                                          spec.kw;
        for (int in = 0; in < grad_out.n; ++in)
            for (int oc = 0; oc < grad_out.c; ++oc) {
                const float* p = grad_out.plane(in, oc);
                double acc = 0.0;
                for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) acc += p[i];
                gb[oc] += static_cast<float>(acc);
            }
    }
    return g;
}

ConvGrads conv2d_transpose_backward(const Tensor4& x, const ConvSpec& spec,
                                    const std::vector<float>& weights, const Tensor4& grad_out) {
    check_conv_input(x, spec, weights, "conv2d_transpose_backward");
    const int ph = spec.pad_h(), pw = spec.pad_w();
    const int oh = (x.h - 1) * spec.stride - 2 * ph + spec.kh + spec.output_padding;
    const int ow = (x.w - 1) * spec.stride - 2 * pw + spec.kw + spec.output_padding;
    if (grad_out.n != x.n || grad_out.c != spec.c_out || grad_out.h != oh || grad_out.w != ow)
        throw StateError("conv2d_transpose_backward: grad shape does not match forward shape");
    ConvGrads g;
    g.grad_x = Tensor4(x.n, x.c, x.h, x.w);
    g.grad_w.assign(weights.size(), 0.0f);
    const std::size_t k_plane = static_cast<std::size_t>(spec.kh) * spec.kw;
    // grad_x: gather of grad_out through the scatter pattern.
    for (int in = 0; in < x.n; ++in)
        for (int ic = 0; ic < spec.c_in; ++ic) {
            float* gx = g.grad_x.plane(in, ic);
            for (int iy = 0; iy < x.h; ++iy)
                for (int ix = 0; ix < x.w; ++ix) {
                    double acc = 0.0;
                    for (int oc = 0; oc < spec.c_out; ++oc) {
                        const float* go = grad_out.plane(in, oc);
                        const float* wk = weights.data() +
                                          (static_cast<std::size_t>(oc) * spec.c_in + ic) * k_plane;
                        for (int ky = 0; ky < spec.kh; ++ky) {
                            const int ty = iy * spec.stride + ky - ph;
                            if (ty < 0 || ty >= oh) continue;
                            for (int kx = 0; kx < spec.kw; ++kx) {
                                const int tx = ix * spec.stride + kx - pw;
                                if (tx < 0 || tx >= ow) continue;
                                acc += static_cast<double>(wk[static_cast<std::size_t>(ky) * spec.kw + kx]) *
                                       static_cast<double>(go[static_cast<std::size_t>(ty) * ow + tx]);
                            }
                        }
                    }
                    gx[static_cast<std::size_t>(iy) * x.w + ix] = static_cast<float>(acc);
                }
        }
    // grad_w[oc,ic,ky,kx] = sum over scatter hits of x * grad_out
    for (int in = 0; in < x.n; ++in)
        for (int oc = 0; oc < spec.c_out; ++oc) {
            const float* go = grad_out.plane(in, oc);
            for (int ic = 0; ic < spec.c_in; ++ic) {
                const float* xp = x.plane(in, ic);
                float* gw = g.grad_w.data() +
                            (static_cast<std::size_t>(oc) * spec.c_in + ic) * k_plane;
                for (int ky = 0; ky < spec.kh; ++ky)
                    for (int kx = 0; kx < spec.kw; ++kx) {
                        double acc = 0.0;
                        for (int iy = 0; iy < x.h; ++iy) {
                            const int ty = iy * spec.stride + ky - ph;
                            if (ty < 0 || ty >= oh) continue;
                            for (int ix = 0; ix < x.w; ++ix) {
                                const int tx = ix * spec.stride + kx - pw;
                                if (tx < 0 || tx >= ow) continue;
                                acc += static_cast<double>(xp[static_cast<std::size_t>(iy) * x.w + ix]) *
                                       static_cast<double>(go[static_cast<std::size_t>(ty) * ow + tx]);
                            }
                        }
                        gw[static_cast<std::size_t>(ky) * spec.kw + kx] += static_cast<float>(acc);
                    }
            }
        }
    if (spec.has_bias) {
        float* gb = g.grad_w.data() + static_cast<std::size_t>(spec.c_out) * spec.c_in * spec.kh *
                                          spec.kw;
        for (int in = 0; in < grad_out.n; ++in)
            for (int oc = 0; oc < grad_out.c; ++oc) {
                const float* p = grad_out.plane(in, oc);
                double acc = 0.0;
                for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i) acc += p[i];
                gb[oc] += static_cast<float>(acc);
            }
    }
    return g;
}

Tensor4 relu_forward(const Tensor4& x) {
    Tensor4 out = x;
    for (auto& v : out.data) v = v > 0.0f ? v : 0.0f;
    return out;
}

Tensor4 relu_backward(const Tensor4& x, const Tensor4& grad_out) {
    if (!x.same_shape(grad_out)) throw StateError("relu_backward: shape mismatch with forward");
    Tensor4 g = grad_out;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (x.data[i] <= 0.0f) g.data[i] = 0.0f;
    return g;
}

Tensor4 prelu_forward(const Tensor4& x, float slope) {
    Tensor4 out = x;
    for (auto& v : out.data) v = v >= 0.0f ? v : slope * v;
    return out;
}

std::pair<Tensor4, float> prelu_backward(const Tensor4& x, float slope, const Tensor4& grad_out) {
    if (!x.same_shape(grad_out)) throw StateError("prelu_backward: shape mismatch with forward");
    Tensor4 gx = grad_out;
    double gs = 0.0;
    for (std::size_t i = 0; i < gx.size(); ++i) {
        if (x.data[i] < 0.0f) {
            gs += static_cast<double>(grad_out.data[i]) * static_cast<double>(x.data[i]);
            gx.data[i] *= slope;
        }
    }
    return {std::move(gx), static_cast<float>(gs)};
}

Tensor4 depth_to_space(const Tensor4& x, int block) {
    if (block <= 0) throw DimensionError("depth_to_space: block must be positive");
    if (x.c % (block * block) != 0)
        throw DimensionError("depth_to_space: channel axis (" + std::to_string(x.c) +
                             ") not divisible by block^2 (" + std::to_string(block * block) + ")");
    const int c_out = x.c / (block * block);
    Tensor4 out(x.n, c_out, x.h * block, x.w * block);
    for (int in = 0; in < x.n; ++in)
        for (int c = 0; c < c_out; ++c)
            for (int dy = 0; dy < block; ++dy)
                for (int dx = 0; dx < block; ++dx) {
                    const int src_c = (dy * block + dx) * c_out + c;
                    for (int y = 0; y < x.h; ++y)
                        for (int xx = 0; xx < x.w; ++xx)
                            out.at(in, c, y * block + dy, xx * block + dx) = x.at(in, src_c, y, xx);
                }
    return out;
}

Tensor4 space_to_depth(const Tensor4& x, int block) {
    if (block <= 0) throw DimensionError("space_to_depth: block must be positive");
    if (x.h % block != 0 || x.w % block != 0)
        throw DimensionError("space_to_depth: spatial axes not divisible by block");
    const int c_out = x.c * block * block;
    Tensor4 out(x.n, c_out, x.h / block, x.w / block);
    for (int in = 0; in < x.n; ++in)
        for (int c = 0; c < x.c; ++c)
            for (int dy = 0; dy < block; ++dy)
                for (int dx = 0; dx < block; ++dx) {
                    const int dst_c = (dy * block + dx) * x.c + c;
                    for (int y = 0; y < out.h; ++y)
                        for (int xx = 0; xx < out.w; ++xx)
                            out.at(in, dst_c, y, xx) = x.at(in, c, y * block + dy, xx * block + dx);
                }
    return out;
}

Tensor4 avgpool2_forward(const Tensor4& x) {
    if (x.h % 2 != 0 || x.w % 2 != 0)
        throw DimensionError("avgpool2: spatial axes must be even, got " + std::to_string(x.h) +
                             "x" + std::to_string(x.w));
    Tensor4 out(x.n, x.c, x.h / 2, x.w / 2);
    for (int in = 0; in < x.n; ++in)
        for (int c = 0; c < x.c; ++c)
            for (int y = 0; y < out.h; ++y)
                for (int xx = 0; xx < out.w; ++xx)
                    out.at(in, c, y, xx) = 0.25f * (x.at(in, c, 2 * y, 2 * xx) +
                                                    x.at(in, c, 2 * y, 2 * xx + 1) +
                                                    x.at(in, c, 2 * y + 1, 2 * xx) +
                                                    x.at(in, c, 2 * y + 1, 2 * xx + 1));
    return out;
}

Tensor4 avgpool2_backward(const Tensor4& x, const Tensor4& grad_out) {
    if (grad_out.n != x.n || grad_out.c != x.c || grad_out.h != x.h / 2 || grad_out.w != x.w / 2)
        throw StateError("avgpool2_backward: grad shape does not match forward shape");
    Tensor4 gx(x.n, x.c, x.h, x.w);
    for (int in = 0; in < x.n; ++in)
        for (int c = 0; c < x.c; ++c)
            for (int y = 0; y < grad_out.h; ++y)
                for (int xx = 0; xx < grad_out.w; ++xx) {
                    const float g = 0.25f * grad_out.at(in, c, y, xx);
                    gx.at(in, c, 2 * y, 2 * xx) = g;
                    gx.at(in, c, 2 * y, 2 * xx + 1) = g;
                    gx.at(in, c, 2 * y + 1, 2 * xx) = g;
                    gx.at(in, c, 2 * y + 1, 2 * xx + 1) = g;
                }
    return gx;
}

Tensor4 flatten_forward(const Tensor4& x) {
    Tensor4 out(x.n, x.c * x.h * x.w, 1, 1);
    out.data = x.data;
    return out;
}

Tensor4 flatten_backward(const Tensor4& x, const Tensor4& grad_out) {
    if (grad_out.size() != x.size() || grad_out.n != x.n)
        throw StateError("flatten_backward: grad shape does not match forward shape");
    Tensor4 gx(x.n, x.c, x.h, x.w);
    gx.data = grad_out.data;
    return gx;
}

Tensor4 dense_forward(const Tensor4& x, const DenseSpec& spec, const std::vector<float>& weights) {
    if (x.c != spec.in || x.h != 1 || x.w != 1)
        throw DimensionError("dense: input must be (n," + std::to_string(spec.in) +
                             ",1,1), channel axis is " + std::to_string(x.c));
    if (weights.size() != spec.weight_count())
        throw DimensionError("dense: weight array size mismatch");
    const float* bias = weights.data() + static_cast<std::size_t>(spec.in) * spec.out;
    Tensor4 out(x.n, spec.out, 1, 1);
    for (int in = 0; in < x.n; ++in) {
        const float* xp = x.plane(in, 0);
        for (int o = 0; o < spec.out; ++o) {
            const float* wr = weights.data() + static_cast<std::size_t>(o) * spec.in;
            double acc = bias[o];
            for (int i = 0; i < spec.in; ++i)
                acc += static_cast<double>(wr[i]) * static_cast<double>(xp[i]);
            out.at(in, o, 0, 0) = static_cast<float>(acc);
        }
    }
    return out;
}

ConvGrads dense_backward(const Tensor4& x, const DenseSpec& spec,
                         const std::vector<float>& weights, const Tensor4& grad_out) {
    if (grad_out.n != x.n || grad_out.c != spec.out)
        throw StateError("dense_backward: grad shape does not match forward shape");
    ConvGrads g;
    g.grad_x = Tensor4(x.n, x.c, 1, 1);
    g.grad_w.assign(weights.size(), 0.0f);
    float* gb = g.grad_w.data() + static_cast<std::size_t>(spec.in) * spec.out;
    for (int in = 0; in < x.n; ++in) {
        const float* xp = x.plane(in, 0);
        float* gx = g.grad_x.plane(in, 0);
        for (int o = 0; o < spec.out; ++o) {
            const float go = grad_out.at(in, o, 0, 0);
            const float* wr = weights.data() + static_cast<std::size_t>(o) * spec.in;
            float* gw = g.grad_w.data() + static_cast<std::size_t>(o) * spec.in;
            for (int i = 0; i < spec.in; ++i) {
                gx[i] += go * wr[i];
                gw[i] += go * xp[i];
            }
            gb[o] += go;
        }
    }
    return g;
}

}  // namespace sesr
