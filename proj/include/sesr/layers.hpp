#pragma once

#include <utility>
#include <vector>

#include "sesr/tensor.hpp"

namespace sesr {

// Convolution geometry. Padding is zero-fill; "same" is only defined for odd
// kernels and resolves to (k-1)/2 per axis.
struct ConvSpec {
    int kh = 1, kw = 1;
    int c_in = 1, c_out = 1;
    int stride = 1;
    int padding = 0;
    bool same_padding = false;
    int output_padding = 0;  // transposed conv only
    bool has_bias = false;

    static ConvSpec same(int k, int c_in, int c_out) {
        ConvSpec s;
        s.kh = s.kw = k;
        s.c_in = c_in;
        s.c_out = c_out;
        s.same_padding = true;
        return s;
    }
    static ConvSpec explicit_pad(int k, int c_in, int c_out, int stride, int pad) {
        ConvSpec s;
        s.kh = s.kw = k;
        s.c_in = c_in;
        s.c_out = c_out;
        s.stride = stride;
        s.padding = pad;
        return s;
    }

    int pad_h() const;
    int pad_w() const;
    // weight array length: c_out*c_in*kh*kw (+ c_out when has_bias)
    std::size_t weight_count() const;
    void validate() const;
};

// Cross-correlation (no kernel flip) with zero padding.
// Output spatial size: floor((h + 2p - k)/stride) + 1.
Tensor4 conv2d(const Tensor4& x, const ConvSpec& spec, const std::vector<float>& weights);

// Transposed convolution; adjoint of conv2d with the channel axes of the
// weight array swapped. Output size: (h-1)*stride - 2p + k + output_padding.
Tensor4 conv2d_transpose(const Tensor4& x, const ConvSpec& spec, const std::vector<float>& weights);

struct ConvGrads {
    Tensor4 grad_x;
    std::vector<float> grad_w;
};
ConvGrads conv2d_backward(const Tensor4& x, const ConvSpec& spec,
                          const std::vector<float>& weights, const Tensor4& grad_out);
ConvGrads conv2d_transpose_backward(const Tensor4& x, const ConvSpec& spec,
                                    const std::vector<float>& weights, const Tensor4& grad_out);

Tensor4 relu_forward(const Tensor4& x);
Tensor4 relu_backward(const Tensor4& x, const Tensor4& grad_out);

Tensor4 prelu_forward(const Tensor4& x, float slope);
// Returns (grad_x, grad_slope).
std::pair<Tensor4, float> prelu_backward(const Tensor4& x, float slope, const Tensor4& grad_out);

// Rearranges block^2 channel groups into a block-times-larger spatial grid:
// out[n, c, y*block+dy, x*block+dx] = in[n, (dy*block+dx)*c_out + c, y, x].
Tensor4 depth_to_space(const Tensor4& x, int block);
Tensor4 space_to_depth(const Tensor4& x, int block);  // exact inverse

// 2x2 mean pooling, stride 2 (spatial dims must be even).
Tensor4 avgpool2_forward(const Tensor4& x);
Tensor4 avgpool2_backward(const Tensor4& x, const Tensor4& grad_out);

// (n,c,h,w) -> (n, c*h*w, 1, 1)
Tensor4 flatten_forward(const Tensor4& x);
Tensor4 flatten_backward(const Tensor4& x, const Tensor4& grad_out);

// Fully connected layer on flattened input; weights = out*in row-major
// followed by out bias values.
struct DenseSpec {
    int in = 0, out = 0;
    std::size_t weight_count() const { return static_cast<std::size_t>(in) * out + out; }
};
Tensor4 dense_forward(const Tensor4& x, const DenseSpec& spec, const std::vector<float>& weights);
ConvGrads dense_backward(const Tensor4& x, const DenseSpec& spec,
                         const std::vector<float>& weights, const Tensor4& grad_out);

}  // namespace sesr
