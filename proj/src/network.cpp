#include "sesr/network.hpp"

#include <cmath>

namespace sesr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// The two convs of an expanded block, as ConvSpecs.
ConvSpec block_expand_spec(const LinearBlockLayer& b) {
    ConvSpec a = ConvSpec::same(b.spec.kh, b.spec.c_in, b.expansion);
    return a;
}
ConvSpec block_project_spec(const LinearBlockLayer& b) {
    ConvSpec p = ConvSpec::same(1, b.expansion, b.spec.c_out);
    return p;
}

}  // namespace

std::size_t layer_param_count(const Layer& layer) {
    return std::visit(
        overloaded{
            [](const ConvLayer& l) { return l.spec.weight_count(); },
            [](const ConvTransposeLayer& l) { return l.spec.weight_count(); },
            [](const LinearBlockLayer& l) {
                const std::size_t a = static_cast<std::size_t>(l.expansion) * l.spec.c_in *
                                      l.spec.kh * l.spec.kw;
                const std::size_t b = static_cast<std::size_t>(l.spec.c_out) * l.expansion;
                return a + b;
            },
            [](const ActivationLayer& l) {
                return l.kind == ActKind::Prelu ? std::size_t{1} : std::size_t{0};
            },
            [](const DenseLayer& l) { return l.spec.weight_count(); },
            [](const auto&) { return std::size_t{0}; }},
        layer);
}

void check_weights(const NetworkSpec& net, const WeightStore& store) {
    if (store.size() != net.layers.size())
        throw StructuralError("weight store has " + std::to_string(store.size()) +
                              " entries for " + std::to_string(net.layers.size()) + " layers");
    for (std::size_t i = 0; i < store.size(); ++i)
        if (store[i].size() != layer_param_count(net.layers[i]))
            throw StructuralError("layer " + std::to_string(i) + " expects " +
                                  std::to_string(layer_param_count(net.layers[i])) +
                                  " parameters, store has " + std::to_string(store[i].size()));
}

namespace {

void glorot_fill(std::vector<float>& w, std::size_t count, int fan_in, int fan_out, Rng& rng) {
    const float limit = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
    for (std::size_t i = 0; i < count; ++i) w.push_back(rng.uniform(-limit, limit));
}

}  // namespace

WeightStore init_weights(const NetworkSpec& net, std::uint64_t seed) {
    Rng rng(seed);
    WeightStore store;
    store.reserve(net.layers.size());
    for (const auto& layer : net.layers) {
        std::vector<float> w;
        std::visit(
            overloaded{
                [&](const ConvLayer& l) {
                    const auto& s = l.spec;
                    glorot_fill(w, static_cast<std::size_t>(s.c_out) * s.c_in * s.kh * s.kw,
                                s.c_in * s.kh * s.kw, s.c_out * s.kh * s.kw, rng);
                    if (s.has_bias) w.resize(w.size() + s.c_out, 0.0f);
                },
                [&](const ConvTransposeLayer& l) {
                    const auto& s = l.spec;
                    glorot_fill(w, static_cast<std::size_t>(s.c_out) * s.c_in * s.kh * s.kw,
                                s.c_in * s.kh * s.kw, s.c_out * s.kh * s.kw, rng);
                    if (s.has_bias) w.resize(w.size() + s.c_out, 0.0f);
                },
                [&](const LinearBlockLayer& l) {
                    const auto& s = l.spec;
                    glorot_fill(w, static_cast<std::size_t>(l.expansion) * s.c_in * s.kh * s.kw,
                                s.c_in * s.kh * s.kw, l.expansion * s.kh * s.kw, rng);
                    glorot_fill(w, static_cast<std::size_t>(s.c_out) * l.expansion, l.expansion,
                                s.c_out, rng);
                },
                [&](const ActivationLayer& l) {
                    if (l.kind == ActKind::Prelu) w.push_back(0.25f);
                },
                [&](const DenseLayer& l) {
                    glorot_fill(w, static_cast<std::size_t>(l.spec.in) * l.spec.out, l.spec.in,
                                l.spec.out, rng);
                    w.resize(w.size() + l.spec.out, 0.0f);  // zero bias
                },
                [](const auto&) {}},
            layer);
        store.push_back(std::move(w));
    }
    return store;
}

ShapeCHW infer_output_shape(const NetworkSpec& net, ShapeCHW in) {
    std::map<std::string, ShapeCHW> slots;
    ShapeCHW cur = in;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& layer = net.layers[i];
        std::visit(
            overloaded{
                [&](const ConvLayer& l) {
                    const auto& s = l.spec;
                    if (cur.c != s.c_in)
                        throw StructuralError("layer " + std::to_string(i) +
                                              ": channel axis mismatch");
                    cur = {s.c_out, (cur.h + 2 * s.pad_h() - s.kh) / s.stride + 1,
                           (cur.w + 2 * s.pad_w() - s.kw) / s.stride + 1};
                },
                [&](const ConvTransposeLayer& l) {
                    const auto& s = l.spec;
                    if (cur.c != s.c_in)
                        throw StructuralError("layer " + std::to_string(i) +
                                              ": channel axis mismatch");
                    cur = {s.c_out,
                           (cur.h - 1) * s.stride - 2 * s.pad_h() + s.kh + s.output_padding,
                           (cur.w - 1) * s.stride - 2 * s.pad_w() + s.kw + s.output_padding};
                },
                [&](const LinearBlockLayer& l) {
                    if (cur.c != l.spec.c_in)
                        throw StructuralError("layer " + std::to_string(i) +
                                              ": channel axis mismatch");
                    cur.c = l.spec.c_out;
                },
                [&](const DepthToSpaceLayer& l) {
                    if (cur.c % (l.block * l.block) != 0)
                        throw StructuralError("layer " + std::to_string(i) +
                                              ": channels not divisible by block^2");
                    cur = {cur.c / (l.block * l.block), cur.h * l.block, cur.w * l.block};
                },
                [&](const ResidualBeginLayer& l) { slots[l.label] = cur; },
                [&](const ResidualEndLayer& l) {
                    auto it = slots.find(l.label);
                    if (it == slots.end())
                        throw StructuralError("residual end '" + l.label + "' without begin");
                    const ShapeCHW& s = it->second;
                    if (s.c * l.tile != cur.c || s.h != cur.h || s.w != cur.w)
                        throw StructuralError("residual '" + l.label + "' shape mismatch");
                },
                [&](const AvgPoolLayer&) { cur = {cur.c, cur.h / 2, cur.w / 2}; },
                [&](const FlattenLayer&) { cur = {cur.c * cur.h * cur.w, 1, 1}; },
                [&](const DenseLayer& l) {
                    if (cur.c != l.spec.in || cur.h != 1 || cur.w != 1)
                        throw StructuralError("layer " + std::to_string(i) +
                                              ": dense input mismatch");
                    cur = {l.spec.out, 1, 1};
                },
                [](const ActivationLayer&) {}},
            layer);
    }
    return cur;
}

namespace {

Tensor4 block_forward(const LinearBlockLayer& l, const std::vector<float>& w, const Tensor4& x,
                      Tensor4* mid_out) {
    const std::size_t a_count =
        static_cast<std::size_t>(l.expansion) * l.spec.c_in * l.spec.kh * l.spec.kw;
    std::vector<float> a(w.begin(), w.begin() + a_count);
    std::vector<float> b(w.begin() + a_count, w.end());
    Tensor4 mid = conv2d(x, block_expand_spec(l), a);
    Tensor4 out = conv2d(mid, block_project_spec(l), b);
    if (l.short_residual) out = add(out, x);
    if (mid_out) *mid_out = std::move(mid);
    return out;
}

}  // namespace

Tensor4 forward(const NetworkSpec& net, const WeightStore& store, const Tensor4& x) {
    check_weights(net, store);
    std::map<std::string, Tensor4> slots;
    Tensor4 cur = x;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& w = store[i];
        cur = std::visit(
            overloaded{
                [&](const ConvLayer& l) { return conv2d(cur, l.spec, w); },
                [&](const ConvTransposeLayer& l) { return conv2d_transpose(cur, l.spec, w); },
                [&](const LinearBlockLayer& l) { return block_forward(l, w, cur, nullptr); },
                [&](const ActivationLayer& l) {
                    return l.kind == ActKind::Relu ? relu_forward(cur)
                                                   : prelu_forward(cur, w[0]);
                },
                [&](const DepthToSpaceLayer& l) { return depth_to_space(cur, l.block); },
                [&](const ResidualBeginLayer& l) {
                    slots[l.label] = cur;
                    return std::move(cur);
                },
                [&](const ResidualEndLayer& l) {
                    auto it = slots.find(l.label);
                    if (it == slots.end())
                        throw StructuralError("residual end '" + l.label + "' without begin");
                    return add(cur, l.tile == 1 ? it->second : tile_channels(it->second, l.tile));
                },
                [&](const AvgPoolLayer&) { return avgpool2_forward(cur); },
                [&](const FlattenLayer&) { return flatten_forward(cur); },
                [&](const DenseLayer& l) { return dense_forward(cur, l.spec, w); }},
            net.layers[i]);
    }
    return cur;
}

ForwardTrace forward_traced(const NetworkSpec& net, const WeightStore& store, const Tensor4& x) {
    check_weights(net, store);
    ForwardTrace trace;
    trace.layer_inputs.reserve(net.layers.size());
    Tensor4 cur = x;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        trace.layer_inputs.push_back(cur);
        const auto& w = store[i];
        cur = std::visit(
            overloaded{
                [&](const ConvLayer& l) { return conv2d(cur, l.spec, w); },
                [&](const ConvTransposeLayer& l) { return conv2d_transpose(cur, l.spec, w); },
                [&](const LinearBlockLayer& l) { return block_forward(l, w, cur, nullptr); },
                [&](const ActivationLayer& l) {
                    return l.kind == ActKind::Relu ? relu_forward(cur)
                                                   : prelu_forward(cur, w[0]);
                },
                [&](const DepthToSpaceLayer& l) { return depth_to_space(cur, l.block); },
                [&](const ResidualBeginLayer& l) {
                    trace.slots[l.label] = cur;
                    return std::move(cur);
                },
                [&](const ResidualEndLayer& l) {
                    auto it = trace.slots.find(l.label);
                    if (it == trace.slots.end())
                        throw StructuralError("residual end '" + l.label + "' without begin");
                    return add(cur, l.tile == 1 ? it->second : tile_channels(it->second, l.tile));
                },
                [&](const AvgPoolLayer&) { return avgpool2_forward(cur); },
                [&](const FlattenLayer&) { return flatten_forward(cur); },
                [&](const DenseLayer& l) { return dense_forward(cur, l.spec, w); }},
            net.layers[i]);
    }
    trace.output = cur;
    return trace;
}

BackwardResult backward(const NetworkSpec& net, const WeightStore& store,
                        const ForwardTrace& trace, const Tensor4& grad_output) {
    check_weights(net, store);
    if (trace.layer_inputs.size() != net.layers.size())
        throw StateError("backward: trace does not match network (forward not run?)");
    BackwardResult res;
    res.grad_store.resize(store.size());
    for (std::size_t i = 0; i < store.size(); ++i)
        res.grad_store[i].assign(store[i].size(), 0.0f);

    // Gradients waiting for their ResidualBegin point.
    std::map<std::string, Tensor4> pending;
    Tensor4 grad = grad_output;
    for (std::size_t ri = net.layers.size(); ri-- > 0;) {
        const auto& layer = net.layers[ri];
        const auto& w = store[ri];
        const Tensor4& input = trace.layer_inputs[ri];
        grad = std::visit(
            overloaded{
                [&](const ConvLayer& l) {
                    auto g = conv2d_backward(input, l.spec, w, grad);
                    res.grad_store[ri] = std::move(g.grad_w);
                    return std::move(g.grad_x);
                },
                [&](const ConvTransposeLayer& l) {
                    auto g = conv2d_transpose_backward(input, l.spec, w, grad);
                    res.grad_store[ri] = std::move(g.grad_w);
                    return std::move(g.grad_x);
                },
                [&](const LinearBlockLayer& l) {
                    const std::size_t a_count = static_cast<std::size_t>(l.expansion) *
                                                l.spec.c_in * l.spec.kh * l.spec.kw;
                    std::vector<float> a(w.begin(), w.begin() + a_count);
                    std::vector<float> b(w.begin() + a_count, w.end());
                    const ConvSpec sa = block_expand_spec(l);
                    const ConvSpec sb = block_project_spec(l);
                    Tensor4 mid = conv2d(input, sa, a);
                    auto gb = conv2d_backward(mid, sb, b, grad);
                    auto ga = conv2d_backward(input, sa, a, gb.grad_x);
                    auto& dst = res.grad_store[ri];
                    dst.assign(w.size(), 0.0f);
                    std::copy(ga.grad_w.begin(), ga.grad_w.end(), dst.begin());
                    std::copy(gb.grad_w.begin(), gb.grad_w.end(), dst.begin() + a_count);
                    Tensor4 gx = std::move(ga.grad_x);
                    if (l.short_residual) gx = add(gx, grad);
                    return gx;
                },
                [&](const ActivationLayer& l) {
                    if (l.kind == ActKind::Relu) return relu_backward(input, grad);
                    auto [gx, gs] = prelu_backward(input, w[0], grad);
                    res.grad_store[ri][0] = gs;
                    return std::move(gx);
                },
                [&](const DepthToSpaceLayer& l) { return space_to_depth(grad, l.block); },
                [&](const ResidualBeginLayer& l) {
                    auto it = pending.find(l.label);
                    if (it == pending.end()) return std::move(grad);
                    Tensor4 merged = add(grad, it->second);
                    pending.erase(it);
                    return merged;
                },
                [&](const ResidualEndLayer& l) {
                    Tensor4 skip = l.tile == 1 ? grad : sum_channel_tiles(grad, l.tile);
                    auto it = pending.find(l.label);
                    if (it == pending.end())
                        pending.emplace(l.label, std::move(skip));
                    else
                        it->second = add(it->second, skip);
                    return std::move(grad);
                },
                [&](const AvgPoolLayer&) { return avgpool2_backward(input, grad); },
                [&](const FlattenLayer&) { return flatten_backward(input, grad); },
                [&](const DenseLayer& l) {
                    auto g = dense_backward(input, l.spec, w, grad);
                    res.grad_store[ri] = std::move(g.grad_w);
                    return std::move(g.grad_x);
                }},
            layer);
    }
    res.grad_input = std::move(grad);
    return res;
}

}  // namespace sesr
