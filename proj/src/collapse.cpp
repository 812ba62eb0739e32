#include "sesr/collapse.hpp"

#include <cmath>

namespace sesr {

void LinearBlockSpec::validate() const {
    if (kernel % 2 == 0) throw ConfigError("linear block: kernel extent must be odd");
    if (kernel <= 0 || c_in <= 0 || c_out <= 0) throw DimensionError("linear block: bad extents");
    if (expansion < std::max(c_in, c_out))
        throw ConfigError("linear block: expansion (" + std::to_string(expansion) +
                          ") must be >= max(c_in, c_out)");
    if (short_residual && c_in != c_out)
        throw ConfigError("linear block: shortcut requires c_in == c_out");
}

std::pair<LinearBlockSpec, BlockWeights> expand(const ConvSpec& spec, int expansion,
                                                std::uint64_t init_seed) {
    if (spec.kh != spec.kw) throw ConfigError("expand: kernel must be square");
    if (spec.kh % 2 == 0) throw ConfigError("expand: even kernel extent unsupported");
    if (spec.has_bias) throw ConfigError("expand: biased convs cannot be expanded");

    LinearBlockSpec block;
    block.kernel = spec.kh;
    block.c_in = spec.c_in;
    block.c_out = spec.c_out;
    block.expansion = expansion;
    block.short_residual = (spec.c_in == spec.c_out);
    block.validate();

    Rng rng(init_seed);
    BlockWeights w;
    const int k2 = block.kernel * block.kernel;
    {
        const float limit = std::sqrt(6.0f / static_cast<float>(block.c_in * k2 + expansion * k2));
        w.expand.resize(static_cast<std::size_t>(expansion) * block.c_in * k2);
        for (auto& v : w.expand) v = rng.uniform(-limit, limit);
    }
    {
        const float limit = std::sqrt(6.0f / static_cast<float>(expansion + block.c_out));
        w.project.resize(static_cast<std::size_t>(block.c_out) * expansion);
        for (auto& v : w.project) v = rng.uniform(-limit, limit);
    }
    return {block, w};
}

std::vector<float> collapse_block(const LinearBlockSpec& spec, const BlockWeights& w) {
    spec.validate();
    const int k2 = spec.kernel * spec.kernel;
    if (w.expand.size() != static_cast<std::size_t>(spec.expansion) * spec.c_in * k2 ||
        w.project.size() != static_cast<std::size_t>(spec.c_out) * spec.expansion)
        throw DimensionError("collapse_block: weight arrays do not match block spec");

    std::vector<float> merged(static_cast<std::size_t>(spec.c_out) * spec.c_in * k2);
    for (int o = 0; o < spec.c_out; ++o)
        for (int i = 0; i < spec.c_in; ++i)
            for (int t = 0; t < k2; ++t) {
                double acc = 0.0;
                for (int q = 0; q < spec.expansion; ++q)
                    acc += static_cast<double>(
                               w.project[static_cast<std::size_t>(o) * spec.expansion + q]) *
                           static_cast<double>(
                               w.expand[(static_cast<std::size_t>(q) * spec.c_in + i) * k2 + t]);
                merged[(static_cast<std::size_t>(o) * spec.c_in + i) * k2 + t] =
                    static_cast<float>(acc);
            }
    if (spec.short_residual) merged = fold_residual(merged, spec.c_out, spec.kernel);
    return merged;
}

std::vector<float> fold_residual(const std::vector<float>& weights, int channels, int kernel) {
    if (kernel % 2 == 0) throw ConfigError("fold_residual: kernel extent must be odd");
    const int k2 = kernel * kernel;
    if (weights.size() != static_cast<std::size_t>(channels) * channels * k2)
        throw ConfigError("fold_residual: weights are not a square-channel conv (c_in != c_out)");
    std::vector<float> out = weights;
    const int center = (kernel / 2) * kernel + (kernel / 2);
    for (int c = 0; c < channels; ++c)
        out[(static_cast<std::size_t>(c) * channels + c) * k2 + center] += 1.0f;
    return out;
}

std::pair<NetworkSpec, WeightStore> collapse_network(const NetworkSpec& expanded,
                                                     const WeightStore& store) {
    check_weights(expanded, store);
    NetworkSpec out;
    out.name = expanded.name;
    out.scale = expanded.scale;
    WeightStore out_store;
    for (std::size_t i = 0; i < expanded.layers.size(); ++i) {
        const auto& layer = expanded.layers[i];
        if (std::holds_alternative<ConvLayer>(layer) ||
            std::holds_alternative<ConvTransposeLayer>(layer))
            throw StructuralError("collapse_network: layer " + std::to_string(i) +
                                  " is a plain conv, expected a linear block");
        if (const auto* b = std::get_if<LinearBlockLayer>(&layer)) {
            LinearBlockSpec spec;
            spec.kernel = b->spec.kh;
            spec.c_in = b->spec.c_in;
            spec.c_out = b->spec.c_out;
            spec.expansion = b->expansion;
            spec.short_residual = b->short_residual;
            BlockWeights bw;
            const std::size_t a_count =
                static_cast<std::size_t>(b->expansion) * b->spec.c_in * b->spec.kh * b->spec.kw;
            bw.expand.assign(store[i].begin(), store[i].begin() + a_count);
            bw.project.assign(store[i].begin() + a_count, store[i].end());
            ConvLayer conv;
            conv.spec = ConvSpec::same(spec.kernel, spec.c_in, spec.c_out);
            out.layers.emplace_back(conv);
            out_store.push_back(collapse_block(spec, bw));
        } else {
            out.layers.push_back(layer);
            out_store.push_back(store[i]);
        }
    }
    return {out, out_store};
}

CollapseReport verify_collapse(const NetworkSpec& expanded, const WeightStore& expanded_w,
                               const NetworkSpec& collapsed, const WeightStore& collapsed_w,
                               int trials, float tol, int input_h, int input_w,
                               std::uint64_t seed) {
    check_weights(expanded, expanded_w);
    check_weights(collapsed, collapsed_w);
    ShapeCHW in{3, input_h, input_w};
    const ShapeCHW a = infer_output_shape(expanded, in);
    const ShapeCHW b = infer_output_shape(collapsed, in);
    if (a.c != b.c || a.h != b.h || a.w != b.w)
        throw StructuralError("verify_collapse: networks produce different output shapes");

    CollapseReport report;
    report.trials = trials;
    Rng rng(seed);
    for (int t = 0; t < trials; ++t) {
        Tensor4 x = Tensor4::random_uniform(1, 3, input_h, input_w, rng);
        const Tensor4 ya = forward(expanded, expanded_w, x);
        const Tensor4 yb = forward(collapsed, collapsed_w, x);
        report.max_abs_diff = std::max(report.max_abs_diff, max_abs_diff(ya, yb));
    }
    report.pass = report.max_abs_diff < tol;
    return report;
}

}  // namespace sesr
