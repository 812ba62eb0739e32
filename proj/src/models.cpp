#include "sesr/models.hpp"

namespace sesr {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Adds either a plain conv or its expanded-block equivalent.
void push_conv(NetworkSpec& net, NetForm form, int kernel, int c_in, int c_out, int expansion) {
    if (form == NetForm::Collapsed) {
        ConvLayer l;
        l.spec = ConvSpec::same(kernel, c_in, c_out);
        net.layers.emplace_back(l);
    } else {
        LinearBlockLayer l;
        l.spec = ConvSpec::same(kernel, c_in, c_out);
        l.expansion = expansion;
        l.short_residual = (c_in == c_out);
        net.layers.emplace_back(l);
    }
}

}  // namespace

NetworkSpec build_sesr(const SesrConfig& cfg, NetForm form) {
    if (cfg.channels <= 0 || cfg.body_layers <= 0)
        throw ConfigError("build_sesr: channels and body layer count must be positive");
    if (cfg.scale != 2) throw ConfigError("build_sesr: only scale 2 is supported");

    NetworkSpec net;
    net.name = "sesr_m" + std::to_string(cfg.body_layers) + "_f" + std::to_string(cfg.channels);
    net.scale = cfg.scale;
    const int out_ch = cfg.scale * cfg.scale * 3;

    net.layers.emplace_back(ResidualBeginLayer{"image"});
    push_conv(net, form, 5, 3, cfg.channels, cfg.expansion);
    net.layers.emplace_back(ResidualBeginLayer{"features"});
    net.layers.emplace_back(ActivationLayer{cfg.activation});
    for (int i = 0; i < cfg.body_layers; ++i) {
        push_conv(net, form, 3, cfg.channels, cfg.channels, cfg.expansion);
        net.layers.emplace_back(ActivationLayer{cfg.activation});
    }
    net.layers.emplace_back(ResidualEndLayer{"features", 1});
    push_conv(net, form, 5, cfg.channels, out_ch, cfg.expansion);
    // Global skip: the input replicated into each shuffle phase, so the net
    // learns a correction on top of nearest-neighbor upscaling.
    net.layers.emplace_back(ResidualEndLayer{"image", cfg.scale * cfg.scale});
    net.layers.emplace_back(DepthToSpaceLayer{cfg.scale});
    return net;
}

NetworkSpec build_fsrcnn() {
    NetworkSpec net;
    net.name = "fsrcnn";
    net.scale = 2;
    auto conv = [&](int k, int c_in, int c_out) {
        ConvLayer l;
        l.spec = ConvSpec::same(k, c_in, c_out);
        net.layers.emplace_back(l);
        net.layers.emplace_back(ActivationLayer{ActKind::Relu});
    };
    conv(5, 3, 56);   // feature extraction
    conv(1, 56, 12);  // shrink
    for (int i = 0; i < 4; ++i) conv(3, 12, 12);  // mapping
    conv(1, 12, 56);  // expand
    ConvTransposeLayer head;
    head.spec = ConvSpec::explicit_pad(9, 56, 3, 2, 4);
    head.spec.output_padding = 1;  // lands exactly on 2x size
    net.layers.emplace_back(head);
    return net;
}

NetworkSpec build_preset(const std::string& name) {
    if (name == "sesr_m2") return build_sesr(SesrConfig::m2(), NetForm::Collapsed);
    if (name == "sesr_m3") return build_sesr(SesrConfig::m3(), NetForm::Collapsed);
    if (name == "sesr_m5") return build_sesr(SesrConfig::m5(), NetForm::Collapsed);
    if (name == "sesr_xl") return build_sesr(SesrConfig::xl(), NetForm::Collapsed);
    if (name == "fsrcnn") return build_fsrcnn();
    throw ConfigError("unknown network preset '" + name + "'");
}

std::uint64_t count_params(const NetworkSpec& net) {
    std::uint64_t total = 0;
    for (const auto& layer : net.layers) total += layer_param_count(layer);
    return total;
}

std::uint64_t count_macs(const NetworkSpec& net, int input_h, int input_w) {
    if (input_h <= 0 || input_w <= 0) throw ConfigError("count_macs: input dims must be positive");
    ShapeCHW cur{3, input_h, input_w};
    // Walk and cost in one pass; first conv-ish layer fixes the channel count.
    bool channels_seeded = false;
    std::uint64_t macs = 0;
    for (const auto& layer : net.layers) {
        std::visit(
            overloaded{
                [&](const ConvLayer& l) {
                    const auto& s = l.spec;
                    if (!channels_seeded) {
                        cur.c = s.c_in;
                        channels_seeded = true;
                    }
                    const int oh = (cur.h + 2 * s.pad_h() - s.kh) / s.stride + 1;
                    const int ow = (cur.w + 2 * s.pad_w() - s.kw) / s.stride + 1;
                    macs += static_cast<std::uint64_t>(s.kh) * s.kw * s.c_in * s.c_out * oh * ow;
                    cur = {s.c_out, oh, ow};
                },
                [&](const ConvTransposeLayer& l) {
                    const auto& s = l.spec;
                    if (!channels_seeded) {
                        cur.c = s.c_in;
                        channels_seeded = true;
                    }
                    const int oh = (cur.h - 1) * s.stride - 2 * s.pad_h() + s.kh + s.output_padding;
                    const int ow = (cur.w - 1) * s.stride - 2 * s.pad_w() + s.kw + s.output_padding;
                    macs += static_cast<std::uint64_t>(s.kh) * s.kw * s.c_in * s.c_out * oh * ow;
                    cur = {s.c_out, oh, ow};
                },
                [&](const LinearBlockLayer& l) {
                    // expanded form runs two convs at the same resolution
                    const auto& s = l.spec;
                    macs += static_cast<std::uint64_t>(s.kh) * s.kw * s.c_in * l.expansion *
                            cur.h * cur.w;
                    macs += static_cast<std::uint64_t>(l.expansion) * s.c_out * cur.h * cur.w;
                    cur.c = s.c_out;
                },
                [&](const DepthToSpaceLayer& l) {
                    cur = {cur.c / (l.block * l.block), cur.h * l.block, cur.w * l.block};
                },
                [&](const AvgPoolLayer&) { cur = {cur.c, cur.h / 2, cur.w / 2}; },
                [&](const FlattenLayer&) { cur = {cur.c * cur.h * cur.w, 1, 1}; },
                [&](const DenseLayer& l) {
                    macs += static_cast<std::uint64_t>(l.spec.in) * l.spec.out;
                    cur = {l.spec.out, 1, 1};
                },
                [](const auto&) {}},
            layer);
    }
    return macs;
}

Tensor4 sr_upscale(const NetworkSpec& net, const WeightStore& store, const Tensor4& image) {
    if (image.c != 3)
        throw DimensionError("sr_upscale: image channel axis must be 3, got " +
                             std::to_string(image.c));
    Tensor4 out = forward(net, store, image);
    if (out.h != net.scale * image.h || out.w != net.scale * image.w || out.c != 3)
        throw StructuralError("sr_upscale: network did not produce a 3-channel " +
                              std::to_string(net.scale) + "x output");
    return clamp01(out);
}

}  // namespace sesr
