#include "sesr/defense.hpp"

#include <cmath>

#include "sesr/io.hpp"
#include "sesr/jpeg.hpp"
#include "sesr/resize.hpp"

namespace sesr {

Upscaler upscaler_from_name(const std::string& name) {
    if (name == "none") return Upscaler::None;
    if (name == "nearest") return Upscaler::Nearest;
    if (name == "bicubic") return Upscaler::Bicubic;
    if (name == "sesr_m2") return Upscaler::SesrM2;
    if (name == "sesr_m3") return Upscaler::SesrM3;
    if (name == "sesr_m5") return Upscaler::SesrM5;
    if (name == "sesr_xl") return Upscaler::SesrXl;
    if (name == "fsrcnn") return Upscaler::Fsrcnn;
    throw ConfigError("unknown upscaler '" + name + "'");
}

std::string upscaler_name(Upscaler u) {
    switch (u) {
        case Upscaler::None: return "none";
        case Upscaler::Nearest: return "nearest";
        case Upscaler::Bicubic: return "bicubic";
        case Upscaler::SesrM2: return "sesr_m2";
        case Upscaler::SesrM3: return "sesr_m3";
        case Upscaler::SesrM5: return "sesr_m5";
        case Upscaler::SesrXl: return "sesr_xl";
        default: return "fsrcnn";
    }
}

bool upscaler_is_network(Upscaler u) {
    return u == Upscaler::SesrM2 || u == Upscaler::SesrM3 || u == Upscaler::SesrM5 ||
           u == Upscaler::SesrXl || u == Upscaler::Fsrcnn;
}

void DefenseConfig::validate() const {
    if (jpeg_quality < 1 || jpeg_quality > 100)
        throw ConfigError("defense: jpeg quality must be in [1,100]");
    if (wavelet_enabled && levels < 1) throw ConfigError("defense: wavelet levels must be >= 1");
    if (upscaler_is_network(upscaler) && weight_path.empty())
        throw ConfigError("defense: upscaler '" + upscaler_name(upscaler) +
                          "' needs --weights with a trained network file");
}

DefensePipeline prepare_defense(const DefenseConfig& cfg) {
    cfg.validate();
    DefensePipeline pipe;
    pipe.cfg = cfg;
    if (upscaler_is_network(cfg.upscaler)) {
        LoadedNetwork loaded = load_weights(cfg.weight_path);
        const std::uint64_t expected = count_params(build_preset(upscaler_name(cfg.upscaler)));
        const std::uint64_t actual = count_params(loaded.net);
        if (expected != actual)
            throw ConfigError("defense: '" + cfg.weight_path + "' holds " +
                              std::to_string(actual) + " parameters but " +
                              upscaler_name(cfg.upscaler) + " needs " + std::to_string(expected));
        pipe.sr_net = std::move(loaded.net);
        pipe.sr_weights = std::move(loaded.store);
    }
    return pipe;
}

Tensor4 DefensePipeline::apply(const Tensor4& image) const {
    Tensor4 cur = image;
    if (cfg.jpeg_enabled) cur = jpeg_round_trip(cur, cfg.jpeg_quality);
    if (cfg.wavelet_enabled) {
        const int max_levels =
            static_cast<int>(std::floor(std::log2(std::min(cur.h, cur.w)))) - 2;
        if (cfg.levels > max_levels)
            throw ConfigError("defense: " + std::to_string(cfg.levels) +
                              " wavelet levels too deep for " + std::to_string(cur.h) + "x" +
                              std::to_string(cur.w) + " images (max " +
                              std::to_string(max_levels) + ")");
        cur = wavelet_denoise(cur, cfg.wavelet, cfg.levels);
    }
    switch (cfg.upscaler) {
        case Upscaler::None: break;
        case Upscaler::Nearest: cur = nearest_upscale(cur, 2); break;
        case Upscaler::Bicubic: cur = bicubic_upscale(cur, 2); break;
        default: cur = sr_upscale(*sr_net, *sr_weights, cur); break;
    }
    return cur;
}

Tensor4 defend(const Tensor4& image, const DefenseConfig& cfg) {
    return prepare_defense(cfg).apply(image);
}

}  // namespace sesr
