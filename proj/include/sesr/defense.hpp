#pragma once

#include <optional>
#include <string>

#include "sesr/models.hpp"
#include "sesr/wavelet.hpp"

namespace sesr {

enum class Upscaler { None, Nearest, Bicubic, SesrM2, SesrM3, SesrM5, SesrXl, Fsrcnn };

Upscaler upscaler_from_name(const std::string& name);
std::string upscaler_name(Upscaler u);
bool upscaler_is_network(Upscaler u);

// Preprocessing pipeline configuration. Stages always run in the order
// compression -> denoising -> upscaling.
struct DefenseConfig {
    bool jpeg_enabled = true;
    int jpeg_quality = 75;
    bool wavelet_enabled = true;
    Wavelet wavelet = Wavelet::Db2;
    int levels = 2;
    Upscaler upscaler = Upscaler::SesrM2;
    std::string weight_path;  // required for network upscalers

    void validate() const;
};

// A config with its SR network resolved, so batch callers load weights once.
struct DefensePipeline {
    DefenseConfig cfg;
    std::optional<NetworkSpec> sr_net;
    std::optional<WeightStore> sr_weights;

    Tensor4 apply(const Tensor4& image) const;
};

DefensePipeline prepare_defense(const DefenseConfig& cfg);

// One-shot convenience: prepares the pipeline and runs a single image.
Tensor4 defend(const Tensor4& image, const DefenseConfig& cfg);

}  // namespace sesr
