#pragma once

#include <cstdint>
#include <string>

#include "sesr/network.hpp"

namespace sesr {

// 2x SR network family: 5x5 head, m 3x3 body layers, 5x5 tail into a pixel
// shuffle. Presets: M2 (m=2, f=16), M3 (3,16), M5 (5,16), XL (11,32).
struct SesrConfig {
    int body_layers = 2;   // m
    int channels = 16;     // f
    int expansion = 64;    // p, expanded form only
    int scale = 2;
    ActKind activation = ActKind::Relu;

    static SesrConfig m2() { return {2, 16, 64, 2, ActKind::Relu}; }
    static SesrConfig m3() { return {3, 16, 64, 2, ActKind::Relu}; }
    static SesrConfig m5() { return {5, 16, 64, 2, ActKind::Relu}; }
    static SesrConfig xl() { return {11, 32, 64, 2, ActKind::Relu}; }
};

enum class NetForm { Expanded, Collapsed };

NetworkSpec build_sesr(const SesrConfig& cfg, NetForm form);

// Plain feed-forward 2x SR baseline: 5x5 (3->56), 1x1 (56->12), four 3x3
// (12->12), 1x1 (12->56), 9x9 transposed conv (56->3, stride 2).
NetworkSpec build_fsrcnn();

// Named preset lookup: sesr_m2 | sesr_m3 | sesr_m5 | sesr_xl | fsrcnn,
// collapsed/plain inference form. Throws ConfigError for unknown names.
NetworkSpec build_preset(const std::string& name);

// Total parameter array length over all layers (prelu slopes count).
std::uint64_t count_params(const NetworkSpec& net);

// Multiply-accumulate count for one forward pass at the given input size.
// Convs cost kh*kw*c_in*c_out*H_out*W_out at their *output* resolution;
// activations, residual adds and pixel shuffles are free.
std::uint64_t count_macs(const NetworkSpec& net, int input_h, int input_w);

// Runs a 3-channel [0,1] image through the net and clamps the result to
// [0,1]. Output is (n, 3, scale*h, scale*w).
Tensor4 sr_upscale(const NetworkSpec& net, const WeightStore& store, const Tensor4& image);

}  // namespace sesr
