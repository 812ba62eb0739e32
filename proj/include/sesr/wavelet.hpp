#pragma once

#include <vector>

#include "sesr/tensor.hpp"

namespace sesr {

enum class Wavelet { Haar, Db2 };

Wavelet wavelet_from_name(const std::string& name);  // "haar" | "db2"
std::string wavelet_name(Wavelet w);

// One image plane, doubles for transform precision.
struct Plane {
    int h = 0, w = 0;
    std::vector<double> data;
    Plane() = default;
    Plane(int h_, int w_) : h(h_), w(w_), data(static_cast<std::size_t>(h_) * w_, 0.0) {}
    double& at(int y, int x) { return data[static_cast<std::size_t>(y) * w + x]; }
    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * w + x]; }
};

// Detail subbands of one decomposition level. Level 1 is the finest.
struct SubbandLevel {
    Plane lh, hl, hh;
};

struct WaveletPyramid {
    Wavelet wavelet = Wavelet::Haar;
    int orig_h = 0, orig_w = 0;  // pre-padding extents, for idwt2 cropping
    Plane ll;                    // coarsest approximation
    std::vector<SubbandLevel> detail;  // detail[0] = level 1 (finest)
};

// Periodized orthonormal separable 2-D DWT. Planes whose extents are not
// divisible by 2^levels are first padded by symmetric extension; idwt2 crops
// back, so dwt2 -> idwt2 reproduces the input exactly either way.
WaveletPyramid dwt2(const Plane& plane, Wavelet wavelet, int levels);
Plane idwt2(const WaveletPyramid& pyramid);

// Robust noise estimate from the finest diagonal subband:
// median(|HH1|) / 0.6745.
double estimate_noise_sigma(const Plane& hh1);

double soft_threshold(double value, double threshold);

// Per-channel wavelet shrinkage: estimates the noise level from HH1, then
// soft-thresholds every detail subband with t = sigma_n^2 / sigma_x where
// sigma_x^2 = max(E[c^2] - sigma_n^2, 0) (t = max|c| when sigma_x = 0).
// The approximation band is untouched. Output clamped to [0,1].
Tensor4 wavelet_denoise(const Tensor4& image, Wavelet wavelet, int levels);

}  // namespace sesr
