#pragma once

#include "sesr/tensor.hpp"

namespace sesr {

// Pixel replication; each source pixel becomes a scale x scale block.
Tensor4 nearest_upscale(const Tensor4& image, int scale = 2);

// Separable cubic convolution (Catmull-Rom family, a = -0.5), edge clamped,
// output clamped to [0,1]. Sampling grid uses centered pixel coordinates.
Tensor4 bicubic_upscale(const Tensor4& image, int scale = 2);

// Same kernel, decimating grid. Used to synthesize LR halves of training and
// evaluation pairs (input extents must be even).
Tensor4 bicubic_downscale(const Tensor4& image, int scale = 2);

}  // namespace sesr
