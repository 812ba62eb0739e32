#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sesr/attacks.hpp"

namespace sesr {

// Synthetic labeled textures for the desk-scale classifier experiments.
// Classes (label order): checker, hstripes, radial, vstripes. Each sample
// randomizes frequency, phase, brightness and color tint; structure lives in
// low frequencies so it survives compression and denoising.
std::vector<std::string> texture_class_names();
std::vector<LabeledImage> make_texture_dataset(int per_class, int size, std::uint64_t seed);
void write_texture_dataset(const std::string& dir, int per_class, int size, std::uint64_t seed);

// Smooth multi-blob color images standing in for a natural-image corpus for
// SR training and evaluation.
std::vector<Tensor4> make_natural_images(int count, int h, int w, std::uint64_t seed);
void write_image_corpus(const std::string& dir, int count, int h, int w, std::uint64_t seed);

}  // namespace sesr
