#pragma once

#include <string>
#include <vector>

#include "sesr/attacks.hpp"
#include "sesr/network.hpp"

namespace sesr {

// Binary network container. Little-endian throughout.
//
//   magic "SESR" | u32 version=1 | u32 layer count | u32 scale
//   per layer: u8 tag | 6 x u32 dims | payload (f32 array)
//
// Tags and dims:
//   0 conv            (c_out, c_in, kh, kw, stride, pad)            c_out*c_in*kh*kw floats
//   1 conv_transpose  (c_out, c_in, kh, kw, stride, pad|outpad<<16) as conv
//   2 relu            ()                                            none
//   3 prelu           ()                                            1 slope
//   4 depth_to_space  (block)                                       none
//   5 residual_begin  (slot id)                                     none
//   6 residual_end    (slot id, tile)                               none
//   7 avgpool2        ()                                            none
//   8 flatten         ()                                            none
//   9 dense           (out, in)                                     out*in + out floats
//  10 linear_block    (c_out, c_in, k, expansion, shortcut)         expansion*c_in*k*k + c_out*expansion
void save_weights(const std::string& path, const NetworkSpec& net, const WeightStore& store);

struct LoadedNetwork {
    NetworkSpec net;
    WeightStore store;
};
LoadedNetwork load_weights(const std::string& path);

void save_classifier(const std::string& path, const Classifier& model);
Classifier load_classifier(const std::string& path);

// Binary PPM (P6, maxval 255). Pixels map to [0,1] by /255 on read; writes
// round half away from zero.
Tensor4 read_ppm(const std::string& path);
void write_ppm(const std::string& path, const Tensor4& image);

// Directory of PPM files, one subdirectory per class (subdirectory names
// sorted give the label order).
struct Dataset {
    std::vector<LabeledImage> items;
    std::vector<std::string> class_names;
    std::vector<std::string> paths;
};
Dataset load_dataset(const std::string& dir);

// All *.ppm files directly inside a directory, sorted by name.
std::vector<Tensor4> load_image_dir(const std::string& dir, std::vector<std::string>* names = nullptr);

}  // namespace sesr
