#pragma once

#include <array>

#include "sesr/tensor.hpp"

namespace sesr {

// Quantization table for the given quality (1..100), scaled from the
// standard luminance/chrominance base tables: scale = 5000/q for q < 50,
// else 200 - 2q; entry = clamp(round(base*scale/100), 1, 255).
std::array<int, 64> jpeg_quant_table(int quality, bool chroma);

// Orthonormal 8x8 DCT-II and its inverse, row-major blocks.
void dct8x8_forward(const double* block, double* coeffs);
void dct8x8_inverse(const double* coeffs, double* block);

// Pixel-exact JPEG compression round trip: RGB -> YCbCr (BT.601 full range),
// per 8x8 block DCT / quantize / dequantize / inverse DCT, back to RGB,
// clamped to [0,1]. No chroma subsampling; entropy coding omitted since it
// does not change pixels. Edge blocks are padded by edge replication.
Tensor4 jpeg_round_trip(const Tensor4& image, int quality);

}  // namespace sesr
