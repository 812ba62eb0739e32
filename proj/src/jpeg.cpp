#include "sesr/jpeg.hpp"

#include <cmath>
#include <vector>

namespace sesr {

namespace {

constexpr int kLumaBase[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

constexpr int kChromaBase[64] = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99};

struct DctTables {
    double cosine[8][8];  // cosine[x][u] = cos((2x+1) u pi / 16)
    double alpha[8];
    DctTables() {
        for (int x = 0; x < 8; ++x)
            for (int u = 0; u < 8; ++u)
                cosine[x][u] = std::cos((2.0 * x + 1.0) * u * M_PI / 16.0);
        alpha[0] = 1.0 / std::sqrt(2.0);
        for (int u = 1; u < 8; ++u) alpha[u] = 1.0;
    }
};
const DctTables kDct;

}  // namespace

std::array<int, 64> jpeg_quant_table(int quality, bool chroma) {
    if (quality < 1 || quality > 100)
        throw ConfigError("jpeg quality must be in [1,100], got " + std::to_string(quality));
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    const int* base = chroma ? kChromaBase : kLumaBase;
    std::array<int, 64> table{};
    for (int i = 0; i < 64; ++i) {
        const int v = (base[i] * scale + 50) / 100;  // round half up
        table[i] = std::min(255, std::max(1, v));
    }
    return table;
}

void dct8x8_forward(const double* block, double* coeffs) {
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            double acc = 0.0;
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    acc += block[y * 8 + x] * kDct.cosine[y][u] * kDct.cosine[x][v];
            coeffs[u * 8 + v] = 0.25 * kDct.alpha[u] * kDct.alpha[v] * acc;
        }
}

void dct8x8_inverse(const double* coeffs, double* block) {
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            double acc = 0.0;
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v)
                    acc += kDct.alpha[u] * kDct.alpha[v] * coeffs[u * 8 + v] * kDct.cosine[y][u] *
                           kDct.cosine[x][v];
            block[y * 8 + x] = 0.25 * acc;
        }
}

namespace {

// Quantize/dequantize one plane of a padded image in place.
void process_plane(std::vector<double>& plane, int ph, int pw, const std::array<int, 64>& qt) {
    double block[64], coeffs[64];
    for (int by = 0; by < ph; by += 8)
        for (int bx = 0; bx < pw; bx += 8) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    block[y * 8 + x] = plane[static_cast<std::size_t>(by + y) * pw + bx + x] - 128.0;
            dct8x8_forward(block, coeffs);
            for (int i = 0; i < 64; ++i) {
                const double q = static_cast<double>(qt[i]);
                const double quantized = std::round(coeffs[i] / q);
                coeffs[i] = quantized * q;
            }
            dct8x8_inverse(coeffs, block);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    plane[static_cast<std::size_t>(by + y) * pw + bx + x] = block[y * 8 + x] + 128.0;
        }
}

}  // namespace

Tensor4 jpeg_round_trip(const Tensor4& image, int quality) {
    if (image.c != 3)
        throw DimensionError("jpeg_round_trip: image must have 3 channels, got " +
                             std::to_string(image.c));
    const auto luma_qt = jpeg_quant_table(quality, false);
    const auto chroma_qt = jpeg_quant_table(quality, true);

    const int h = image.h, w = image.w;
    const int ph = (h + 7) / 8 * 8;
    const int pw = (w + 7) / 8 * 8;

    Tensor4 out(image.n, 3, h, w);
    std::vector<double> planes[3];
    for (auto& p : planes) p.resize(static_cast<std::size_t>(ph) * pw);

    for (int in = 0; in < image.n; ++in) {
        // RGB (0..255) -> YCbCr, edge-replicated into padded planes
        for (int y = 0; y < ph; ++y) {
            const int sy = std::min(y, h - 1);
            for (int x = 0; x < pw; ++x) {
                const int sx = std::min(x, w - 1);
                const double r = 255.0 * image.at(in, 0, sy, sx);
                const double g = 255.0 * image.at(in, 1, sy, sx);
                const double b = 255.0 * image.at(in, 2, sy, sx);
                const std::size_t idx = static_cast<std::size_t>(y) * pw + x;
                planes[0][idx] = 0.299 * r + 0.587 * g + 0.114 * b;
                planes[1][idx] = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
                planes[2][idx] = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
            }
        }
        process_plane(planes[0], ph, pw, luma_qt);
        process_plane(planes[1], ph, pw, chroma_qt);
        process_plane(planes[2], ph, pw, chroma_qt);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t idx = static_cast<std::size_t>(y) * pw + x;
                const double yy = planes[0][idx];
                const double cb = planes[1][idx] - 128.0;
                const double cr = planes[2][idx] - 128.0;
                const double r = yy + 1.402 * cr;
                const double g = yy - 0.344136 * cb - 0.714136 * cr;
                const double b = yy + 1.772 * cb;
                out.at(in, 0, y, x) = static_cast<float>(std::min(1.0, std::max(0.0, r / 255.0)));
                out.at(in, 1, y, x) = static_cast<float>(std::min(1.0, std::max(0.0, g / 255.0)));
                out.at(in, 2, y, x) = static_cast<float>(std::min(1.0, std::max(0.0, b / 255.0)));
            }
    }
    return out;
}

}  // namespace sesr
