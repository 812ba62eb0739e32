#include "sesr/synth.hpp"

#include <cmath>
#include <filesystem>

#include "sesr/io.hpp"

namespace fs = std::filesystem;

namespace sesr {

namespace {

constexpr double kPi = 3.14159265358979323846;

float clamp_pixel(double v) {
    return static_cast<float>(std::min(0.98, std::max(0.02, v)));
}

}  // namespace

std::vector<std::string> texture_class_names() {
    return {"checker", "hstripes", "radial", "vstripes"};
}

std::vector<LabeledImage> make_texture_dataset(int per_class, int size, std::uint64_t seed) {
    if (per_class <= 0 || size <= 0) throw ConfigError("texture dataset: bad per_class/size");
    std::vector<LabeledImage> out;
    const int classes = 4;
    for (int label = 0; label < classes; ++label) {
        for (int i = 0; i < per_class; ++i) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label) * 100000 + i));
            const double freq = 2.0 + 3.0 * rng.next_double();
            const double phase = 2.0 * kPi * rng.next_double();
            const double phase2 = 2.0 * kPi * rng.next_double();
            const double base = 0.4 + 0.2 * rng.next_double();
            // pattern amplitude a few times the usual attack budget: large
            // enough to survive compression and denoising, small enough that
            // bounded perturbations matter
            const double amp = 0.05 + 0.06 * rng.next_double();
            const double cy = size * (0.3 + 0.4 * rng.next_double());
            const double cx = size * (0.3 + 0.4 * rng.next_double());
            double tint[3];
            for (auto& t : tint) t = 0.9 + 0.2 * rng.next_double();

            LabeledImage item;
            item.label = label;
            item.image = Tensor4(1, 3, size, size);
            for (int y = 0; y < size; ++y)
                for (int x = 0; x < size; ++x) {
                    double pattern = 0.0;
                    const double fy = 2.0 * kPi * freq * y / size;
                    const double fx = 2.0 * kPi * freq * x / size;
                    switch (label) {
                        case 0: pattern = std::sin(fy + phase) * std::sin(fx + phase2); break;
                        case 1: pattern = std::sin(fy + phase); break;
                        case 2: {
                            const double r = std::hypot(y - cy, x - cx);
                            pattern = std::cos(2.0 * kPi * freq * r / size + phase);
                            break;
                        }
                        default: pattern = std::sin(fx + phase); break;
                    }
                    const double v = base + amp * pattern;
                    const double noise = 0.015 * (rng.next_double() - 0.5);
                    for (int c = 0; c < 3; ++c)
                        item.image.at(0, c, y, x) = clamp_pixel(v * tint[c] + noise);
                }
            out.push_back(std::move(item));
        }
    }
    return out;
}

void write_texture_dataset(const std::string& dir, int per_class, int size, std::uint64_t seed) {
    const auto names = texture_class_names();
    const auto items = make_texture_dataset(per_class, size, seed);
    for (const auto& name : names) fs::create_directories(fs::path(dir) / name);
    std::vector<int> counters(names.size(), 0);
    for (const auto& item : items) {
        char file[32];
        std::snprintf(file, sizeof(file), "img_%04d.ppm", counters[item.label]++);
        write_ppm((fs::path(dir) / names[item.label] / file).string(), item.image);
    }
}

std::vector<Tensor4> make_natural_images(int count, int h, int w, std::uint64_t seed) {
    if (count <= 0 || h <= 0 || w <= 0) throw ConfigError("image corpus: bad count/extents");
    std::vector<Tensor4> out;
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, 0xb10b + i));
        Tensor4 img(1, 3, h, w);
        // background gradient
        double g0[3], gy[3], gx[3];
        for (int c = 0; c < 3; ++c) {
            g0[c] = 0.25 + 0.5 * rng.next_double();
            gy[c] = 0.3 * (rng.next_double() - 0.5) / h;
            gx[c] = 0.3 * (rng.next_double() - 0.5) / w;
        }
        struct Blob {
            double cy, cx, radius, color[3];
        };
        std::vector<Blob> blobs(4 + static_cast<int>(rng.next_below(5)));
        for (auto& b : blobs) {
            b.cy = h * rng.next_double();
            b.cx = w * rng.next_double();
            b.radius = (0.06 + 0.18 * rng.next_double()) * std::min(h, w);
            for (auto& c : b.color) c = 0.8 * (rng.next_double() - 0.5);
        }
        const double wf = 2.0 * kPi * (1.0 + 3.0 * rng.next_double());
        const double wp = 2.0 * kPi * rng.next_double();
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double v[3];
                for (int c = 0; c < 3; ++c) v[c] = g0[c] + gy[c] * y + gx[c] * x;
                for (const auto& b : blobs) {
                    const double d2 = (y - b.cy) * (y - b.cy) + (x - b.cx) * (x - b.cx);
                    const double fall = std::exp(-d2 / (2.0 * b.radius * b.radius));
                    for (int c = 0; c < 3; ++c) v[c] += b.color[c] * fall;
                }
                const double ripple = 0.04 * std::sin(wf * (y + x) / (h + w) + wp);
                for (int c = 0; c < 3; ++c)
                    img.at(0, c, y, x) = clamp_pixel(v[c] + ripple);
            }
        out.push_back(std::move(img));
    }
    return out;
}

void write_image_corpus(const std::string& dir, int count, int h, int w, std::uint64_t seed) {
    fs::create_directories(dir);
    const auto images = make_natural_images(count, h, w, seed);
    for (std::size_t i = 0; i < images.size(); ++i) {
        char file[32];
        std::snprintf(file, sizeof(file), "img_%04zu.ppm", i);
        write_ppm((fs::path(dir) / file).string(), images[i]);
    }
}

}  // namespace sesr
