#include "sesr/wavelet.hpp"

#include <algorithm>
#include <cmath>

namespace sesr {

Wavelet wavelet_from_name(const std::string& name) {
    if (name == "haar") return Wavelet::Haar;
    if (name == "db2") return Wavelet::Db2;
    throw ConfigError("unknown wavelet '" + name + "' (expected haar or db2)");
}

std::string wavelet_name(Wavelet w) { return w == Wavelet::Haar ? "haar" : "db2"; }

namespace {

struct FilterBank {
    std::vector<double> lo;
    std::vector<double> hi;
};

FilterBank filters(Wavelet w) {
    if (w == Wavelet::Haar) {
        const double s = 1.0 / std::sqrt(2.0);
        return {{s, s}, {s, -s}};
    }
    // Daubechies 4-tap, orthonormal
    const double r3 = std::sqrt(3.0);
    const double d = 4.0 * std::sqrt(2.0);
    std::vector<double> lo = {(1.0 + r3) / d, (3.0 + r3) / d, (3.0 - r3) / d, (1.0 - r3) / d};
    std::vector<double> hi(lo.size());
    for (std::size_t m = 0; m < lo.size(); ++m)
        hi[m] = ((m % 2 == 0) ? 1.0 : -1.0) * lo[lo.size() - 1 - m];
    return {lo, hi};
}

// Periodized analysis of one row: approx[k] = sum_m lo[m] x[(2k+m) mod n].
void analyze_row(const double* x, int n, const FilterBank& fb, double* approx, double* detail) {
    const int half = n / 2;
    const int taps = static_cast<int>(fb.lo.size());
    for (int k = 0; k < half; ++k) {
        double a = 0.0, d = 0.0;
        for (int m = 0; m < taps; ++m) {
            const double v = x[(2 * k + m) % n];
            a += fb.lo[m] * v;
            d += fb.hi[m] * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
}

// Periodized synthesis: x[t] = sum_k a[k] lo[(t-2k) mod n] + d[k] hi[(t-2k) mod n].
void synthesize_row(const double* approx, const double* detail, int n, const FilterBank& fb,
                    double* x) {
    const int half = n / 2;
    const int taps = static_cast<int>(fb.lo.size());
    std::fill(x, x + n, 0.0);
    for (int k = 0; k < half; ++k) {
        for (int m = 0; m < taps; ++m) {
            const int t = (2 * k + m) % n;
            x[t] += approx[k] * fb.lo[m] + detail[k] * fb.hi[m];
        }
    }
}

// Single-level 2-D step: rows then columns.
void dwt_step(const Plane& in, const FilterBank& fb, Plane& ll, Plane& lh, Plane& hl, Plane& hh) {
    const int h = in.h, w = in.w;
    const int hw = w / 2, hh_ = h / 2;
    Plane row_lo(h, hw), row_hi(h, hw);
    std::vector<double> a(hw), d(hw);
    for (int y = 0; y < h; ++y) {
        analyze_row(&in.data[static_cast<std::size_t>(y) * w], w, fb, a.data(), d.data());
        for (int x = 0; x < hw; ++x) {
            row_lo.at(y, x) = a[x];
            row_hi.at(y, x) = d[x];
        }
    }
    ll = Plane(hh_, hw);
    lh = Plane(hh_, hw);
    hl = Plane(hh_, hw);
    hh = Plane(hh_, hw);
    std::vector<double> col(h), ca(hh_), cd(hh_);
    for (int x = 0; x < hw; ++x) {
        for (int y = 0; y < h; ++y) col[y] = row_lo.at(y, x);
        analyze_row(col.data(), h, fb, ca.data(), cd.data());
        for (int y = 0; y < hh_; ++y) {
            ll.at(y, x) = ca[y];
            lh.at(y, x) = cd[y];
        }
        for (int y = 0; y < h; ++y) col[y] = row_hi.at(y, x);
        analyze_row(col.data(), h, fb, ca.data(), cd.data());
        for (int y = 0; y < hh_; ++y) {
            hl.at(y, x) = ca[y];
            hh.at(y, x) = cd[y];
        }
    }
}

Plane idwt_step(const Plane& ll, const Plane& lh, const Plane& hl, const Plane& hh,
                const FilterBank& fb) {
    const int hh_ = ll.h, hw = ll.w;
    const int h = hh_ * 2, w = hw * 2;
    Plane row_lo(h, hw), row_hi(h, hw);
    std::vector<double> ca(hh_), cd(hh_), col(h);
    for (int x = 0; x < hw; ++x) {
        for (int y = 0; y < hh_; ++y) {
            ca[y] = ll.at(y, x);
            cd[y] = lh.at(y, x);
        }
        synthesize_row(ca.data(), cd.data(), h, fb, col.data());
        for (int y = 0; y < h; ++y) row_lo.at(y, x) = col[y];
        for (int y = 0; y < hh_; ++y) {
            ca[y] = hl.at(y, x);
            cd[y] = hh.at(y, x);
        }
        synthesize_row(ca.data(), cd.data(), h, fb, col.data());
        for (int y = 0; y < h; ++y) row_hi.at(y, x) = col[y];
    }
    Plane out(h, w);
    std::vector<double> a(hw), d(hw), row(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < hw; ++x) {
            a[x] = row_lo.at(y, x);
            d[x] = row_hi.at(y, x);
        }
        synthesize_row(a.data(), d.data(), w, fb, row.data());
        for (int x = 0; x < w; ++x) out.at(y, x) = row[x];
    }
    return out;
}

// Symmetric (half-sample) extension up to the target extents.
Plane pad_symmetric(const Plane& in, int th, int tw) {
    Plane out(th, tw);
    auto reflect = [](int i, int n) {
        // half-sample symmetric index into [0, n)
        const int period = 2 * n;
        int j = i % period;
        if (j < 0) j += period;
        return j < n ? j : period - 1 - j;
    };
    for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x) out.at(y, x) = in.at(reflect(y, in.h), reflect(x, in.w));
    return out;
}

}  // namespace

WaveletPyramid dwt2(const Plane& plane, Wavelet wavelet, int levels) {
    if (levels < 1) throw ConfigError("dwt2: levels must be >= 1");
    const int unit = 1 << levels;
    if (unit > std::min(plane.h, plane.w))
        throw ConfigError("dwt2: " + std::to_string(levels) + " levels too deep for a " +
                          std::to_string(plane.h) + "x" + std::to_string(plane.w) + " plane");
    WaveletPyramid pyr;
    pyr.wavelet = wavelet;
    pyr.orig_h = plane.h;
    pyr.orig_w = plane.w;

    const int ph = (plane.h + unit - 1) / unit * unit;
    const int pw = (plane.w + unit - 1) / unit * unit;
    Plane cur = (ph == plane.h && pw == plane.w) ? plane : pad_symmetric(plane, ph, pw);

    const FilterBank fb = filters(wavelet);
    for (int level = 0; level < levels; ++level) {
        SubbandLevel sub;
        Plane ll;
        dwt_step(cur, fb, ll, sub.lh, sub.hl, sub.hh);
        pyr.detail.push_back(std::move(sub));
        cur = std::move(ll);
    }
    pyr.ll = std::move(cur);
    return pyr;
}

Plane idwt2(const WaveletPyramid& pyramid) {
    const FilterBank fb = filters(pyramid.wavelet);
    Plane cur = pyramid.ll;
    for (std::size_t level = pyramid.detail.size(); level-- > 0;) {
        const SubbandLevel& sub = pyramid.detail[level];
        cur = idwt_step(cur, sub.lh, sub.hl, sub.hh, fb);
    }
    if (cur.h == pyramid.orig_h && cur.w == pyramid.orig_w) return cur;
    Plane out(pyramid.orig_h, pyramid.orig_w);
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) out.at(y, x) = cur.at(y, x);
    return out;
}

double estimate_noise_sigma(const Plane& hh1) {
    if (hh1.data.empty()) throw DimensionError("estimate_noise_sigma: empty subband");
    std::vector<double> mags(hh1.data.size());
    for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::fabs(hh1.data[i]);
    std::sort(mags.begin(), mags.end());
    const std::size_t n = mags.size();
    const double median = n % 2 == 1 ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
    return median / 0.6745;
}

double soft_threshold(double value, double threshold) {
    const double mag = std::fabs(value) - threshold;
    if (mag <= 0.0) return 0.0;
    return value > 0.0 ? mag : -mag;
}

namespace {

void shrink_subband(Plane& band, double noise_var) {
    double energy = 0.0;
    for (double v : band.data) energy += v * v;
    const double second_moment = energy / static_cast<double>(band.data.size());
    const double sig_x = std::sqrt(std::max(second_moment - noise_var, 0.0));
    double t;
    if (sig_x > 0.0) {
        t = noise_var / sig_x;
    } else {
        t = 0.0;  // kill everything: threshold at the largest magnitude
        for (double v : band.data) t = std::max(t, std::fabs(v));
    }
    for (double& v : band.data) v = soft_threshold(v, t);
}

}  // namespace

Tensor4 wavelet_denoise(const Tensor4& image, Wavelet wavelet, int levels) {
    if (image.c != 3)
        throw DimensionError("wavelet_denoise: image must have 3 channels, got " +
                             std::to_string(image.c));
    Tensor4 out(image.n, image.c, image.h, image.w);
    for (int in = 0; in < image.n; ++in)
        for (int ch = 0; ch < image.c; ++ch) {
            Plane plane(image.h, image.w);
            const float* src = image.plane(in, ch);
            for (std::size_t i = 0; i < plane.data.size(); ++i) plane.data[i] = src[i];

            WaveletPyramid pyr = dwt2(plane, wavelet, levels);
            const double sigma = estimate_noise_sigma(pyr.detail[0].hh);
            const double noise_var = sigma * sigma;
            if (sigma > 0.0) {
                for (auto& level : pyr.detail) {
                    shrink_subband(level.lh, noise_var);
                    shrink_subband(level.hl, noise_var);
                    shrink_subband(level.hh, noise_var);
                }
            }
            Plane rec = idwt2(pyr);
            float* dst = out.plane(in, ch);
            for (std::size_t i = 0; i < rec.data.size(); ++i)
                dst[i] = static_cast<float>(std::min(1.0, std::max(0.0, rec.data[i])));
        }
    return out;
}

}  // namespace sesr
