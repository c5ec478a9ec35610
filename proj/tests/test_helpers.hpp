#pragma once

#include "maskedit/core.hpp"
#include "maskedit/latent.hpp"
#include "maskedit/rng.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace maskedit::test {

inline Mask random_mask(Rng& rng, Eigen::Index h, Eigen::Index w, double lo = 0.0, double hi = 1.0) {
    Mask m(h, w);
    for (Eigen::Index r = 0; r < h; ++r)
        for (Eigen::Index c = 0; c < w; ++c) m(r, c) = rng.uniform(lo, hi);
    return m;
}

inline Image random_image(Rng& rng, Eigen::Index h, Eigen::Index w, double lo = 0.0, double hi = 1.0) {
    Image img;
    for (auto& c : img.ch) c = random_mask(rng, h, w, lo, hi);
    return img;
}

// relative error with an absolute floor for near-zero gradients
inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

// central finite difference of a scalar function of one coordinate
inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// ---- independent loop oracles (deliberately simple, no shared code paths) ----

inline double oracle_mse(const Image& a, const Image& b) {
    double acc = 0.0;
    long n = 0;
    for (int c = 0; c < 3; ++c)
        for (Eigen::Index y = 0; y < a.height(); ++y)
            for (Eigen::Index x = 0; x < a.width(); ++x) {
                const double d = a.ch[c](y, x) - b.ch[c](y, x);
                acc += d * d;
                ++n;
            }
    return acc / static_cast<double>(n);
}

inline double oracle_psnr(const Image& a, const Image& b) {
    const double m = oracle_mse(a, b);
    if (m <= 0.0) return 100.0;
    return std::min(100.0, 10.0 * std::log10(1.0 / m));
}

// plain double-loop SSIM: 11x11 Gaussian window (sigma 1.5), valid positions
inline double oracle_ssim(const Image& a, const Image& b) {
    constexpr int W = 11;
    double taps[W];
    double tsum = 0.0;
    for (int i = 0; i < W; ++i) {
        const double d = i - 5.0;
        taps[i] = std::exp(-d * d / 4.5);
        tsum += taps[i];
    }
    for (auto& t : taps) t /= tsum;
    const double C1 = 1e-4, C2 = 9e-4;
    double channel_acc = 0.0;
    for (int c = 0; c < 3; ++c) {
        double total = 0.0;
        long count = 0;
        for (Eigen::Index y = 0; y + W <= a.height(); ++y)
            for (Eigen::Index x = 0; x + W <= a.width(); ++x) {
                double ma = 0, mb = 0, aa = 0, bb = 0, ab = 0;
                for (int i = 0; i < W; ++i)
                    for (int j = 0; j < W; ++j) {
                        const double wij = taps[i] * taps[j];
                        const double va = a.ch[c](y + i, x + j);
                        const double vb = b.ch[c](y + i, x + j);
                        ma += wij * va;
                        mb += wij * vb;
                        aa += wij * va * va;
                        bb += wij * vb * vb;
                        ab += wij * va * vb;
                    }
                total += ((2 * ma * mb + C1) * (2 * (ab - ma * mb) + C2)) /
                         ((ma * ma + mb * mb + C1) * ((aa - ma * ma) + (bb - mb * mb) + C2));
                ++count;
            }
        channel_acc += total / static_cast<double>(count);
    }
    return channel_acc / 3.0;
}

// brute-force block averaging (independent of downscale_area)
inline Mask oracle_block_average(const Mask& m, int factor) {
    Mask out = Mask::Zero(m.rows() / factor, m.cols() / factor);
    for (Eigen::Index y = 0; y < out.rows(); ++y)
        for (Eigen::Index x = 0; x < out.cols(); ++x) {
            double acc = 0.0;
            for (int i = 0; i < factor; ++i)
                for (int j = 0; j < factor; ++j) acc += m(y * factor + i, x * factor + j);
            out(y, x) = acc / (factor * factor);
        }
    return out;
}

// brute-force pyramid regularizer (independent loops, circular shifts)
inline double oracle_noise_reg_channel(Mask lv) {
    double total = 0.0;
    while (true) {
        const Eigen::Index h = lv.rows(), w = lv.cols();
        double sx = 0.0, sy = 0.0;
        for (Eigen::Index y = 0; y < h; ++y)
            for (Eigen::Index x = 0; x < w; ++x) {
                sx += lv(y, x) * lv(y, (x + w - 1) % w);
                sy += lv(y, x) * lv((y + h - 1) % h, x);
            }
        sx /= static_cast<double>(h * w);
        sy /= static_cast<double>(h * w);
        total += sx * sx + sy * sy;
        if (h <= 8 || w <= 8) break;
        lv = oracle_block_average(lv, 2);
    }
    return total;
}

inline std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace maskedit::test
