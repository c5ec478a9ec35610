#pragma once

#include "maskedit/adapters.hpp"
#include "maskedit/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace maskedit {

struct MetricReport {
    double mse = 0.0;
    double psnr_db = 0.0;
    double ssim = 0.0;
    double perceptual = 0.0;
};

// Mean squared error over all channels and pixels.
double mse(const Image& a, const Image& b);

// 10 * log10(1 / mse) with peak 1.0, capped at 100 dB (identical images).
double psnr(const Image& a, const Image& b);
inline constexpr double kPsnrCapDb = 100.0;

// Mean structural similarity: 11x11 Gaussian window (sigma 1.5), k1=0.01,
// k2=0.03, dynamic range 1.0. Windows are evaluated on fully valid positions
// only (no padding); channels are averaged. Requires min dimension >= 11.
double ssim(const Image& a, const Image& b);

// Sum over layers of (optionally masked) squared feature differences, each
// layer normalized by its feature count. Layers are weighted uniformly.
double perceptual_distance(const Image& a, const Image& b, const FeatureExtractor& fx,
                           const std::vector<Mask>* layer_masks = nullptr);

MetricReport compute_metrics(const Image& a, const Image& b, const FeatureExtractor& fx);

// One CSV row per (label, report) pair followed by an aggregate row of means.
std::string format_metric_table(const std::vector<std::pair<std::string, MetricReport>>& rows);

}  // namespace maskedit
