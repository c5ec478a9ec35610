#include "maskedit/metrics.hpp"

#include <cmath>
#include <sstream>

namespace maskedit {

double mse(const Image& a, const Image& b) {
    require_same_shape(a, b, "mse");
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) acc += (a.ch[c] - b.ch[c]).square().sum();
    return acc / (3.0 * static_cast<double>(a.height() * a.width()));
}

double psnr(const Image& a, const Image& b) {
    const double m = mse(a, b);
    if (m <= 0.0) return kPsnrCapDb;
    return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / m));
}

namespace {

// 11x11 Gaussian window, sigma 1.5, normalized
constexpr int kWin = 11;
constexpr double kSigma = 1.5;

const std::array<double, kWin>& gaussian_taps() {
    static const std::array<double, kWin> taps = [] {
        std::array<double, kWin> t{};
        double sum = 0.0;
        for (int i = 0; i < kWin; ++i) {
            const double d = i - (kWin - 1) / 2.0;
            t[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
            sum += t[i];
        }
        for (auto& v : t) v /= sum;
        return t;
    }();
    return taps;
}

double ssim_channel(const Mask& a, const Mask& b) {
    constexpr double C1 = 0.01 * 0.01;  // (k1 * L)^2, L = 1
    constexpr double C2 = 0.03 * 0.03;
    const auto& w = gaussian_taps();
    const Eigen::Index H = a.rows(), W = a.cols();
    // valid window positions only
    double total = 0.0;
    long count = 0;
    for (Eigen::Index y = 0; y + kWin <= H; ++y)
        for (Eigen::Index x = 0; x + kWin <= W; ++x) {
            double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
            for (int i = 0; i < kWin; ++i)
                for (int j = 0; j < kWin; ++j) {
                    const double wij = w[static_cast<size_t>(i)] * w[static_cast<size_t>(j)];
                    const double va = a(y + i, x + j), vb = b(y + i, x + j);
                    mu_a += wij * va;
                    mu_b += wij * vb;
                    aa += wij * va * va;
                    bb += wij * vb * vb;
                    ab += wij * va * vb;
                }
            const double var_a = aa - mu_a * mu_a;
            const double var_b = bb - mu_b * mu_b;
            const double cov = ab - mu_a * mu_b;
            total += ((2 * mu_a * mu_b + C1) * (2 * cov + C2)) /
                     ((mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2));
            ++count;
        }
    return total / static_cast<double>(count);
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim");
    if (a.height() < kWin || a.width() < kWin)
        throw ShapeError("ssim: image smaller than the 11x11 window");
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) acc += ssim_channel(a.ch[c], b.ch[c]);
    return acc / 3.0;
}

double perceptual_distance(const Image& a, const Image& b, const FeatureExtractor& fx,
                           const std::vector<Mask>* layer_masks) {
    require_same_shape(a, b, "perceptual_distance");
    if (layer_masks && static_cast<int>(layer_masks->size()) != fx.layer_count())
        throw ShapeError("perceptual_distance: expected one mask per extractor layer");
    const auto fa = fx.extract(a);
    const auto fb = fx.extract(b);
    double total = 0.0;
    for (size_t l = 0; l < fa.size(); ++l) {
        double layer_sum = 0.0;
        long numel = 0;
        for (size_t c = 0; c < fa[l].size(); ++c) {
            Mask diff = fa[l][c] - fb[l][c];
            if (layer_masks) {
                const Mask& m = (*layer_masks)[l];
                if (m.rows() != diff.rows() || m.cols() != diff.cols())
                    throw ShapeError("perceptual_distance: mask at layer " + std::to_string(l) +
                                     " does not match the feature size");
                diff *= m;
            }
            layer_sum += diff.square().sum();
            numel += diff.size();
        }
        total += layer_sum / static_cast<double>(numel);
    }
    return total;
}

MetricReport compute_metrics(const Image& a, const Image& b, const FeatureExtractor& fx) {
    MetricReport r;
    r.mse = mse(a, b);
    r.psnr_db = psnr(a, b);
    r.ssim = ssim(a, b);
    r.perceptual = perceptual_distance(a, b, fx);
    return r;
}

std::string format_metric_table(const std::vector<std::pair<std::string, MetricReport>>& rows) {
    std::ostringstream os;
    os << "image,mse,psnr_db,ssim,perceptual\n";
    os.precision(10);
    MetricReport agg;
    for (const auto& [label, r] : rows) {
        os << label << ',' << r.mse << ',' << r.psnr_db << ',' << r.ssim << ',' << r.perceptual
           << '\n';
        agg.mse += r.mse;
        agg.psnr_db += r.psnr_db;
        agg.ssim += r.ssim;
        agg.perceptual += r.perceptual;
    }
    if (!rows.empty()) {
        const double n = static_cast<double>(rows.size());
        os << "aggregate," << agg.mse / n << ',' << agg.psnr_db / n << ',' << agg.ssim / n << ','
           << agg.perceptual / n << '\n';
    }
    return os.str();
}

}  // namespace maskedit
