#include "maskedit/toy_models.hpp"

#include <json.hpp>

#include <cmath>

namespace maskedit {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// sigmoid of z/tau and its derivative w.r.t. z
double sig(double z, double tau) { return logistic(z / tau); }
double sig_d(double z, double tau) {
    const double s = logistic(z / tau);
    return s * (1.0 - s) / tau;
}

// bilinear resize of a small grid to r x r, corners aligned
Mask bilinear_up(const Mask& coarse, int r) {
    Mask out(r, r);
    const double sy = static_cast<double>(coarse.rows() - 1) / (r - 1);
    const double sx = static_cast<double>(coarse.cols() - 1) / (r - 1);
    for (int y = 0; y < r; ++y) {
        const double fy = y * sy;
        const Eigen::Index y0 = static_cast<Eigen::Index>(fy);
        const Eigen::Index y1 = std::min<Eigen::Index>(y0 + 1, coarse.rows() - 1);
        const double ty = fy - static_cast<double>(y0);
        for (int x = 0; x < r; ++x) {
            const double fx = x * sx;
            const Eigen::Index x0 = static_cast<Eigen::Index>(fx);
            const Eigen::Index x1 = std::min<Eigen::Index>(x0 + 1, coarse.cols() - 1);
            const double tx = fx - static_cast<double>(x0);
            out(y, x) = coarse(y0, x0) * (1 - ty) * (1 - tx) + coarse(y0, x1) * (1 - ty) * tx +
                        coarse(y1, x0) * ty * (1 - tx) + coarse(y1, x1) * ty * tx;
        }
    }
    return out;
}

Mask smooth_field(Rng& rng, int r, double amplitude) {
    Mask coarse(4, 4);
    for (Eigen::Index y = 0; y < 4; ++y)
        for (Eigen::Index x = 0; x < 4; ++x) coarse(y, x) = rng.normal();
    return amplitude * bilinear_up(coarse, r);
}

// mean-removed noise: n - up(blockmean2(n)); self-adjoint
Mask highpass(const Mask& n) { return n - upsample_nearest2(block_mean_down2(n)); }

constexpr int kSize = ToyGenerator::kSize;

std::vector<Mask> base_patterns() {
    const int H = kSize, W = kSize;
    auto plateau = [&](double cy, double cx, double r, double s) {
        Mask m(H, W);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                m(y, x) = sig(r - std::sqrt((y - cy) * (y - cy) + (x - cx) * (x - cx)), s);
        return m;
    };
    auto edge = [](double v, double lo, double hi, double s) {
        return sig(v - lo, s) * sig(hi - v, s);
    };
    Mask dc = Mask::Constant(H, W, 1.0);
    Mask blob_left = plateau(14.0, 9.0, 5.5, 2.4);
    Mask blob_right = plateau(14.0, 23.0, 5.5, 2.4);
    Mask hair(H, W), border(H, W), vshade(H, W);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            hair(y, x) = edge(y, 2.5, 6.5, 0.8) * edge(x, 2.5, 29.5, 0.8);
            border(y, x) = 1.0 - edge(y, 2.0, 29.5, 0.7) * edge(x, 2.0, 29.5, 0.7);
            vshade(y, x) = 2.0 * y / (H - 1.0) - 1.0;
        }
    return {dc, blob_left, blob_right, hair, border, vshade};
}

constexpr double kGainAmplitude = 0.08;
constexpr double kBiasAmplitude = 0.02;
constexpr double kNoiseCouplingBase = 0.09;
constexpr int kStageRes[4] = {8, 16, 32, 32};

}  // namespace

struct ToyGenerator::Trace {
    // pre-modulation features and (1 + gain) fields, per style layer
    std::array<std::vector<Mask>, kLayers> pre_mod;
    std::array<std::vector<Mask>, kLayers> gain1;
    std::array<Mask, 3> pre_clamp;
    Image image;
};

ToyGenerator::ToyGenerator(std::uint64_t seed) {
    const auto patterns = base_patterns();
    std::vector<Mask> p16, p8;
    for (const auto& p : patterns) p16.push_back(block_mean_down2(p));
    for (const auto& p : p16) p8.push_back(block_mean_down2(p));
    // telescoped details: summing them through nearest upsampling recovers the
    // full-resolution patterns exactly
    detail_[0] = p8;
    for (int c = 0; c < kChannels; ++c) {
        detail_[1].push_back(p16[c] - upsample_nearest2(p8[c]));
        detail_[2].push_back(patterns[c] - upsample_nearest2(p16[c]));
    }

    // draw order is fixed: per layer all gain fields (channel-major), then all
    // bias fields, then noise couplings, then the latent mean
    Rng rng(seed);
    for (int i = 0; i < kLayers; ++i) {
        gain_[i].resize(kChannels);
        bias_[i].resize(kChannels);
        for (int c = 0; c < kChannels; ++c) {
            gain_[i][c].reserve(kStyleDim);
            for (int d = 0; d < kStyleDim; ++d)
                gain_[i][c].push_back(smooth_field(rng, kStageRes[i], kGainAmplitude));
        }
        for (int c = 0; c < kChannels; ++c) {
            bias_[i][c].reserve(kStyleDim);
            for (int d = 0; d < kStyleDim; ++d)
                bias_[i][c].push_back(smooth_field(rng, kStageRes[i], kBiasAmplitude));
        }
    }
    for (int s = 0; s < kNoiseChannels; ++s)
        for (int c = 0; c < kChannels; ++c)
            noise_coupling_[s][c] = kNoiseCouplingBase * (0.5 + 0.5 * rng.uniform());
    latent_mean_.resize(kLayers, kStyleDim);
    for (int i = 0; i < kLayers; ++i)
        for (int d = 0; d < kStyleDim; ++d) latent_mean_(i, d) = 0.3 * (2.0 * rng.uniform() - 1.0);

    to_rgb_ <<  // dc   blobL  blobR  hair  border vshade
        0.55,  0.27, -0.10, -0.10, -0.40, 0.04,
        0.55, -0.05, -0.05,  0.25, -0.40, 0.04,
        0.55, -0.10,  0.27, -0.10, -0.40, 0.04;
}

void Generator::check_inputs(const LatentCode& w, const NoiseStack& n) const {
    if (w.layer_count() != latent_layer_count() || w.style_dim() != style_dim())
        throw ShapeError("generate: latent code is " + std::to_string(w.layer_count()) + "x" +
                         std::to_string(w.style_dim()) + ", generator expects " +
                         std::to_string(latent_layer_count()) + "x" + std::to_string(style_dim()));
    const auto& res = noise_resolutions();
    if (n.channels.size() != res.size())
        throw ShapeError("generate: expected " + std::to_string(res.size()) + " noise channels, got " +
                         std::to_string(n.channels.size()));
    for (size_t i = 0; i < res.size(); ++i)
        if (n.channels[i].rows() != res[i].first || n.channels[i].cols() != res[i].second)
            throw ShapeError("generate: noise channel " + std::to_string(i) + " is " +
                             std::to_string(n.channels[i].rows()) + "x" +
                             std::to_string(n.channels[i].cols()) + ", expected " +
                             std::to_string(res[i].first) + "x" + std::to_string(res[i].second));
}

void ToyGenerator::forward(const LatentCode& w, const NoiseStack& n, Trace& t) const {
    check_inputs(w, n);
    std::vector<Mask> F = detail_[0];
    for (int layer = 0; layer < kLayers; ++layer) {
        const int stage = std::min(layer, 2);
        if (layer > 0 && layer < 3) {
            for (int c = 0; c < kChannels; ++c) F[c] = upsample_nearest2(F[c]) + detail_[layer][c];
        }
        t.pre_mod[layer] = F;
        t.gain1[layer].resize(kChannels);
        for (int c = 0; c < kChannels; ++c) {
            Mask gain = Mask::Zero(kStageRes[layer], kStageRes[layer]);
            Mask bias = Mask::Zero(kStageRes[layer], kStageRes[layer]);
            for (int d = 0; d < kStyleDim; ++d) {
                gain += w.styles(layer, d) * gain_[layer][c][d];
                bias += w.styles(layer, d) * bias_[layer][c][d];
            }
            t.gain1[layer][c] = 1.0 + gain;
            F[c] = F[c] * t.gain1[layer][c] + bias;
        }
        if (layer < 3) {
            const Mask hp = highpass(n.channels[static_cast<size_t>(stage)]);
            for (int c = 0; c < kChannels; ++c) F[c] += noise_coupling_[stage][c] * hp;
        }
    }
    for (int o = 0; o < 3; ++o) {
        Mask acc = Mask::Zero(kSize, kSize);
        for (int c = 0; c < kChannels; ++c) acc += to_rgb_(o, c) * F[c];
        t.pre_clamp[o] = acc;
        t.image.ch[o] = acc.min(1.0).max(0.0);
    }
}

Image ToyGenerator::generate(const LatentCode& w, const NoiseStack& n) const {
    Trace t;
    forward(w, n, t);
    return t.image;
}

void ToyGenerator::generate_grad(const LatentCode& w, const NoiseStack& n, const Image& image_grad,
                                 LatentCode* w_grad, NoiseStack* n_grad) const {
    Trace t;
    forward(w, n, t);

    if (w_grad) w_grad->styles = Eigen::MatrixXd::Zero(kLayers, kStyleDim);
    if (n_grad) *n_grad = NoiseStack::zeros(noise_res_);

    // clamp: pass-through strictly inside (0,1)
    std::array<Mask, 3> g_pre;
    for (int o = 0; o < 3; ++o) {
        g_pre[o] = image_grad.ch[o];
        for (Eigen::Index r = 0; r < kSize; ++r)
            for (Eigen::Index c = 0; c < kSize; ++c)
                if (t.pre_clamp[o](r, c) <= 0.0 || t.pre_clamp[o](r, c) >= 1.0) g_pre[o](r, c) = 0.0;
    }

    // feature->RGB adjoint
    std::vector<Mask> gF(kChannels);
    for (int c = 0; c < kChannels; ++c) {
        gF[c] = Mask::Zero(kSize, kSize);
        for (int o = 0; o < 3; ++o) gF[c] += to_rgb_(o, c) * g_pre[o];
    }

    for (int layer = kLayers - 1; layer >= 0; --layer) {
        const int stage = std::min(layer, 2);
        // noise injection happened after modulation for layers 0..2
        if (layer < 3 && n_grad) {
            Mask acc = Mask::Zero(kStageRes[layer], kStageRes[layer]);
            for (int c = 0; c < kChannels; ++c) acc += noise_coupling_[stage][c] * gF[c];
            n_grad->channels[static_cast<size_t>(stage)] += highpass(acc);
        }
        // modulation: Y = X * (1+G) + B with G,B linear in w[layer]
        if (w_grad) {
            for (int d = 0; d < kStyleDim; ++d) {
                double acc = 0.0;
                for (int c = 0; c < kChannels; ++c)
                    acc += (gF[c] * (t.pre_mod[layer][c] * gain_[layer][c][d] + bias_[layer][c][d]))
                               .sum();
                w_grad->styles(layer, d) += acc;
            }
        }
        for (int c = 0; c < kChannels; ++c) gF[c] *= t.gain1[layer][c];
        // undo the upsample that fed this layer (layers 1 and 2)
        if (layer > 0 && layer < 3)
            for (int c = 0; c < kChannels; ++c) gF[c] = block_sum_down2(gF[c]);
    }
}

LatentCode ToyGenerator::sample_latent(Rng& rng) const {
    LatentCode w(kLayers, kStyleDim);
    for (int i = 0; i < kLayers; ++i)
        for (int d = 0; d < kStyleDim; ++d)
            w.styles(i, d) = latent_mean_(i, d) + kLatentSigma * rng.normal();
    return w;
}

// ---------------------------------------------------------------------------

ToyClassifier::ToyClassifier() {
    names_ = {"left_blob_bright", "right_blob_bright"};
    regions_ = {{0, 11, 18, 6, 13}, {2, 11, 18, 20, 27}};
}

Eigen::VectorXd ToyClassifier::classify(const Image& image) const {
    Eigen::VectorXd probs(static_cast<Eigen::Index>(regions_.size()));
    for (size_t k = 0; k < regions_.size(); ++k) {
        const auto& rg = regions_[k];
        if (rg.r1 > image.height() || rg.c1 > image.width())
            throw ShapeError("classify: image smaller than attribute region");
        probs[static_cast<Eigen::Index>(k)] =
            image.ch[rg.channel].block(rg.r0, rg.c0, rg.r1 - rg.r0, rg.c1 - rg.c0).mean();
    }
    return probs;
}

Image ToyClassifier::classify_grad(const Image& image, const Eigen::VectorXd& probs_grad) const {
    if (probs_grad.size() != static_cast<Eigen::Index>(regions_.size()))
        throw ShapeError("classify_grad: gradient size mismatch");
    Image g = Image::zeros(image.height(), image.width());
    for (size_t k = 0; k < regions_.size(); ++k) {
        const auto& rg = regions_[k];
        const double inv = 1.0 / static_cast<double>((rg.r1 - rg.r0) * (rg.c1 - rg.c0));
        g.ch[rg.channel].block(rg.r0, rg.c0, rg.r1 - rg.r0, rg.c1 - rg.c0) +=
            probs_grad[static_cast<Eigen::Index>(k)] * inv;
    }
    return g;
}

// ---------------------------------------------------------------------------

ToyParser::ToyParser() { names_ = {"background", "skin", "hair", "blob_a", "blob_b"}; }

RegionMap ToyParser::parse(const Image& image) const {
    const Eigen::Index H = image.height(), W = image.width();
    RegionMap out;
    out.names = names_;
    out.channels.assign(names_.size(), Mask(H, W));
    for (Eigen::Index y = 0; y < H; ++y)
        for (Eigen::Index x = 0; x < W; ++x) {
            const double R = image.ch[0](y, x), G = image.ch[1](y, x), B = image.ch[2](y, x);
            const double luma = (R + G + B) / 3.0;
            out.channels[0](y, x) = sig(kDarkThreshold - luma, kCrispTau);
            out.channels[2](y, x) = sig(G - kHairThreshold, kWideTau);
            out.channels[3](y, x) = sig(R - kBlobThreshold, kWideTau);
            out.channels[4](y, x) = sig(B - kBlobThreshold, kWideTau);
            out.channels[1](y, x) = sig(luma - kDarkThreshold, kCrispTau) *
                                    sig(kBlobThreshold - R, kCrispTau) *
                                    sig(kBlobThreshold - B, kCrispTau) *
                                    sig(kHairThreshold - G, kCrispTau);
        }
    return out;
}

Image ToyParser::parse_grad(const Image& image, const RegionMap& map_grad) const {
    if (map_grad.channels.size() != names_.size())
        throw ShapeError("parse_grad: expected " + std::to_string(names_.size()) + " channels");
    const Eigen::Index H = image.height(), W = image.width();
    Image g = Image::zeros(H, W);
    for (Eigen::Index y = 0; y < H; ++y)
        for (Eigen::Index x = 0; x < W; ++x) {
            const double R = image.ch[0](y, x), G = image.ch[1](y, x), B = image.ch[2](y, x);
            const double luma = (R + G + B) / 3.0;
            const double g_bg = map_grad.channels[0](y, x);
            const double g_skin = map_grad.channels[1](y, x);
            const double g_hair = map_grad.channels[2](y, x);
            const double g_ba = map_grad.channels[3](y, x);
            const double g_bb = map_grad.channels[4](y, x);

            double dR = 0.0, dG = 0.0, dB = 0.0;
            // background = sig(dark - luma)
            const double d_bg = -sig_d(kDarkThreshold - luma, kCrispTau) / 3.0;
            dR += g_bg * d_bg;
            dG += g_bg * d_bg;
            dB += g_bg * d_bg;
            // single-channel bands
            dG += g_hair * sig_d(G - kHairThreshold, kWideTau);
            dR += g_ba * sig_d(R - kBlobThreshold, kWideTau);
            dB += g_bb * sig_d(B - kBlobThreshold, kWideTau);
            // skin = a * b1 * b2 * b3
            const double a = sig(luma - kDarkThreshold, kCrispTau);
            const double b1 = sig(kBlobThreshold - R, kCrispTau);
            const double b2 = sig(kBlobThreshold - B, kCrispTau);
            const double b3 = sig(kHairThreshold - G, kCrispTau);
            const double da = sig_d(luma - kDarkThreshold, kCrispTau) / 3.0;
            dR += g_skin * (da * b1 * b2 * b3 - a * sig_d(kBlobThreshold - R, kCrispTau) * b2 * b3);
            dB += g_skin * (da * b1 * b2 * b3 - a * b1 * sig_d(kBlobThreshold - B, kCrispTau) * b3);
            dG += g_skin * (da * b1 * b2 * b3 - a * b1 * b2 * sig_d(kHairThreshold - G, kCrispTau));

            g.ch[0](y, x) += dR;
            g.ch[1](y, x) += dG;
            g.ch[2](y, x) += dB;
        }
    return g;
}

// ---------------------------------------------------------------------------

ToyFeatureExtractor::ToyFeatureExtractor(std::uint64_t seed) {
    Rng rng(seed);
    kernels_.resize(scales_.size());
    for (auto& layer : kernels_)
        for (auto& out : layer)
            for (auto& in : out)
                for (auto& tap : in) tap = 0.3 * rng.normal();
}

std::vector<std::vector<Mask>> ToyFeatureExtractor::extract(const Image& image) const {
    std::vector<std::vector<Mask>> feats;
    feats.reserve(scales_.size());
    for (size_t l = 0; l < scales_.size(); ++l) {
        std::array<Mask, 3> x;
        for (int c = 0; c < 3; ++c) x[c] = downscale_area(image.ch[c], scales_[l]);
        const Eigen::Index H = x[0].rows(), W = x[0].cols();
        std::vector<Mask> layer;
        for (int o = 0; o < kOutChannels; ++o) {
            Mask f(H, W);
            for (Eigen::Index y = 0; y < H; ++y)
                for (Eigen::Index xx = 0; xx < W; ++xx) {
                    double acc = 0.0;
                    for (int c = 0; c < 3; ++c)
                        for (int dy = -1; dy <= 1; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                const Eigen::Index yy = y + dy, xc = xx + dx;
                                if (yy < 0 || yy >= H || xc < 0 || xc >= W) continue;
                                acc += kernels_[l][o][c][(dy + 1) * 3 + (dx + 1)] * x[c](yy, xc);
                            }
                    f(y, xx) = std::tanh(acc);
                }
            layer.push_back(std::move(f));
        }
        feats.push_back(std::move(layer));
    }
    return feats;
}

Image ToyFeatureExtractor::extract_grad(const Image& image,
                                        const std::vector<std::vector<Mask>>& feature_grads) const {
    if (feature_grads.size() != scales_.size())
        throw ShapeError("extract_grad: expected one gradient stack per layer");
    const auto feats = extract(image);
    Image g = Image::zeros(image.height(), image.width());
    for (size_t l = 0; l < scales_.size(); ++l) {
        std::array<Mask, 3> x;
        for (int c = 0; c < 3; ++c) x[c] = downscale_area(image.ch[c], scales_[l]);
        const Eigen::Index H = x[0].rows(), W = x[0].cols();
        std::array<Mask, 3> gx{Mask::Zero(H, W), Mask::Zero(H, W), Mask::Zero(H, W)};
        for (int o = 0; o < kOutChannels; ++o) {
            const Mask& gf = feature_grads[l][static_cast<size_t>(o)];
            if (gf.rows() != H || gf.cols() != W)
                throw ShapeError("extract_grad: gradient shape mismatch at layer " + std::to_string(l));
            for (Eigen::Index y = 0; y < H; ++y)
                for (Eigen::Index xx = 0; xx < W; ++xx) {
                    const double t = feats[l][static_cast<size_t>(o)](y, xx);
                    const double gpre = gf(y, xx) * (1.0 - t * t);
                    if (gpre == 0.0) continue;
                    for (int c = 0; c < 3; ++c)
                        for (int dy = -1; dy <= 1; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                const Eigen::Index yy = y + dy, xc = xx + dx;
                                if (yy < 0 || yy >= H || xc < 0 || xc >= W) continue;
                                gx[c](yy, xc) += kernels_[l][o][c][(dy + 1) * 3 + (dx + 1)] * gpre;
                            }
                }
        }
        for (int c = 0; c < 3; ++c) g.ch[c] += upscale_area_adjoint(gx[c], scales_[l]);
    }
    return g;
}

std::vector<std::vector<Mask>> IdentityFeatureExtractor::extract(const Image& image) const {
    return {{image.ch[0], image.ch[1], image.ch[2]}};
}

Image IdentityFeatureExtractor::extract_grad(const Image& image,
                                             const std::vector<std::vector<Mask>>& feature_grads) const {
    if (feature_grads.size() != 1 || feature_grads[0].size() != 3)
        throw ShapeError("extract_grad: identity extractor expects one 3-channel layer");
    Image g;
    for (int c = 0; c < 3; ++c) g.ch[c] = feature_grads[0][static_cast<size_t>(c)];
    (void)image;
    return g;
}

// ---------------------------------------------------------------------------

AttributeRegionMap toy_attribute_regions() {
    AttributeRegionMap arm;
    arm.regions_by_attribute["left_blob_bright"] = {"blob_a"};
    arm.regions_by_attribute["right_blob_bright"] = {"blob_b"};
    return arm;
}

void register_toy_adapters() {
    auto seed_from = [](const std::string& cfg) -> std::uint64_t {
        auto j = nlohmann::json::parse(cfg.empty() ? "{}" : cfg);
        return j.value("seed", std::uint64_t{7});
    };
    auto& reg = AdapterRegistry::instance();
    reg.register_generator("toy", [seed_from](const std::string& cfg) {
        return std::make_shared<const ToyGenerator>(seed_from(cfg));
    });
    reg.register_classifier("toy", [](const std::string&) {
        return std::make_shared<const ToyClassifier>();
    });
    reg.register_parser("toy", [](const std::string&) {
        return std::make_shared<const ToyParser>();
    });
    reg.register_features("toy", [seed_from](const std::string& cfg) {
        return std::make_shared<const ToyFeatureExtractor>(seed_from(cfg));
    });
    reg.register_features("identity", [](const std::string&) {
        return std::make_shared<const IdentityFeatureExtractor>();
    });
}

}  // namespace maskedit
