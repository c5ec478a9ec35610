#pragma once

#include "maskedit/adapters.hpp"
#include "maskedit/masks.hpp"

#include <array>
#include <memory>
#include <vector>

namespace maskedit {

// Desk-scale reference models. Small enough for finite-difference checks but
// structurally mirror the real pipeline: per-layer style modulation, noise
// injection at increasing resolutions, threshold-based parsing, region-mean
// classification.

// 4 style layers (dim 8), 3 noise channels at 8/16/32, output 3x32x32.
//
// Per stage s (resolutions 8, 16, 32): features are upsampled (nearest),
// a fixed detail pattern is added, styles modulate per-channel with smooth
// spatial gain/bias fields, and the mean-removed noise channel is injected.
// A fourth style layer modulates at full resolution before the fixed
// feature->RGB projection and the [0,1] clamp. The zero latent with zero
// noise renders the handcrafted base scene exactly (two colour blobs, a
// hair band, dark border, shaded grey interior).
class ToyGenerator final : public Generator {
public:
    explicit ToyGenerator(std::uint64_t seed = 7);

    int latent_layer_count() const override { return kLayers; }
    int style_dim() const override { return kStyleDim; }
    int noise_channel_count() const override { return kNoiseChannels; }
    const std::vector<std::pair<int, int>>& noise_resolutions() const override { return noise_res_; }
    std::array<Eigen::Index, 3> output_shape() const override { return {3, kSize, kSize}; }

    Image generate(const LatentCode& w, const NoiseStack& n) const override;
    void generate_grad(const LatentCode& w, const NoiseStack& n, const Image& image_grad,
                       LatentCode* w_grad, NoiseStack* n_grad) const override;

    // w = latent_mean + 0.5 * z, z ~ N(0, I); drawn row by row.
    LatentCode sample_latent(Rng& rng) const override;

    const Eigen::MatrixXd& latent_mean() const { return latent_mean_; }
    double latent_sigma() const { return kLatentSigma; }

    static constexpr int kLayers = 4;
    static constexpr int kStyleDim = 8;
    static constexpr int kNoiseChannels = 3;
    static constexpr int kChannels = 6;
    static constexpr int kSize = 32;
    static constexpr double kLatentSigma = 0.5;

private:
    struct Trace;
    void forward(const LatentCode& w, const NoiseStack& n, Trace& t) const;

    std::vector<std::pair<int, int>> noise_res_{{8, 8}, {16, 16}, {32, 32}};
    // detail_[s][c]: fixed pattern added at stage s so that the telescoped sum
    // reproduces the full-resolution base patterns
    std::array<std::vector<Mask>, 3> detail_;
    // gain_[layer][c][d], bias_[layer][c][d]: smooth fields at the layer's resolution
    std::array<std::vector<std::vector<Mask>>, kLayers> gain_, bias_;
    std::array<std::array<double, kChannels>, kNoiseChannels> noise_coupling_;
    Eigen::Matrix<double, 3, kChannels> to_rgb_;
    Eigen::MatrixXd latent_mean_;  // (kLayers x kStyleDim)
};

// One probability per attribute: the mean of a single colour channel over a
// fixed box. "left_blob_bright" reads red over the left blob box,
// "right_blob_bright" blue over the right blob box. Runs at the generator's
// native 32x32; no input resizing.
class ToyClassifier final : public Classifier {
public:
    ToyClassifier();

    const std::vector<std::string>& attribute_names() const override { return names_; }
    Eigen::VectorXd classify(const Image& image) const override;
    Image classify_grad(const Image& image, const Eigen::VectorXd& probs_grad) const override;

    struct Region {
        int channel;            // colour channel the attribute reads
        int r0, r1, c0, c1;     // half-open pixel box
    };
    const Region& region(int attr) const { return regions_[static_cast<size_t>(attr)]; }

private:
    std::vector<std::string> names_;
    std::vector<Region> regions_;
};

// Smooth sigmoid thresholds on channel intensities. Five regions:
// background (dark), skin (mid tones that are not blob/hair coloured),
// hair (green-dominant), blob_a (red-dominant), blob_b (blue-dominant).
// Blob/hair bands are deliberately wide (tau 0.08) so region fronts can move
// under optimization; skin/background edges are crisp (tau 0.03).
class ToyParser final : public FaceParser {
public:
    ToyParser();

    const std::vector<std::string>& region_names() const override { return names_; }
    RegionMap parse(const Image& image) const override;
    Image parse_grad(const Image& image, const RegionMap& map_grad) const override;

    static constexpr double kDarkThreshold = 0.33;
    static constexpr double kBlobThreshold = 0.68;
    static constexpr double kHairThreshold = 0.70;
    static constexpr double kWideTau = 0.08;
    static constexpr double kCrispTau = 0.03;

private:
    std::vector<std::string> names_;
};

// Three layers at scales {1,2,4}: each downsamples the image (area average),
// applies a fixed seeded 3x3 convolution to 4 channels, then tanh.
class ToyFeatureExtractor final : public FeatureExtractor {
public:
    explicit ToyFeatureExtractor(std::uint64_t seed = 7);

    int layer_count() const override { return 3; }
    const std::vector<int>& layer_scales() const override { return scales_; }
    std::vector<std::vector<Mask>> extract(const Image& image) const override;
    Image extract_grad(const Image& image,
                       const std::vector<std::vector<Mask>>& feature_grads) const override;

    static constexpr int kOutChannels = 4;

private:
    std::vector<int> scales_{1, 2, 4};
    // kernels_[layer][out][in]: 3x3 taps
    std::vector<std::array<std::array<std::array<double, 9>, 3>, kOutChannels>> kernels_;
};

// Single layer, scale 1, features = the image channels. Collapses the
// perceptual loss to the plain masked one; used in tests.
class IdentityFeatureExtractor final : public FeatureExtractor {
public:
    int layer_count() const override { return 1; }
    const std::vector<int>& layer_scales() const override { return scales_; }
    std::vector<std::vector<Mask>> extract(const Image& image) const override;
    Image extract_grad(const Image& image,
                       const std::vector<std::vector<Mask>>& feature_grads) const override;

private:
    std::vector<int> scales_{1};
};

// Region map used by the toy editing scenario.
AttributeRegionMap toy_attribute_regions();

// Registers "toy" adapters (and the "identity" feature extractor).
void register_toy_adapters();

}  // namespace maskedit
