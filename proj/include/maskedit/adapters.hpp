#pragma once

#include "maskedit/core.hpp"
#include "maskedit/latent.hpp"
#include "maskedit/rng.hpp"

#include <Eigen/Core>

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace maskedit {

// Model contracts consumed by the pipeline. All handles are immutable after
// construction and safe to share across concurrent edit jobs. "Differentiable"
// is rendered as a forward pass plus an explicit vector-Jacobian product: the
// *_grad methods pull a gradient w.r.t. the output back to the inputs.

class Generator {
public:
    virtual ~Generator() = default;

    virtual int latent_layer_count() const = 0;
    virtual int style_dim() const = 0;
    virtual int noise_channel_count() const = 0;
    virtual const std::vector<std::pair<int, int>>& noise_resolutions() const = 0;
    virtual std::array<Eigen::Index, 3> output_shape() const = 0;  // {3, H, W}

    // Deterministic: identical (w, n) produce identical images in [0,1].
    virtual Image generate(const LatentCode& w, const NoiseStack& n) const = 0;

    virtual void generate_grad(const LatentCode& w, const NoiseStack& n, const Image& image_grad,
                               LatentCode* w_grad, NoiseStack* n_grad) const = 0;

    // One draw from the latent distribution the mean latent is computed over.
    virtual LatentCode sample_latent(Rng& rng) const = 0;

    void check_inputs(const LatentCode& w, const NoiseStack& n) const;
};

class Classifier {
public:
    virtual ~Classifier() = default;

    virtual const std::vector<std::string>& attribute_names() const = 0;

    // One probability in [0,1] per supported attribute. Input resizing, when a
    // model needs it, is owned by the adapter and must be documented there.
    virtual Eigen::VectorXd classify(const Image& image) const = 0;

    virtual Image classify_grad(const Image& image, const Eigen::VectorXd& probs_grad) const = 0;

    int attribute_index(const std::string& name) const {
        const auto& names = attribute_names();
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }
};

class FaceParser {
public:
    virtual ~FaceParser() = default;

    virtual const std::vector<std::string>& region_names() const = 0;

    // L-channel map in [0,1], same spatial size as the input.
    virtual RegionMap parse(const Image& image) const = 0;

    virtual Image parse_grad(const Image& image, const RegionMap& map_grad) const = 0;
};

class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;

    virtual int layer_count() const = 0;

    // Spatial downscale factor of each layer's output relative to the input.
    virtual const std::vector<int>& layer_scales() const = 0;

    // features[l] is a stack of channels at input_size / layer_scales[l].
    virtual std::vector<std::vector<Mask>> extract(const Image& image) const = 0;

    virtual Image extract_grad(const Image& image,
                               const std::vector<std::vector<Mask>>& feature_grads) const = 0;
};

// The four models one edit job runs against.
struct AdapterSet {
    std::shared_ptr<const Generator> generator;
    std::shared_ptr<const Classifier> classifier;
    std::shared_ptr<const FaceParser> parser;
    std::shared_ptr<const FeatureExtractor> features;  // may be null in local mode
};

// Plug-in discovery by name. Factories receive the adapter's config subtree
// serialized as a JSON string (checkpoint path, seed, ...), whose format is
// owned by the adapter and opaque to the core.
struct AdapterRegistry {
    using GeneratorFactory = std::function<std::shared_ptr<const Generator>(const std::string&)>;
    using ClassifierFactory = std::function<std::shared_ptr<const Classifier>(const std::string&)>;
    using ParserFactory = std::function<std::shared_ptr<const FaceParser>(const std::string&)>;
    using FeaturesFactory = std::function<std::shared_ptr<const FeatureExtractor>(const std::string&)>;

    static AdapterRegistry& instance();

    void register_generator(const std::string& name, GeneratorFactory f);
    void register_classifier(const std::string& name, ClassifierFactory f);
    void register_parser(const std::string& name, ParserFactory f);
    void register_features(const std::string& name, FeaturesFactory f);

    std::shared_ptr<const Generator> make_generator(const std::string& name, const std::string& cfg) const;
    std::shared_ptr<const Classifier> make_classifier(const std::string& name, const std::string& cfg) const;
    std::shared_ptr<const FaceParser> make_parser(const std::string& name, const std::string& cfg) const;
    std::shared_ptr<const FeatureExtractor> make_features(const std::string& name, const std::string& cfg) const;

private:
    std::map<std::string, GeneratorFactory> generators_;
    std::map<std::string, ClassifierFactory> classifiers_;
    std::map<std::string, ParserFactory> parsers_;
    std::map<std::string, FeaturesFactory> features_;
};

}  // namespace maskedit
