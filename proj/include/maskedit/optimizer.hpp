#pragma once

#include "maskedit/adapters.hpp"
#include "maskedit/core.hpp"
#include "maskedit/latent.hpp"
#include "maskedit/losses.hpp"
#include "maskedit/masks.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace maskedit {

struct OptimConfig {
    LossWeights weights;
    double lr_latent = 0.001;
    double lr_noise = 0.1;
    int warmup_iters = 200;
    int latent_iters = 800;
    int noise_iters = 400;
    int mean_latent_samples = 50000;
    std::uint64_t seed = 0;
    std::optional<int> frame_dump_every;
    // Flexible masks are refreshed from S_tar(I_G) every k iterations (k=1
    // reproduces the per-iteration behaviour).
    int mask_refresh_every = 1;
    // Optional Stage-B early stop: relative improvement below `early_stop_rel`
    // over `early_stop_window` iterations. Off by default.
    bool early_stop = false;
    double early_stop_rel = 1e-5;
    int early_stop_window = 50;
    BlendMode blend_mode = BlendMode::standard;
    // Regions composing the face union; empty selects every non-"background"
    // channel the parser provides.
    std::vector<std::string> union_regions;

    void validate() const;  // learning rates > 0, iteration counts >= 0, ...
};

struct IterationRecord {
    std::string stage;  // "warmup", "latent", "noise"
    int iteration = 0;
    LossReport report;
};

struct EditResult {
    LatentCode w_final;
    NoiseStack n_final;
    Image image_gen;  // raw generator output
    Image image_out;  // composited result
    std::vector<IterationRecord> trace;
    RegionMaskSet masks;
    Eigen::VectorXd probs_out;  // classifier outputs for the spec attributes, on image_out
    double portion_in = 0.0;
    double portion_gen = 0.0;
};

// Adam with default decay parameters over a flat parameter vector.
class AdamOptimizer {
public:
    explicit AdamOptimizer(Eigen::Index size, double lr, double beta1 = 0.9, double beta2 = 0.999,
                           double eps = 1e-8);
    // In-place update from the current gradient.
    void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad);

private:
    double lr_, beta1_, beta2_, eps_;
    Eigen::VectorXd m_, v_;
    long t_ = 0;
};

// Arithmetic mean of `samples` draws from the generator's latent sampler.
LatentCode mean_latent(const Generator& g, int samples, std::uint64_t seed);

// Called with the intermediate generator output when frame dumping is on.
using FrameSink = std::function<void(const std::string& stage, int iteration, const Image&)>;

// Three-stage edit:
//   Stage 0  parse the input once, fix S_skin(I) and S_tar(I); w <- mean
//            latent; n <- 0 (held through the latent stages).
//   Stage A  appearance warm-up (masked reconstruction only).
//   Stage B  full latent objective, flexible masks recomputed from S_tar(I_G).
//   Stage C  w frozen; noise initialized from a standard normal draw and
//            optimized under appearance + regularizer.
// Deterministic given cfg.seed. Throws OptimizationAbort on non-finite loss
// and std::invalid_argument for unknown attributes (before Stage 0).
EditResult run_edit(const AdapterSet& models, const Image& input_image, const EditSpec& spec,
                    const OptimConfig& cfg, const AttributeRegionMap& arm,
                    const FrameSink& frame_sink = {});

// Independent run_edit per epsilon, shared seed.
std::vector<EditResult> intensity_sweep(const AdapterSet& models, const Image& input_image,
                                        const EditSpec& spec, const OptimConfig& cfg,
                                        const AttributeRegionMap& arm,
                                        const std::vector<double>& epsilons);

// Independent run_edit per alpha; requires a positive size weight.
std::vector<EditResult> size_sweep(const AdapterSet& models, const Image& input_image,
                                   const EditSpec& spec, const OptimConfig& cfg,
                                   const AttributeRegionMap& arm,
                                   const std::vector<double>& alphas);

}  // namespace maskedit
