#pragma once

#include "maskedit/adapters.hpp"
#include "maskedit/core.hpp"
#include "maskedit/latent.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace maskedit {

// Target attributes plus the two editing dials: label smoothing epsilon
// (doubles as attribute intensity) and the optional region size factor alpha.
struct EditSpec {
    struct Attribute {
        std::string name;
        bool present = true;  // target state; the smoothed label is 1-eps or eps
    };
    enum class Mode { local, global };

    std::vector<Attribute> attributes;
    double epsilon = 0.05;
    std::optional<double> alpha;
    Mode mode = Mode::local;

    // y_k = 1-eps for present targets, eps otherwise.
    Eigen::VectorXd smoothed_labels() const;

    // K >= 1 and eps in [0, 0.5).
    void validate() const;
};

struct LossWeights {
    double appearance = 2.0;   // masked reconstruction
    double semantic = 0.005;   // classifier KL
    double shape = 0.5;        // target-region shape
    double size = 0.0;         // region portion KL (off unless size editing)
    double noise_reg = 1.0;    // noise autocorrelation penalty

    bool valid() const {
        auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
        return ok(appearance) && ok(semantic) && ok(shape) && ok(size) && ok(noise_reg);
    }
};

// Per-term values (unweighted) plus the weighted total. `details` carries
// diagnostics (per-attribute KLs) that do not enter the total.
struct LossReport {
    struct Term {
        std::string name;
        double value = 0.0;
        double weight = 0.0;
    };
    std::vector<Term> terms;
    std::vector<Term> details;
    double total = 0.0;

    bool has_term(const std::string& name) const {
        for (const auto& t : terms)
            if (t.name == name) return true;
        return false;
    }
    double term_value(const std::string& name) const;
};

// Probabilities are clamped to [kProbClamp, 1-kProbClamp] before logs so the
// KL terms stay finite at epsilon = 0.
inline constexpr double kProbClamp = 1e-6;

// D_KL(Bernoulli(p) || Bernoulli(y)) with clamped arguments.
double bernoulli_kl(double p, double y, double* grad_p = nullptr);

// || preserve ⊙ (gen - ref) ||_2^2 summed over channels and pixels.
double appearance_loss(const Image& image_gen, const Image& image_in, const Mask& preserve,
                       Image* grad_gen = nullptr);

// (1/K) sum_k KL(probs_k || labels_k); optionally reports per-attribute KLs.
double semantic_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels,
                     Eigen::VectorXd* grad_probs = nullptr,
                     std::vector<double>* per_attribute = nullptr);

// || reference - generated ||_2^2; gradient w.r.t. the generated mask only.
double shape_loss(const Mask& reference, const Mask& generated, Mask* grad_generated = nullptr);

// Mask mass / pixel count. The gradient is uniform 1/N.
double portion(const Mask& m);

// KL(portion_gen || clamp(alpha * portion_in)).
double size_loss(double portion_gen, double portion_in, double alpha, double* grad_gen = nullptr);

// Sum over channels and pyramid levels of squared mean lag-1 products, both
// axes, circular shifts. Channels are 2x2-averaged down to 8x8; channels at or
// below 8x8 contribute only their original resolution.
double noise_regularizer(const NoiseStack& noise, NoiseStack* grad = nullptr);

// sum_l || union_pyr[l] ⊙ (phi_l(gen) - phi_l(in)) ||_2^2.
double global_appearance_loss(const Image& image_gen, const Image& image_in,
                              const std::vector<Mask>& union_pyramid, const FeatureExtractor& fx,
                              Image* grad_gen = nullptr);

// Inputs for assembling one latent-stage report. Pointers for terms whose
// weight is zero may be null; such terms are skipped, not evaluated.
struct LatentTermValues {
    std::optional<double> appearance;
    std::optional<double> semantic;
    std::vector<double> per_attribute_kl;
    std::optional<double> shape;
    std::optional<double> size;
};

// Weighted sum per the configured weights; zero-weight terms are skipped.
LossReport latent_objective(const LatentTermValues& values, const EditSpec& spec,
                            const LossWeights& weights);

// Noise-stage report: appearance (with the relaxed preserve mask, computed by
// the caller) and the noise regularizer. Semantic and shape terms are
// deliberately absent.
LossReport noise_objective(double appearance_value, double regularizer_value,
                           const LossWeights& weights);

}  // namespace maskedit
