#include "maskedit/losses.hpp"

#include <algorithm>
#include <cmath>

namespace maskedit {

Eigen::VectorXd EditSpec::smoothed_labels() const {
    Eigen::VectorXd y(static_cast<Eigen::Index>(attributes.size()));
    for (Eigen::Index k = 0; k < y.size(); ++k)
        y[k] = attributes[static_cast<size_t>(k)].present ? 1.0 - epsilon : epsilon;
    return y;
}

void EditSpec::validate() const {
    if (attributes.empty()) throw std::invalid_argument("edit spec needs at least one attribute");
    if (!(epsilon >= 0.0 && epsilon < 0.5))
        throw std::invalid_argument("epsilon must lie in [0, 0.5)");
    if (alpha && !(*alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    for (const auto& a : attributes)
        if (a.name.empty()) throw std::invalid_argument("attribute name must not be empty");
}

double LossReport::term_value(const std::string& name) const {
    for (const auto& t : terms)
        if (t.name == name) return t.value;
    throw std::out_of_range("loss report has no term '" + name + "'");
}

double bernoulli_kl(double p, double y, double* grad_p) {
    const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
    const double yc = std::clamp(y, kProbClamp, 1.0 - kProbClamp);
    const double value = pc * std::log(pc / yc) + (1.0 - pc) * std::log((1.0 - pc) / (1.0 - yc));
    if (grad_p) {
        // zero outside the clamp interval
        const bool interior = p > kProbClamp && p < 1.0 - kProbClamp;
        *grad_p = interior ? std::log(pc / yc) - std::log((1.0 - pc) / (1.0 - yc)) : 0.0;
    }
    return value;
}

double appearance_loss(const Image& image_gen, const Image& image_in, const Mask& preserve,
                       Image* grad_gen) {
    require_same_shape(image_gen, image_in, "appearance_loss");
    require_same_shape(preserve, image_gen.ch[0], "appearance_loss");
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        Mask weighted = preserve * (image_gen.ch[c] - image_in.ch[c]);
        total += (weighted * weighted).sum();
        if (grad_gen) grad_gen->ch[c] = 2.0 * preserve * weighted;
    }
    return total;
}

double semantic_loss(const Eigen::VectorXd& probs, const Eigen::VectorXd& labels,
                     Eigen::VectorXd* grad_probs, std::vector<double>* per_attribute) {
    if (probs.size() != labels.size())
        throw ShapeError("semantic_loss: probs/labels size mismatch");
    if (probs.size() == 0) throw std::invalid_argument("semantic_loss: empty probability vector");
    const double invK = 1.0 / static_cast<double>(probs.size());
    if (grad_probs) grad_probs->resize(probs.size());
    if (per_attribute) per_attribute->clear();
    double total = 0.0;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
        double g = 0.0;
        const double kl = bernoulli_kl(probs[k], labels[k], grad_probs ? &g : nullptr);
        total += kl;
        if (per_attribute) per_attribute->push_back(kl);
        if (grad_probs) (*grad_probs)[k] = invK * g;
    }
    return total * invK;
}

double shape_loss(const Mask& reference, const Mask& generated, Mask* grad_generated) {
    require_same_shape(reference, generated, "shape_loss");
    Mask diff = reference - generated;
    if (grad_generated) *grad_generated = -2.0 * diff;
    return (diff * diff).sum();
}

double portion(const Mask& m) {
    if (m.size() == 0) throw std::invalid_argument("portion: empty mask");
    return m.sum() / static_cast<double>(m.size());
}

double size_loss(double portion_gen, double portion_in, double alpha, double* grad_gen) {
    const double target = std::clamp(alpha * portion_in, kProbClamp, 1.0 - kProbClamp);
    return bernoulli_kl(portion_gen, target, grad_gen);
}

namespace {

// Shared by value and gradient: lag-1 mean products with circular shifts.
struct LagMeans {
    double mx = 0.0, my = 0.0;
};

LagMeans lag_means(const Mask& n) {
    const Eigen::Index h = n.rows(), w = n.cols();
    double sx = 0.0, sy = 0.0;
    for (Eigen::Index r = 0; r < h; ++r)
        for (Eigen::Index c = 0; c < w; ++c) {
            sx += n(r, c) * n(r, (c + w - 1) % w);
            sy += n(r, c) * n((r + h - 1) % h, c);
        }
    const double inv = 1.0 / static_cast<double>(h * w);
    return {sx * inv, sy * inv};
}

// d(mean_x)^2/dn and d(mean_y)^2/dn accumulated into grad.
void lag_grad(const Mask& n, const LagMeans& lm, Mask& grad) {
    const Eigen::Index h = n.rows(), w = n.cols();
    const double inv = 1.0 / static_cast<double>(h * w);
    for (Eigen::Index r = 0; r < h; ++r)
        for (Eigen::Index c = 0; c < w; ++c) {
            const double dx = n(r, (c + w - 1) % w) + n(r, (c + 1) % w);
            const double dy = n((r + h - 1) % h, c) + n((r + 1) % h, c);
            grad(r, c) += 2.0 * lm.mx * inv * dx + 2.0 * lm.my * inv * dy;
        }
}

std::vector<Mask> noise_pyramid(const Mask& channel) {
    std::vector<Mask> levels{channel};
    while (levels.back().rows() > 8 && levels.back().cols() > 8)
        levels.push_back(block_mean_down2(levels.back()));
    return levels;
}

}  // namespace

double noise_regularizer(const NoiseStack& noise, NoiseStack* grad) {
    if (grad) {
        grad->channels.clear();
        for (const auto& ch : noise.channels) grad->channels.push_back(Mask::Zero(ch.rows(), ch.cols()));
    }
    double total = 0.0;
    for (size_t i = 0; i < noise.channels.size(); ++i) {
        const auto levels = noise_pyramid(noise.channels[i]);
        std::vector<Mask> level_grads;
        if (grad) for (const auto& lv : levels) level_grads.push_back(Mask::Zero(lv.rows(), lv.cols()));
        for (size_t j = 0; j < levels.size(); ++j) {
            const LagMeans lm = lag_means(levels[j]);
            total += lm.mx * lm.mx + lm.my * lm.my;
            if (grad) lag_grad(levels[j], lm, level_grads[j]);
        }
        if (grad) {
            // pull level gradients back through the 2x2 averaging chain
            for (size_t j = levels.size(); j-- > 1;) {
                Mask up(level_grads[j].rows() * 2, level_grads[j].cols() * 2);
                for (Eigen::Index r = 0; r < up.rows(); ++r)
                    for (Eigen::Index c = 0; c < up.cols(); ++c)
                        up(r, c) = 0.25 * level_grads[j](r / 2, c / 2);
                level_grads[j - 1] += up;
            }
            grad->channels[i] = level_grads[0];
        }
    }
    return total;
}

double global_appearance_loss(const Image& image_gen, const Image& image_in,
                              const std::vector<Mask>& union_pyramid, const FeatureExtractor& fx,
                              Image* grad_gen) {
    require_same_shape(image_gen, image_in, "global_appearance_loss");
    if (static_cast<int>(union_pyramid.size()) != fx.layer_count())
        throw ShapeError("global_appearance_loss: expected one union mask per extractor layer");
    const auto feats_gen = fx.extract(image_gen);
    const auto feats_in = fx.extract(image_in);
    double total = 0.0;
    std::vector<std::vector<Mask>> fgrads;
    if (grad_gen) fgrads.resize(feats_gen.size());
    for (size_t l = 0; l < feats_gen.size(); ++l) {
        const Mask& m = union_pyramid[l];
        for (size_t c = 0; c < feats_gen[l].size(); ++c) {
            const Mask& fg = feats_gen[l][c];
            if (m.rows() != fg.rows() || m.cols() != fg.cols())
                throw ShapeError("global_appearance_loss: union mask at layer " + std::to_string(l) +
                                 " does not match the feature size");
            Mask weighted = m * (fg - feats_in[l][c]);
            total += (weighted * weighted).sum();
            if (grad_gen) fgrads[l].push_back(2.0 * m * weighted);
        }
    }
    if (grad_gen) *grad_gen = fx.extract_grad(image_gen, fgrads);
    return total;
}

LossReport latent_objective(const LatentTermValues& values, const EditSpec& spec,
                            const LossWeights& weights) {
    if (!weights.valid()) throw std::invalid_argument("loss weights must be finite and >= 0");
    LossReport report;
    auto add = [&report](const std::string& name, std::optional<double> value, double weight) {
        if (weight == 0.0) return;  // skipped, not evaluated
        if (!value) throw std::invalid_argument("latent_objective: missing value for weighted term '" + name + "'");
        report.terms.push_back({name, *value, weight});
        report.total += weight * *value;
    };
    const char* appearance_name =
        spec.mode == EditSpec::Mode::global ? "appearance_perceptual" : "appearance";
    add(appearance_name, values.appearance, weights.appearance);
    add("semantic", values.semantic, weights.semantic);
    add("shape", values.shape, weights.shape);
    add("size", values.size, weights.size);
    if (weights.semantic != 0.0)
        for (size_t k = 0; k < values.per_attribute_kl.size(); ++k)
            report.details.push_back({"kl[" + spec.attributes[k].name + "]",
                                      values.per_attribute_kl[k], 0.0});
    return report;
}

LossReport noise_objective(double appearance_value, double regularizer_value,
                           const LossWeights& weights) {
    if (!weights.valid()) throw std::invalid_argument("loss weights must be finite and >= 0");
    LossReport report;
    if (weights.appearance != 0.0) {
        report.terms.push_back({"appearance", appearance_value, weights.appearance});
        report.total += weights.appearance * appearance_value;
    }
    if (weights.noise_reg != 0.0) {
        report.terms.push_back({"noise_reg", regularizer_value, weights.noise_reg});
        report.total += weights.noise_reg * regularizer_value;
    }
    return report;
}

}  // namespace maskedit
