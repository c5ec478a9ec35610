#include "maskedit/optimizer.hpp"

#include "maskedit/blending.hpp"

#include <cmath>

namespace maskedit {

void OptimConfig::validate() const {
    if (!(lr_latent > 0.0) || !(lr_noise > 0.0))
        throw std::invalid_argument("learning rates must be positive");
    if (warmup_iters < 0 || latent_iters < 0 || noise_iters < 0)
        throw std::invalid_argument("iteration counts must be >= 0");
    if (mean_latent_samples < 1)
        throw std::invalid_argument("mean_latent_samples must be >= 1");
    if (mask_refresh_every < 1)
        throw std::invalid_argument("mask_refresh_every must be >= 1");
    if (frame_dump_every && *frame_dump_every < 1)
        throw std::invalid_argument("frame_dump_every must be >= 1");
    if (!weights.valid()) throw std::invalid_argument("loss weights must be finite and >= 0");
}

AdamOptimizer::AdamOptimizer(Eigen::Index size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
      m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void AdamOptimizer::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double c1 = 1.0 / (1.0 - std::pow(beta1_, t_));
    const double c2 = 1.0 / (1.0 - std::pow(beta2_, t_));
    params -= lr_ * (c1 * m_.array() / ((c2 * v_.array()).sqrt() + eps_)).matrix();
}

LatentCode mean_latent(const Generator& g, int samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("mean_latent: samples must be >= 1");
    Rng rng(seed);
    LatentCode mean = g.sample_latent(rng);
    for (int s = 1; s < samples; ++s) mean.styles += g.sample_latent(rng).styles;
    mean.styles /= static_cast<double>(samples);
    return mean;
}

namespace {

Eigen::VectorXd flatten_noise(const NoiseStack& n) {
    Eigen::Index total = 0;
    for (const auto& c : n.channels) total += c.size();
    Eigen::VectorXd out(total);
    Eigen::Index off = 0;
    for (const auto& c : n.channels) {
        out.segment(off, c.size()) = Eigen::Map<const Eigen::VectorXd>(c.data(), c.size());
        off += c.size();
    }
    return out;
}

void unflatten_noise(const Eigen::VectorXd& v, NoiseStack& n) {
    Eigen::Index off = 0;
    for (auto& c : n.channels) {
        Eigen::Map<Eigen::VectorXd>(c.data(), c.size()) = v.segment(off, c.size());
        off += c.size();
    }
}

struct EditContext {
    const AdapterSet& models;
    const Image& input;
    const EditSpec& spec;
    const OptimConfig& cfg;
    const AttributeRegionMap& arm;
    const FrameSink& frame_sink;

    std::vector<int> attr_indices;
    Eigen::VectorXd labels;
    Mask skin_in;
    Mask target_in;
    double portion_in = 0.0;
    std::optional<Mask> union_face;
    std::vector<Mask> union_pyramid;  // global mode only
};

Mask union_target(const EditContext& ctx, const RegionMap& parsed) {
    Mask out;
    for (const auto& attr : ctx.spec.attributes) {
        Mask t = target_mask(parsed, attr.name, ctx.arm);
        out = out.size() == 0 ? std::move(t) : Mask((out + t).min(1.0));
    }
    return out;
}

// d(clamped union of mapped regions)/d(region channel): passes where the
// unclamped sum stays below 1
RegionMap target_mask_grad(const EditContext& ctx, const RegionMap& parsed, const Mask& mask_grad) {
    Mask raw_sum = Mask::Zero(mask_grad.rows(), mask_grad.cols());
    std::vector<bool> mapped(parsed.size(), false);
    for (const auto& attr : ctx.spec.attributes)
        for (const auto& rname : ctx.arm.regions(attr.name)) {
            const int idx = parsed.index_of(rname);
            if (!mapped[static_cast<size_t>(idx)]) {
                raw_sum += parsed.channels[static_cast<size_t>(idx)];
                mapped[static_cast<size_t>(idx)] = true;
            }
        }
    Mask pass = (raw_sum < 1.0).cast<double>() * mask_grad;
    RegionMap grads;
    grads.names = parsed.names;
    for (size_t i = 0; i < parsed.size(); ++i)
        grads.channels.push_back(mapped[i] ? pass : Mask::Zero(mask_grad.rows(), mask_grad.cols()));
    return grads;
}

// Note: the union over several attributes double-clamps (per attribute, then
// across attributes); for the gradient the single raw-sum clamp above is the
// right surrogate wherever any channel is active alone, and both clamps kill
// the gradient on saturated pixels alike.

double checked_total(const LossReport& report, const char* stage, int iteration) {
    if (!std::isfinite(report.total)) {
        std::string what = std::string("non-finite loss in stage ") + stage + " at iteration " +
                           std::to_string(iteration);
        for (const auto& t : report.terms) what += "; " + t.name + "=" + std::to_string(t.value);
        throw OptimizationAbort(stage, iteration, what);
    }
    return report.total;
}

void maybe_dump(const EditContext& ctx, const char* stage, int it, const Image& img) {
    if (ctx.frame_sink && ctx.cfg.frame_dump_every && it % *ctx.cfg.frame_dump_every == 0)
        ctx.frame_sink(stage, it, img);
}

double appearance_term(const EditContext& ctx, const Image& gen, const Mask& preserve,
                       Image* grad) {
    if (ctx.spec.mode == EditSpec::Mode::global)
        return global_appearance_loss(gen, ctx.input, ctx.union_pyramid, *ctx.models.features, grad);
    return appearance_loss(gen, ctx.input, preserve, grad);
}

}  // namespace

EditResult run_edit(const AdapterSet& models, const Image& input_image, const EditSpec& spec,
                    const OptimConfig& cfg, const AttributeRegionMap& arm,
                    const FrameSink& frame_sink) {
    spec.validate();
    cfg.validate();
    if (!models.generator || !models.classifier || !models.parser)
        throw std::invalid_argument("run_edit: generator, classifier and parser are required");
    if (spec.mode == EditSpec::Mode::global && !models.features)
        throw std::invalid_argument("run_edit: global mode needs a feature extractor");

    EditContext ctx{models, input_image, spec, cfg, arm, frame_sink};

    // attribute checks fail before Stage 0
    for (const auto& attr : spec.attributes) {
        const int idx = models.classifier->attribute_index(attr.name);
        if (idx < 0)
            throw std::invalid_argument("attribute '" + attr.name + "' unknown to the classifier");
        ctx.attr_indices.push_back(idx);
        arm.regions(attr.name);  // throws for unmapped attributes
    }
    arm.validate_against(models.parser->region_names());
    ctx.labels = spec.smoothed_labels();

    const auto out_shape = models.generator->output_shape();
    if (input_image.height() != out_shape[1] || input_image.width() != out_shape[2])
        throw ShapeError("run_edit: input image is " + std::to_string(input_image.height()) + "x" +
                         std::to_string(input_image.width()) + " but the generator produces " +
                         std::to_string(out_shape[1]) + "x" + std::to_string(out_shape[2]));

    // Stage 0: parse the input once, fix reference masks
    const RegionMap parsed_in = models.parser->parse(input_image);
    if (parsed_in.index_of("skin") < 0)
        throw std::invalid_argument("run_edit: the parser must provide a 'skin' region");
    ctx.skin_in = parsed_in.at("skin");
    ctx.target_in = union_target(ctx, parsed_in);
    ctx.portion_in = portion(ctx.target_in);
    const bool want_union =
        spec.mode == EditSpec::Mode::global || cfg.blend_mode == BlendMode::global;
    if (want_union) {
        std::vector<std::string> exclude = {"background"};
        if (!cfg.union_regions.empty()) {
            exclude.clear();
            for (const auto& name : models.parser->region_names()) {
                bool keep = false;
                for (const auto& sel : cfg.union_regions) keep = keep || sel == name;
                if (!keep) exclude.push_back(name);
            }
        }
        ctx.union_face = union_face_mask(parsed_in, exclude);
        if (spec.mode == EditSpec::Mode::global)
            ctx.union_pyramid = mask_pyramid(*ctx.union_face, models.features->layer_scales());
    }

    LatentCode w = mean_latent(*models.generator, cfg.mean_latent_samples, cfg.seed);
    NoiseStack zero_noise = NoiseStack::zeros(models.generator->noise_resolutions());

    EditResult result;
    const double lamM = cfg.weights.appearance, lamC = cfg.weights.semantic;
    const double lamS = cfg.weights.shape, lamP = cfg.weights.size, lamR = cfg.weights.noise_reg;

    auto w_flat = [&]() { return Eigen::Map<Eigen::VectorXd>(w.styles.data(), w.styles.size()); };

    // Stage A: appearance-only warm-up against the full skin mask
    {
        AdamOptimizer adam(w.styles.size(), cfg.lr_latent);
        for (int it = 0; it < cfg.warmup_iters; ++it) {
            const Image gen = models.generator->generate(w, zero_noise);
            Image gimg = Image::zeros(gen.height(), gen.width());
            LatentTermValues values;
            values.appearance = appearance_term(ctx, gen, ctx.skin_in, &gimg);
            LossWeights warmup_weights;
            warmup_weights.appearance = lamM;
            warmup_weights.semantic = warmup_weights.shape = warmup_weights.size = 0.0;
            LossReport report = latent_objective(values, spec, warmup_weights);
            checked_total(report, "warmup", it);
            result.trace.push_back({"warmup", it, report});
            maybe_dump(ctx, "warmup", it, gen);

            for (auto& c : gimg.ch) c *= lamM;
            LatentCode wg;
            models.generator->generate_grad(w, zero_noise, gimg, &wg, nullptr);
            if (!wg.allFinite()) throw OptimizationAbort("warmup", it, "non-finite gradient in warmup");
            adam.step(w_flat(), Eigen::Map<Eigen::VectorXd>(wg.styles.data(), wg.styles.size()));
        }
    }

    // Stage B: full latent objective with flexible masks
    {
        AdamOptimizer adam(w.styles.size(), cfg.lr_latent);
        Mask preserve = ctx.skin_in;
        Mask shape_ref = ctx.target_in;
        const bool needs_live_parse = lamS > 0.0 || lamP > 0.0;
        std::vector<double> totals;
        for (int it = 0; it < cfg.latent_iters; ++it) {
            const Image gen = models.generator->generate(w, zero_noise);
            std::optional<RegionMap> parsed_g;
            if (needs_live_parse || it % cfg.mask_refresh_every == 0)
                parsed_g = models.parser->parse(gen);
            std::optional<Mask> target_live;
            if (parsed_g) target_live = union_target(ctx, *parsed_g);
            if (it % cfg.mask_refresh_every == 0) {
                // dynamic relaxation; the refreshed masks act as constants
                preserve = relaxed_preserve_mask(ctx.skin_in, *target_live);
                shape_ref = relaxed_shape_target(ctx.target_in, *target_live);
            }

            Image gimg = Image::zeros(gen.height(), gen.width());
            LatentTermValues values;

            Image g_appearance = Image::zeros(gen.height(), gen.width());
            values.appearance = appearance_term(ctx, gen, preserve, &g_appearance);
            for (int c = 0; c < 3; ++c) gimg.ch[c] += lamM * g_appearance.ch[c];

            if (lamC > 0.0) {
                Eigen::VectorXd probs_sel(ctx.labels.size());
                const Eigen::VectorXd probs_all = models.classifier->classify(gen);
                for (Eigen::Index k = 0; k < ctx.labels.size(); ++k)
                    probs_sel[k] = probs_all[ctx.attr_indices[static_cast<size_t>(k)]];
                Eigen::VectorXd gp;
                values.semantic = semantic_loss(probs_sel, ctx.labels, &gp, &values.per_attribute_kl);
                Eigen::VectorXd gp_all = Eigen::VectorXd::Zero(probs_all.size());
                for (Eigen::Index k = 0; k < ctx.labels.size(); ++k)
                    gp_all[ctx.attr_indices[static_cast<size_t>(k)]] += lamC * gp[k];
                const Image gc = models.classifier->classify_grad(gen, gp_all);
                for (int c = 0; c < 3; ++c) gimg.ch[c] += gc.ch[c];
            }

            if (needs_live_parse) {
                Mask mask_grad = Mask::Zero(gen.height(), gen.width());
                if (lamS > 0.0) {
                    Mask gs;
                    values.shape = shape_loss(shape_ref, *target_live, &gs);
                    mask_grad += lamS * gs;
                }
                if (lamP > 0.0) {
                    double gportion = 0.0;
                    values.size = size_loss(portion(*target_live), ctx.portion_in,
                                            spec.alpha.value_or(1.0), &gportion);
                    mask_grad += Mask::Constant(gen.height(), gen.width(),
                                                lamP * gportion / static_cast<double>(target_live->size()));
                }
                const RegionMap rgrads = target_mask_grad(ctx, *parsed_g, mask_grad);
                const Image gp_img = models.parser->parse_grad(gen, rgrads);
                for (int c = 0; c < 3; ++c) gimg.ch[c] += gp_img.ch[c];
            }

            LossReport report = latent_objective(values, spec, cfg.weights);
            const double total = checked_total(report, "latent", it);
            result.trace.push_back({"latent", it, report});
            maybe_dump(ctx, "latent", it, gen);

            LatentCode wg;
            models.generator->generate_grad(w, zero_noise, gimg, &wg, nullptr);
            if (!wg.allFinite()) throw OptimizationAbort("latent", it, "non-finite gradient in stage B");
            adam.step(w_flat(), Eigen::Map<Eigen::VectorXd>(wg.styles.data(), wg.styles.size()));

            totals.push_back(total);
            if (cfg.early_stop && static_cast<int>(totals.size()) > cfg.early_stop_window) {
                const double old = totals[totals.size() - 1 - cfg.early_stop_window];
                if ((old - total) / std::max(std::abs(old), 1e-12) < cfg.early_stop_rel) break;
            }
        }
    }

    // Stage C: freeze w, optimize the noise stack
    NoiseStack noise = zero_noise;
    {
        Rng noise_rng(Rng::derive_seed(cfg.seed, 0xC));
        for (auto& chn : noise.channels)
            for (Eigen::Index r = 0; r < chn.rows(); ++r)
                for (Eigen::Index c = 0; c < chn.cols(); ++c) chn(r, c) = noise_rng.normal();

        Eigen::VectorXd n_flat = flatten_noise(noise);
        AdamOptimizer adam(n_flat.size(), cfg.lr_noise);
        Mask preserve = ctx.skin_in;
        for (int it = 0; it < cfg.noise_iters; ++it) {
            const Image gen = models.generator->generate(w, noise);
            if (it % cfg.mask_refresh_every == 0)
                preserve = relaxed_preserve_mask(ctx.skin_in,
                                                 union_target(ctx, models.parser->parse(gen)));

            Image gimg = Image::zeros(gen.height(), gen.width());
            const double lm = appearance_term(ctx, gen, preserve, &gimg);
            NoiseStack reg_grad;
            const double reg = noise_regularizer(noise, &reg_grad);
            LossReport report = noise_objective(lm, reg, cfg.weights);
            checked_total(report, "noise", it);
            result.trace.push_back({"noise", it, report});
            maybe_dump(ctx, "noise", it, gen);

            for (auto& c : gimg.ch) c *= lamM;
            NoiseStack ng;
            models.generator->generate_grad(w, noise, gimg, nullptr, &ng);
            for (size_t i = 0; i < ng.channels.size(); ++i)
                ng.channels[i] += lamR * reg_grad.channels[i];
            if (!ng.allFinite()) throw OptimizationAbort("noise", it, "non-finite gradient in stage C");
            adam.step(n_flat, flatten_noise(ng));
            unflatten_noise(n_flat, noise);
        }
    }

    // final render, masks and composite
    result.w_final = w;
    result.n_final = noise;
    result.image_gen = models.generator->generate(w, noise);
    const RegionMap parsed_final = models.parser->parse(result.image_gen);

    RegionMaskSet& masks = result.masks;
    masks.skin = ctx.skin_in;
    masks.target = ctx.target_in;
    masks.target_generated = union_target(ctx, parsed_final);
    masks.union_face = ctx.union_face;
    masks.source = RegionMaskSet::Source::from_input;
    const BlendMode mode =
        spec.mode == EditSpec::Mode::global ? BlendMode::global : cfg.blend_mode;
    masks.blend = blend_mask(masks.skin, masks.target, masks.target_generated, mode,
                             ctx.union_face ? &*ctx.union_face : nullptr);

    result.image_out = blend(result.image_gen, input_image, masks.blend);
    const Eigen::VectorXd probs_all = models.classifier->classify(result.image_out);
    result.probs_out.resize(ctx.labels.size());
    for (Eigen::Index k = 0; k < ctx.labels.size(); ++k)
        result.probs_out[k] = probs_all[ctx.attr_indices[static_cast<size_t>(k)]];
    result.portion_in = ctx.portion_in;
    result.portion_gen = portion(masks.target_generated);
    return result;
}

std::vector<EditResult> intensity_sweep(const AdapterSet& models, const Image& input_image,
                                        const EditSpec& spec, const OptimConfig& cfg,
                                        const AttributeRegionMap& arm,
                                        const std::vector<double>& epsilons) {
    if (epsilons.empty()) throw std::invalid_argument("intensity_sweep: empty epsilon list");
    std::vector<EditResult> results;
    results.reserve(epsilons.size());
    for (double eps : epsilons) {
        EditSpec s = spec;
        s.epsilon = eps;
        s.validate();
        results.push_back(run_edit(models, input_image, s, cfg, arm));
    }
    return results;
}

std::vector<EditResult> size_sweep(const AdapterSet& models, const Image& input_image,
                                   const EditSpec& spec, const OptimConfig& cfg,
                                   const AttributeRegionMap& arm,
                                   const std::vector<double>& alphas) {
    if (alphas.empty()) throw std::invalid_argument("size_sweep: empty alpha list");
    if (!(cfg.weights.size > 0.0))
        throw std::invalid_argument("size_sweep: the size weight must be positive");
    std::vector<EditResult> results;
    results.reserve(alphas.size());
    for (double alpha : alphas) {
        if (!(alpha > 0.0)) throw std::invalid_argument("size_sweep: alpha must be positive");
        EditSpec s = spec;
        s.alpha = alpha;
        results.push_back(run_edit(models, input_image, s, cfg, arm));
    }
    return results;
}

}  // namespace maskedit
