#include "maskedit/cli.hpp"

#include "maskedit/blending.hpp"
#include "maskedit/checkpoint.hpp"
#include "maskedit/image_io.hpp"
#include "maskedit/toy_models.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace maskedit {
namespace cli {

namespace fs = std::filesystem;

AdapterSet make_adapters(const JobConfig& cfg) {
    register_toy_adapters();
    auto& reg = AdapterRegistry::instance();
    AdapterSet set;
    set.generator = reg.make_generator(cfg.adapters.generator, cfg.adapters.options_json);
    set.classifier = reg.make_classifier(cfg.adapters.classifier, cfg.adapters.options_json);
    set.parser = reg.make_parser(cfg.adapters.parser, cfg.adapters.options_json);
    set.features = reg.make_features(cfg.adapters.features, cfg.adapters.options_json);
    return set;
}

AttributeRegionMap attribute_regions_for(const JobConfig& cfg) {
    if (!cfg.attribute_regions.empty()) return resolve_attribute_regions(cfg);
    if (cfg.adapters.parser == "toy") return toy_attribute_regions();
    throw ConfigError("attribute_regions must be configured for parser '" + cfg.adapters.parser + "'");
}

namespace {

void write_loss_trace(const std::string& path, const std::vector<IterationRecord>& trace) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write loss trace '" + path + "'");
    os.precision(12);
    for (const auto& rec : trace) {
        for (const auto& t : rec.report.terms)
            os << rec.iteration << ' ' << rec.stage << '.' << t.name << ' ' << t.value << '\n';
        for (const auto& t : rec.report.details)
            os << rec.iteration << ' ' << rec.stage << '.' << t.name << ' ' << t.value << '\n';
        os << rec.iteration << ' ' << rec.stage << ".total " << rec.report.total << '\n';
    }
}

void write_edit_outputs(const fs::path& dir, const JobConfig& cfg, const Image& input,
                        const EditResult& result) {
    io::write_image((dir / "output.png").string(), result.image_out);
    io::write_image((dir / "generated.png").string(), result.image_gen);
    if (cfg.exports.dump_masks) {
        io::write_mask((dir / "mask_skin.png").string(), result.masks.skin);
        io::write_mask((dir / "mask_target_input.png").string(), result.masks.target);
        io::write_mask((dir / "mask_target_generated.png").string(), result.masks.target_generated);
        io::write_mask((dir / "mask_blend.png").string(), result.masks.blend);
        if (result.masks.union_face)
            io::write_mask((dir / "mask_union.png").string(), *result.masks.union_face);
    }
    if (cfg.exports.dump_loss_trace)
        write_loss_trace((dir / "loss_trace.txt").string(), result.trace);
    if (cfg.exports.dump_checkpoint)
        checkpoint_from(result.w_final, result.n_final).save((dir / "checkpoint.medt").string());
    if (cfg.exports.dump_variants) {
        for (const auto& [name, img] : blend_variants(result.image_gen, input, result.masks))
            io::write_image((dir / ("blend_" + name + ".png")).string(), img);
    }
    std::ofstream summary(dir / "summary.csv");
    summary.precision(10);
    summary << "attribute,classifier_output\n";
    for (size_t k = 0; k < cfg.edit.attributes.size(); ++k)
        summary << cfg.edit.attributes[k].name << ',' << result.probs_out[static_cast<Eigen::Index>(k)]
                << '\n';
    summary << "portion_in," << result.portion_in << "\nportion_generated," << result.portion_gen
            << '\n';
}

FrameSink frame_sink_for(const JobConfig& cfg, const fs::path& dir) {
    if (!cfg.exports.dump_frames || !cfg.optim.frame_dump_every) return {};
    return [dir](const std::string& stage, int iteration, const Image& img) {
        std::ostringstream name;
        name << "frame_" << stage << '_';
        name.width(5);
        name.fill('0');
        name << iteration << ".png";
        io::write_image((dir / name.str()).string(), img);
    };
}

int run_single_edit(const JobConfig& cfg, const std::string& input_path, const fs::path& out_dir,
                    std::uint64_t seed) {
    const AdapterSet models = make_adapters(cfg);
    const AttributeRegionMap arm = attribute_regions_for(cfg);
    const Image input = io::read_image(input_path);
    fs::create_directories(out_dir);
    OptimConfig optim = cfg.optim;
    optim.seed = seed;
    EditResult result =
        run_edit(models, input, cfg.edit, optim, arm, frame_sink_for(cfg, out_dir));
    write_edit_outputs(out_dir, cfg, input, result);
    return kExitOk;
}

int classify_failure(const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (dynamic_cast<const OptimizationAbort*>(&e)) return kExitOptimizationAbort;
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfigError;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return kExitConfigError;
    return kExitLoadError;
}

}  // namespace

int cmd_edit(const JobConfig& cfg) {
    try {
        cfg.validate();
        std::vector<std::string> inputs{cfg.input_path};
        inputs.insert(inputs.end(), cfg.extra_inputs.begin(), cfg.extra_inputs.end());
        if (inputs.size() == 1)
            return run_single_edit(cfg, inputs[0], cfg.output_dir, cfg.optim.seed);

        // batch mode: independent jobs with derived seeds
        const int workers = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(inputs.size())));
        std::atomic<size_t> next{0};
        std::atomic<int> worst{kExitOk};
        auto worker = [&]() {
            for (size_t i = next.fetch_add(1); i < inputs.size(); i = next.fetch_add(1)) {
                const fs::path sub = fs::path(cfg.output_dir) / fs::path(inputs[i]).stem();
                try {
                    run_single_edit(cfg, inputs[i], sub, Rng::derive_seed(cfg.optim.seed, i));
                } catch (const std::exception& e) {
                    int code = classify_failure(e);
                    int cur = worst.load();
                    while (code > cur && !worst.compare_exchange_weak(cur, code)) {}
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        return worst.load();
    } catch (const std::exception& e) {
        return classify_failure(e);
    }
}

int cmd_sweep(const JobConfig& cfg, SweepKind kind, const std::vector<double>& values) {
    try {
        cfg.validate();
        if (values.empty()) throw ConfigError("sweep: empty value list");
        const AdapterSet models = make_adapters(cfg);
        const AttributeRegionMap arm = attribute_regions_for(cfg);
        const Image input = io::read_image(cfg.input_path);
        fs::create_directories(cfg.output_dir);

        std::vector<EditResult> results =
            kind == SweepKind::epsilon
                ? intensity_sweep(models, input, cfg.edit, cfg.optim, arm, values)
                : size_sweep(models, input, cfg.edit, cfg.optim, arm, values);

        std::ofstream summary(fs::path(cfg.output_dir) / "sweep_summary.csv");
        summary.precision(10);
        summary << (kind == SweepKind::epsilon ? "epsilon" : "alpha")
                << ",classifier_output,portion_in,portion_generated\n";
        for (size_t i = 0; i < values.size(); ++i) {
            std::ostringstream sub;
            sub << (kind == SweepKind::epsilon ? "epsilon_" : "alpha_") << values[i];
            const fs::path dir = fs::path(cfg.output_dir) / sub.str();
            fs::create_directories(dir);
            JobConfig sub_cfg = cfg;
            if (kind == SweepKind::epsilon)
                sub_cfg.edit.epsilon = values[i];
            else
                sub_cfg.edit.alpha = values[i];
            write_edit_outputs(dir, sub_cfg, input, results[i]);
            summary << values[i] << ',' << results[i].probs_out.maxCoeff() << ','
                    << results[i].portion_in << ',' << results[i].portion_gen << '\n';
        }
        return kExitOk;
    } catch (const std::exception& e) {
        return classify_failure(e);
    }
}

InvertResult invert_embed(const AdapterSet& models, const Image& input, const Mask& embed_mask,
                          int iters, const OptimConfig& cfg) {
    if (iters < 0) throw std::invalid_argument("invert_embed: iterations must be >= 0");
    InvertResult res;
    res.embed_mask = embed_mask;
    LatentCode w = mean_latent(*models.generator, cfg.mean_latent_samples, cfg.seed);
    NoiseStack zero_noise = NoiseStack::zeros(models.generator->noise_resolutions());
    AdamOptimizer adam(w.styles.size(), cfg.lr_latent);
    for (int it = 0; it < iters; ++it) {
        const Image gen = models.generator->generate(w, zero_noise);
        Image gimg = Image::zeros(gen.height(), gen.width());
        const double lm = appearance_loss(gen, input, embed_mask, &gimg);
        LossReport report;
        report.terms.push_back({"appearance", lm, cfg.weights.appearance});
        report.total = cfg.weights.appearance * lm;
        if (!std::isfinite(report.total))
            throw OptimizationAbort("invert", it, "non-finite loss in inversion");
        res.trace.push_back({"invert", it, report});
        for (auto& c : gimg.ch) c *= cfg.weights.appearance;
        LatentCode wg;
        models.generator->generate_grad(w, zero_noise, gimg, &wg, nullptr);
        adam.step(Eigen::Map<Eigen::VectorXd>(w.styles.data(), w.styles.size()),
                  Eigen::Map<Eigen::VectorXd>(wg.styles.data(), wg.styles.size()));
    }
    res.w = w;
    res.image_gen = models.generator->generate(w, zero_noise);
    res.image_out = blend(res.image_gen, input, embed_mask);
    return res;
}

int cmd_invert(const JobConfig& cfg, EmbedMask mask_mode, int iters) {
    try {
        if (cfg.input_path.empty()) throw ConfigError("missing required field: input");
        if (cfg.output_dir.empty()) throw ConfigError("missing required field: output_dir");
        cfg.optim.validate();
        const AdapterSet models = make_adapters(cfg);
        const Image input = io::read_image(cfg.input_path);
        fs::create_directories(cfg.output_dir);

        const RegionMap parsed = models.parser->parse(input);
        Mask embed;
        switch (mask_mode) {
            case EmbedMask::face: embed = union_face_mask(parsed); break;
            case EmbedMask::no_hair: embed = union_face_mask(parsed, {"background", "hair"}); break;
            case EmbedMask::skin_only: embed = parsed.at("skin"); break;
        }

        InvertResult res = invert_embed(models, input, embed, iters, cfg.optim);
        const fs::path dir(cfg.output_dir);
        io::write_image((dir / "output.png").string(), res.image_out);
        io::write_image((dir / "generated.png").string(), res.image_gen);
        io::write_mask((dir / "mask_embed.png").string(), embed);
        if (cfg.exports.dump_loss_trace)
            write_loss_trace((dir / "loss_trace.txt").string(), res.trace);

        const MetricReport metrics = compute_metrics(res.image_out, input, *models.features);
        std::ofstream table(dir / "metrics.csv");
        table << format_metric_table({{fs::path(cfg.input_path).filename().string(), metrics}});
        std::cout << format_metric_table({{fs::path(cfg.input_path).filename().string(), metrics}});
        return kExitOk;
    } catch (const std::exception& e) {
        return classify_failure(e);
    }
}

}  // namespace cli
}  // namespace maskedit
