#include "maskedit/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace maskedit {

using nlohmann::json;

namespace {

json weights_to_json(const LossWeights& w) {
    return json{{"appearance", w.appearance},
                {"semantic", w.semantic},
                {"shape", w.shape},
                {"size", w.size},
                {"noise_reg", w.noise_reg}};
}

LossWeights weights_from_json(const json& j) {
    LossWeights w;
    w.appearance = j.value("appearance", w.appearance);
    w.semantic = j.value("semantic", w.semantic);
    w.shape = j.value("shape", w.shape);
    w.size = j.value("size", w.size);
    w.noise_reg = j.value("noise_reg", w.noise_reg);
    return w;
}

std::string blend_mode_name(BlendMode m) {
    switch (m) {
        case BlendMode::standard: return "standard";
        case BlendMode::hair_shape: return "hair_shape";
        case BlendMode::global: return "global";
    }
    return "standard";
}

BlendMode blend_mode_from(const std::string& s) {
    if (s == "standard") return BlendMode::standard;
    if (s == "hair_shape") return BlendMode::hair_shape;
    if (s == "global") return BlendMode::global;
    throw ConfigError("blend_mode: expected standard|hair_shape|global, got '" + s + "'");
}

}  // namespace

std::string JobConfig::to_json() const {
    json edit_attrs = json::array();
    for (const auto& a : edit.attributes)
        edit_attrs.push_back(json{{"name", a.name}, {"present", a.present}});
    json j{
        {"input", input_path},
        {"output_dir", output_dir},
        {"jobs", jobs},
        {"adapters",
         {{"generator", adapters.generator},
          {"classifier", adapters.classifier},
          {"parser", adapters.parser},
          {"features", adapters.features},
          {"options", json::parse(adapters.options_json.empty() ? "{}" : adapters.options_json)}}},
        {"edit",
         {{"attributes", edit_attrs},
          {"epsilon", edit.epsilon},
          {"mode", edit.mode == EditSpec::Mode::global ? "global" : "local"}}},
        {"optim",
         {{"weights", weights_to_json(optim.weights)},
          {"lr_latent", optim.lr_latent},
          {"lr_noise", optim.lr_noise},
          {"warmup_iters", optim.warmup_iters},
          {"latent_iters", optim.latent_iters},
          {"noise_iters", optim.noise_iters},
          {"mean_latent_samples", optim.mean_latent_samples},
          {"seed", optim.seed},
          {"mask_refresh_every", optim.mask_refresh_every},
          {"early_stop", optim.early_stop},
          {"early_stop_rel", optim.early_stop_rel},
          {"early_stop_window", optim.early_stop_window},
          {"blend_mode", blend_mode_name(optim.blend_mode)},
          {"union_regions", optim.union_regions}}},
        {"export",
         {{"dump_masks", exports.dump_masks},
          {"dump_frames", exports.dump_frames},
          {"dump_loss_trace", exports.dump_loss_trace},
          {"dump_checkpoint", exports.dump_checkpoint},
          {"dump_variants", exports.dump_variants}}},
    };
    if (edit.alpha) j["edit"]["alpha"] = *edit.alpha;
    if (optim.frame_dump_every) j["optim"]["frame_dump_every"] = *optim.frame_dump_every;
    if (!extra_inputs.empty()) j["extra_inputs"] = extra_inputs;
    if (!union_regions.empty()) j["union_regions"] = union_regions;
    if (!attribute_regions.empty()) j["attribute_regions"] = attribute_regions;
    return j.dump(2);
}

JobConfig JobConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    JobConfig cfg;
    try {
        cfg.input_path = j.value("input", "");
        cfg.output_dir = j.value("output_dir", "");
        cfg.jobs = j.value("jobs", 1);
        if (j.contains("extra_inputs"))
            cfg.extra_inputs = j["extra_inputs"].get<std::vector<std::string>>();
        if (j.contains("adapters")) {
            const auto& a = j["adapters"];
            cfg.adapters.generator = a.value("generator", cfg.adapters.generator);
            cfg.adapters.classifier = a.value("classifier", cfg.adapters.classifier);
            cfg.adapters.parser = a.value("parser", cfg.adapters.parser);
            cfg.adapters.features = a.value("features", cfg.adapters.features);
            if (a.contains("options")) cfg.adapters.options_json = a["options"].dump();
        }
        if (j.contains("edit")) {
            const auto& e = j["edit"];
            if (e.contains("attributes"))
                for (const auto& item : e["attributes"]) {
                    EditSpec::Attribute attr;
                    if (item.is_string())
                        attr.name = item.get<std::string>();
                    else {
                        attr.name = item.value("name", "");
                        attr.present = item.value("present", true);
                    }
                    cfg.edit.attributes.push_back(std::move(attr));
                }
            cfg.edit.epsilon = e.value("epsilon", cfg.edit.epsilon);
            if (e.contains("alpha")) cfg.edit.alpha = e["alpha"].get<double>();
            const std::string mode = e.value("mode", "local");
            if (mode != "local" && mode != "global")
                throw ConfigError("edit.mode: expected local|global, got '" + mode + "'");
            cfg.edit.mode = mode == "global" ? EditSpec::Mode::global : EditSpec::Mode::local;
        }
        if (j.contains("optim")) {
            const auto& o = j["optim"];
            if (o.contains("weights")) cfg.optim.weights = weights_from_json(o["weights"]);
            cfg.optim.lr_latent = o.value("lr_latent", cfg.optim.lr_latent);
            cfg.optim.lr_noise = o.value("lr_noise", cfg.optim.lr_noise);
            cfg.optim.warmup_iters = o.value("warmup_iters", cfg.optim.warmup_iters);
            cfg.optim.latent_iters = o.value("latent_iters", cfg.optim.latent_iters);
            cfg.optim.noise_iters = o.value("noise_iters", cfg.optim.noise_iters);
            cfg.optim.mean_latent_samples = o.value("mean_latent_samples", cfg.optim.mean_latent_samples);
            cfg.optim.seed = o.value("seed", cfg.optim.seed);
            if (o.contains("frame_dump_every"))
                cfg.optim.frame_dump_every = o["frame_dump_every"].get<int>();
            cfg.optim.mask_refresh_every = o.value("mask_refresh_every", cfg.optim.mask_refresh_every);
            cfg.optim.early_stop = o.value("early_stop", cfg.optim.early_stop);
            cfg.optim.early_stop_rel = o.value("early_stop_rel", cfg.optim.early_stop_rel);
            cfg.optim.early_stop_window = o.value("early_stop_window", cfg.optim.early_stop_window);
            cfg.optim.blend_mode = blend_mode_from(o.value("blend_mode", "standard"));
            if (o.contains("union_regions"))
                cfg.optim.union_regions = o["union_regions"].get<std::vector<std::string>>();
        }
        if (j.contains("export")) {
            const auto& x = j["export"];
            cfg.exports.dump_masks = x.value("dump_masks", cfg.exports.dump_masks);
            cfg.exports.dump_frames = x.value("dump_frames", cfg.exports.dump_frames);
            cfg.exports.dump_loss_trace = x.value("dump_loss_trace", cfg.exports.dump_loss_trace);
            cfg.exports.dump_checkpoint = x.value("dump_checkpoint", cfg.exports.dump_checkpoint);
            cfg.exports.dump_variants = x.value("dump_variants", cfg.exports.dump_variants);
        }
        if (j.contains("union_regions"))
            cfg.union_regions = j["union_regions"].get<std::vector<std::string>>();
        if (j.contains("attribute_regions"))
            cfg.attribute_regions =
                j["attribute_regions"].get<std::map<std::string, std::vector<std::string>>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    // union_regions may arrive at either level; optimizer owns the value
    if (!cfg.union_regions.empty() && cfg.optim.union_regions.empty())
        cfg.optim.union_regions = cfg.union_regions;
    return cfg;
}

JobConfig JobConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return from_json(ss.str());
}

void JobConfig::validate() const {
    if (input_path.empty()) throw ConfigError("missing required field: input");
    if (output_dir.empty()) throw ConfigError("missing required field: output_dir");
    if (edit.attributes.empty())
        throw ConfigError("missing required field: edit.attributes (need at least one attribute name)");
    try {
        edit.validate();
        optim.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

AttributeRegionMap resolve_attribute_regions(const JobConfig& cfg) {
    AttributeRegionMap arm;
    arm.regions_by_attribute = cfg.attribute_regions;
    return arm;
}

}  // namespace maskedit
