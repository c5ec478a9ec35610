#include "maskedit/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

using maskedit::JobConfig;

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> inputs;
    std::string out_dir;
    std::vector<std::string> attrs;
    std::optional<double> epsilon;
    std::optional<double> alpha;
    std::string mode;
    std::optional<std::uint64_t> seed;
    std::optional<int> dump_frames;
    std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "job config file (JSON)");
    cmd->add_option("--input", f.inputs, "input image path (repeat for batch mode)");
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--attr", f.attrs, "attribute NAME[=present|absent] (repeatable)");
    cmd->add_option("--epsilon", f.epsilon, "label smoothing / intensity in [0, 0.5)");
    cmd->add_option("--alpha", f.alpha, "target region size factor (> 0)");
    cmd->add_option("--mode", f.mode, "editing mode: local|global");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--dump-frames", f.dump_frames, "write intermediate frames every N iterations");
    cmd->add_option("--jobs", f.jobs, "parallel jobs in batch mode");
}

// flags win over the config file
JobConfig resolve(const CommonFlags& f) {
    JobConfig cfg;
    if (!f.config_path.empty()) cfg = JobConfig::load(f.config_path);
    if (!f.inputs.empty()) {
        cfg.input_path = f.inputs.front();
        cfg.extra_inputs.assign(f.inputs.begin() + 1, f.inputs.end());
    }
    if (!f.out_dir.empty()) cfg.output_dir = f.out_dir;
    if (!f.attrs.empty()) {
        cfg.edit.attributes.clear();
        for (const auto& spec : f.attrs) {
            maskedit::EditSpec::Attribute attr;
            const auto eq = spec.find('=');
            if (eq == std::string::npos) {
                attr.name = spec;
            } else {
                attr.name = spec.substr(0, eq);
                const std::string state = spec.substr(eq + 1);
                if (state == "present")
                    attr.present = true;
                else if (state == "absent")
                    attr.present = false;
                else
                    throw maskedit::ConfigError("--attr: expected present|absent after '=', got '" +
                                                state + "'");
            }
            cfg.edit.attributes.push_back(std::move(attr));
        }
    }
    if (f.epsilon) cfg.edit.epsilon = *f.epsilon;
    if (f.alpha) cfg.edit.alpha = *f.alpha;
    if (!f.mode.empty()) {
        if (f.mode != "local" && f.mode != "global")
            throw maskedit::ConfigError("--mode: expected local|global, got '" + f.mode + "'");
        cfg.edit.mode = f.mode == "global" ? maskedit::EditSpec::Mode::global
                                           : maskedit::EditSpec::Mode::local;
    }
    if (f.seed) cfg.optim.seed = *f.seed;
    if (f.dump_frames) {
        cfg.optim.frame_dump_every = *f.dump_frames;
        cfg.exports.dump_frames = true;
    }
    if (f.jobs) cfg.jobs = *f.jobs;
    return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) values.push_back(std::stod(item));
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"masked latent-code optimization for attribute-conditioned image editing"};
    app.require_subcommand(1);

    CommonFlags edit_flags, sweep_flags, invert_flags;
    auto* edit = app.add_subcommand("edit", "run one edit job");
    add_common(edit, edit_flags);

    auto* sweep = app.add_subcommand("sweep", "run an epsilon or alpha sweep");
    add_common(sweep, sweep_flags);
    std::string sweep_kind;
    std::string sweep_values;
    sweep->add_option("--sweep", sweep_kind, "swept parameter: epsilon|alpha")->required();
    sweep->add_option("--values", sweep_values, "comma-separated sweep values")->required();

    auto* invert = app.add_subcommand("invert", "masked reconstruction benchmark");
    add_common(invert, invert_flags);
    std::string embed_mask = "face";
    int invert_iters = 2000;
    invert->add_option("--embed-mask", embed_mask, "embedding region: face|no_hair|skin_only");
    invert->add_option("--iters", invert_iters, "reconstruction iterations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (edit->parsed()) return maskedit::cli::cmd_edit(resolve(edit_flags));
        if (sweep->parsed()) {
            maskedit::cli::SweepKind kind;
            if (sweep_kind == "epsilon")
                kind = maskedit::cli::SweepKind::epsilon;
            else if (sweep_kind == "alpha")
                kind = maskedit::cli::SweepKind::alpha;
            else
                throw maskedit::ConfigError("--sweep: expected epsilon|alpha, got '" + sweep_kind + "'");
            return maskedit::cli::cmd_sweep(resolve(sweep_flags), kind, parse_values(sweep_values));
        }
        if (invert->parsed()) {
            maskedit::cli::EmbedMask mask;
            if (embed_mask == "face")
                mask = maskedit::cli::EmbedMask::face;
            else if (embed_mask == "no_hair")
                mask = maskedit::cli::EmbedMask::no_hair;
            else if (embed_mask == "skin_only")
                mask = maskedit::cli::EmbedMask::skin_only;
            else
                throw maskedit::ConfigError("--embed-mask: expected face|no_hair|skin_only, got '" +
                                            embed_mask + "'");
            return maskedit::cli::cmd_invert(resolve(invert_flags), mask, invert_iters);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return maskedit::cli::kExitConfigError;
    }
    return maskedit::cli::kExitConfigError;
}
