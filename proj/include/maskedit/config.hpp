#pragma once

#include "maskedit/losses.hpp"
#include "maskedit/masks.hpp"
#include "maskedit/optimizer.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace maskedit {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adapter selection: names resolved through the registry plus an opaque
// config subtree (checkpoint paths, seeds) forwarded to each factory.
struct AdapterConfig {
    std::string generator = "toy";
    std::string classifier = "toy";
    std::string parser = "toy";
    std::string features = "toy";
    std::string options_json = "{}";  // forwarded verbatim to factories
};

struct ExportOptions {
    bool dump_masks = false;
    bool dump_frames = false;
    bool dump_loss_trace = true;
    bool dump_checkpoint = true;
    bool dump_variants = false;
};

// One fully described job: declarative config file plus flag overrides
// (flags win). Resolves to a valid (EditSpec, OptimConfig) pair before any
// model loads.
struct JobConfig {
    std::string input_path;
    std::vector<std::string> extra_inputs;  // batch mode
    std::string output_dir;
    AdapterConfig adapters;
    EditSpec edit;
    OptimConfig optim;
    ExportOptions exports;
    // Regions composing the face union; empty means every non-"background"
    // channel the parser provides.
    std::vector<std::string> union_regions;
    std::map<std::string, std::vector<std::string>> attribute_regions;  // empty -> adapter default
    int jobs = 1;

    std::string to_json() const;
    static JobConfig from_json(const std::string& text);
    static JobConfig load(const std::string& path);

    void validate() const;  // throws ConfigError naming the offending field
};

AttributeRegionMap resolve_attribute_regions(const JobConfig& cfg);

}  // namespace maskedit
