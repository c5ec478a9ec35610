#pragma once

#include "maskedit/config.hpp"
#include "maskedit/metrics.hpp"
#include "maskedit/optimizer.hpp"

#include <string>
#include <vector>

namespace maskedit {
namespace cli {

// Stable exit codes. No success path writes a partial output set: outputs are
// staged into the directory only after the optimization finished.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitLoadError = 3;
inline constexpr int kExitOptimizationAbort = 4;

enum class SweepKind { epsilon, alpha };
enum class EmbedMask { face, no_hair, skin_only };

int cmd_edit(const JobConfig& cfg);
int cmd_sweep(const JobConfig& cfg, SweepKind kind, const std::vector<double>& values);
int cmd_invert(const JobConfig& cfg, EmbedMask mask_mode, int iters);

// Builds the adapter set named in the config through the registry.
AdapterSet make_adapters(const JobConfig& cfg);

// Adapter-default attribute map resolution (config override wins).
AttributeRegionMap attribute_regions_for(const JobConfig& cfg);

// MMSE-only embedding of the masked input region (used by cmd_invert).
struct InvertResult {
    LatentCode w;
    Image image_gen;
    Image image_out;
    std::vector<IterationRecord> trace;
    Mask embed_mask;
};
InvertResult invert_embed(const AdapterSet& models, const Image& input, const Mask& embed_mask,
                          int iters, const OptimConfig& cfg);

}  // namespace cli
}  // namespace maskedit
