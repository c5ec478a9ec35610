#pragma once

#include "maskedit/core.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace maskedit {

// Maps an editable attribute to the parser regions it manipulates.
struct AttributeRegionMap {
    std::map<std::string, std::vector<std::string>> regions_by_attribute;

    bool contains(const std::string& attr) const {
        return regions_by_attribute.count(attr) != 0;
    }
    const std::vector<std::string>& regions(const std::string& attr) const;

    // Every mapped region must exist among `region_names`.
    void validate_against(const std::vector<std::string>& region_names) const;
};

// Masks produced for one edit. `target` is the target region of the input
// image; `target_generated` the same region on the final generated image.
struct RegionMaskSet {
    enum class Source { from_input, from_generated };

    Mask skin;
    Mask target;
    Mask target_generated;
    std::optional<Mask> union_face;  // global-editing mode only
    Mask blend;                      // mask used for the final composite
    Source source = Source::from_input;
};

enum class BlendMode { standard, hair_shape, global };

// Pixel-wise sum of the regions mapped to `attr`, clamped to [0,1].
Mask target_mask(const RegionMap& parsed, const std::string& attr, const AttributeRegionMap& arm);

// max(skin - target_gen, 0): preserve fewer pixels where the generated target
// region has grown.
Mask relaxed_preserve_mask(const Mask& skin_in, const Mask& target_gen);

// min(target_in + target_gen, 1): union; covers at least the original shape.
Mask relaxed_shape_target(const Mask& target_in, const Mask& target_gen);

// standard: clamp(skin_in + target_in); hair_shape: clamp(skin_in + target_gen);
// global: the provided union mask.
Mask blend_mask(const Mask& skin_in, const Mask& target_in, const Mask& target_gen,
                BlendMode mode, const Mask* union_face = nullptr);

// Clamped sum over all region channels not listed in `exclude`
// (default: everything but "background").
Mask union_face_mask(const RegionMap& parsed,
                     const std::vector<std::string>& exclude = {"background"});

// Area-average downscaled copies, one per scale factor (factor 1 = identity).
std::vector<Mask> mask_pyramid(const Mask& m, const std::vector<int>& scales);

}  // namespace maskedit
