#include "maskedit/masks.hpp"

namespace maskedit {

const std::vector<std::string>& AttributeRegionMap::regions(const std::string& attr) const {
    auto it = regions_by_attribute.find(attr);
    if (it == regions_by_attribute.end())
        throw std::invalid_argument("unknown attribute '" + attr + "' in attribute-region map");
    return it->second;
}

void AttributeRegionMap::validate_against(const std::vector<std::string>& region_names) const {
    for (const auto& [attr, regions] : regions_by_attribute) {
        for (const auto& r : regions) {
            bool found = false;
            for (const auto& n : region_names)
                if (n == r) { found = true; break; }
            if (!found)
                throw std::invalid_argument("attribute '" + attr + "' maps to region '" + r +
                                            "' which the parser does not provide");
        }
    }
}

Mask target_mask(const RegionMap& parsed, const std::string& attr, const AttributeRegionMap& arm) {
    const auto& regions = arm.regions(attr);
    Mask out;
    for (const auto& name : regions) {
        const Mask& ch = parsed.at(name);
        if (out.size() == 0)
            out = ch;
        else {
            require_same_shape(out, ch, "target_mask");
            out += ch;
        }
    }
    if (out.size() == 0) throw std::invalid_argument("attribute '" + attr + "' maps to no regions");
    return out.min(1.0).max(0.0);
}

Mask relaxed_preserve_mask(const Mask& skin_in, const Mask& target_gen) {
    require_same_shape(skin_in, target_gen, "relaxed_preserve_mask");
    return (skin_in - target_gen).max(0.0);
}

Mask relaxed_shape_target(const Mask& target_in, const Mask& target_gen) {
    require_same_shape(target_in, target_gen, "relaxed_shape_target");
    return (target_in + target_gen).min(1.0);
}

Mask blend_mask(const Mask& skin_in, const Mask& target_in, const Mask& target_gen, BlendMode mode,
                const Mask* union_face) {
    switch (mode) {
        case BlendMode::standard:
            require_same_shape(skin_in, target_in, "blend_mask");
            return (skin_in + target_in).min(1.0).max(0.0);
        case BlendMode::hair_shape:
            require_same_shape(skin_in, target_gen, "blend_mask");
            return (skin_in + target_gen).min(1.0).max(0.0);
        case BlendMode::global:
            if (!union_face)
                throw std::invalid_argument("blend_mask: global mode needs the union mask");
            return *union_face;
    }
    throw std::logic_error("blend_mask: unreachable");
}

Mask union_face_mask(const RegionMap& parsed, const std::vector<std::string>& exclude) {
    if (parsed.size() == 0) throw std::invalid_argument("union_face_mask: empty region map");
    Mask out;
    for (size_t i = 0; i < parsed.size(); ++i) {
        bool skip = false;
        for (const auto& e : exclude)
            if (parsed.names[i] == e) { skip = true; break; }
        if (skip) continue;
        if (out.size() == 0)
            out = parsed.channels[i];
        else
            out += parsed.channels[i];
    }
    if (out.size() == 0)
        throw std::invalid_argument("union_face_mask: all channels excluded");
    return out.min(1.0).max(0.0);
}

std::vector<Mask> mask_pyramid(const Mask& m, const std::vector<int>& scales) {
    std::vector<Mask> out;
    out.reserve(scales.size());
    for (int s : scales) out.push_back(downscale_area(m, s));
    return out;
}

}  // namespace maskedit
