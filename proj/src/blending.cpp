#include "maskedit/blending.hpp"

namespace maskedit {

Image blend(const Image& image_gen, const Image& image_in, const Mask& b) {
    require_same_shape(image_gen, image_in, "blend");
    require_same_shape(b, image_gen.ch[0], "blend");
    Image out;
    for (int c = 0; c < 3; ++c) out.ch[c] = b * image_gen.ch[c] + (1.0 - b) * image_in.ch[c];
    return out;
}

std::map<std::string, Image> blend_variants(const Image& image_gen, const Image& image_in,
                                            const RegionMaskSet& masks) {
    std::map<std::string, Image> out;
    out.emplace("standard", blend(image_gen, image_in, masks.blend));
    out.emplace("target_input", blend(image_gen, image_in, masks.target));
    out.emplace("target_generated", blend(image_gen, image_in, masks.target_generated));
    return out;
}

}  // namespace maskedit
