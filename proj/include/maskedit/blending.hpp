#pragma once

#include "maskedit/core.hpp"
#include "maskedit/masks.hpp"

#include <map>
#include <string>

namespace maskedit {

// Convex per-pixel combination: b ⊙ gen + (1-b) ⊙ in. No hidden clamping;
// outputs stay in [0,1] iff the inputs were.
Image blend(const Image& image_gen, const Image& image_in, const Mask& b);

// Side-by-side outputs for the standard mask B and the two skin-free variants:
// "standard" (B), "target_input" (S_tar(I)), "target_generated" (S_tar(I_G)).
std::map<std::string, Image> blend_variants(const Image& image_gen, const Image& image_in,
                                            const RegionMaskSet& masks);

}  // namespace maskedit
