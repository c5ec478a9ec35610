#pragma once

#include "maskedit/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace maskedit {
namespace io {

// Quantization to 8 bits uses round-half-even (so golden-image tests are
// bit-exact): q = rint(clamp(v,0,1) * 255).
std::uint8_t quantize_u8(double v);
double dequantize_u8(std::uint8_t q);

// Interleaved RGB bytes, row-major.
std::vector<std::uint8_t> to_rgb8(const Image& img);
Image from_rgb8(const std::vector<std::uint8_t>& data, Eigen::Index h, Eigen::Index w);

// Reads an 8-bit image file (PNG and friends) into [0,1] RGB.
Image read_image(const std::string& path);

// Writes 8-bit RGB; format chosen by extension (.png, .ppm, ...).
void write_image(const std::string& path, const Image& img);

// Mask debug export: linear [0,1] -> [0,255] grayscale.
void write_mask(const std::string& path, const Mask& m);
Mask read_mask(const std::string& path);

}  // namespace io
}  // namespace maskedit
