#pragma once

#include "maskedit/core.hpp"
#include "maskedit/latent.hpp"

#include <map>
#include <string>

namespace maskedit {

// Flat container of named real arrays with a version header. Binary layout
// (little-endian): magic "MEDT", u32 version, u32 entry count, then per entry
// u32 name length, name bytes, u32 rows, u32 cols, rows*cols f64 values in
// row-major order.
struct ArrayStore {
    std::map<std::string, Eigen::MatrixXd> arrays;

    void save(const std::string& path) const;
    static ArrayStore load(const std::string& path);

    static constexpr std::uint32_t kVersion = 1;
};

// Checkpoint naming: style vectors under "style", noise channels under "noise.<i>".
ArrayStore checkpoint_from(const LatentCode& w, const NoiseStack& n);
void checkpoint_to(const ArrayStore& store, LatentCode* w, NoiseStack* n);

}  // namespace maskedit
