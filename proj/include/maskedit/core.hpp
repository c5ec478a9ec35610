#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace maskedit {

// Spatial grids are row-major in meaning: rows index y (height), cols index x
// (width). Values are doubles throughout; probabilistic masks live in [0,1].
using Mask = Eigen::ArrayXXd;

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when an optimization stage produces a non-finite loss.
struct OptimizationAbort : std::runtime_error {
    OptimizationAbort(std::string stage_, int iteration_, const std::string& what_)
        : std::runtime_error(what_), stage(std::move(stage_)), iteration(iteration_) {}
    std::string stage;
    int iteration = 0;
};

// RGB image, channel-first (3 x H x W), values nominally in [0,1].
struct Image {
    std::array<Mask, 3> ch;

    Image() = default;
    static Image zeros(Eigen::Index h, Eigen::Index w) {
        Image img;
        for (auto& c : img.ch) c = Mask::Zero(h, w);
        return img;
    }
    static Image constant(Eigen::Index h, Eigen::Index w, double v) {
        Image img;
        for (auto& c : img.ch) c = Mask::Constant(h, w, v);
        return img;
    }

    Eigen::Index height() const { return ch[0].rows(); }
    Eigen::Index width() const { return ch[0].cols(); }

    bool same_shape(const Image& other) const {
        return height() == other.height() && width() == other.width();
    }
};

inline void require_same_shape(const Image& a, const Image& b, const char* where) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(where) + ": image shapes differ (" +
                         std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                         std::to_string(b.height()) + "x" + std::to_string(b.width()) + ")");
}

inline void require_same_shape(const Mask& a, const Mask& b, const char* where) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(where) + ": mask shapes differ (" +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
}

// Named probabilistic region channels as produced by a face parser.
struct RegionMap {
    std::vector<std::string> names;
    std::vector<Mask> channels;

    int index_of(const std::string& name) const {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }
    const Mask& at(const std::string& name) const {
        int i = index_of(name);
        if (i < 0) throw std::out_of_range("RegionMap: no region named '" + name + "'");
        return channels[static_cast<size_t>(i)];
    }
    size_t size() const { return channels.size(); }
};

// 2x2 block mean; both dimensions must be even.
Mask block_mean_down2(const Mask& m);

// Nearest-neighbour 2x upsampling (block replication).
Mask upsample_nearest2(const Mask& m);

// Area-average downsampling by an integer factor (dimensions must divide).
Mask downscale_area(const Mask& m, int factor);

// Adjoint of upsample_nearest2: 2x2 block sum.
Mask block_sum_down2(const Mask& m);

// Adjoint of downscale_area: spreads each cell value over its block, / factor^2.
Mask upscale_area_adjoint(const Mask& m, int factor);

}  // namespace maskedit
