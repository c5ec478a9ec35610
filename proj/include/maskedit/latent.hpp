#pragma once

#include "maskedit/core.hpp"

#include <Eigen/Core>

#include <vector>

namespace maskedit {

// Per-layer style vectors; row i is the style vector fed to generator layer i.
struct LatentCode {
    Eigen::MatrixXd styles;  // (layer_count x style_dim)

    LatentCode() = default;
    LatentCode(Eigen::Index layers, Eigen::Index dim) : styles(Eigen::MatrixXd::Zero(layers, dim)) {}

    Eigen::Index layer_count() const { return styles.rows(); }
    Eigen::Index style_dim() const { return styles.cols(); }

    bool allFinite() const { return styles.allFinite(); }
};

// Per-resolution stochastic channels.
struct NoiseStack {
    std::vector<Mask> channels;

    static NoiseStack zeros(const std::vector<std::pair<int, int>>& resolutions) {
        NoiseStack n;
        n.channels.reserve(resolutions.size());
        for (auto [h, w] : resolutions) n.channels.push_back(Mask::Zero(h, w));
        return n;
    }

    bool allFinite() const {
        for (const auto& c : channels)
            if (!c.allFinite()) return false;
        return true;
    }
};

}  // namespace maskedit
