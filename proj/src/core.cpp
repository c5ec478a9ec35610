#include "maskedit/core.hpp"

namespace maskedit {

Mask block_mean_down2(const Mask& m) {
    const Eigen::Index h = m.rows(), w = m.cols();
    if (h % 2 != 0 || w % 2 != 0)
        throw ShapeError("block_mean_down2: dimensions must be even, got " + std::to_string(h) +
                         "x" + std::to_string(w));
    Mask out(h / 2, w / 2);
    for (Eigen::Index r = 0; r < h / 2; ++r)
        for (Eigen::Index c = 0; c < w / 2; ++c)
            out(r, c) = 0.25 * (m(2 * r, 2 * c) + m(2 * r, 2 * c + 1) + m(2 * r + 1, 2 * c) +
                                m(2 * r + 1, 2 * c + 1));
    return out;
}

Mask block_sum_down2(const Mask& m) {
    const Eigen::Index h = m.rows(), w = m.cols();
    if (h % 2 != 0 || w % 2 != 0)
        throw ShapeError("block_sum_down2: dimensions must be even");
    Mask out(h / 2, w / 2);
    for (Eigen::Index r = 0; r < h / 2; ++r)
        for (Eigen::Index c = 0; c < w / 2; ++c)
            out(r, c) = m(2 * r, 2 * c) + m(2 * r, 2 * c + 1) + m(2 * r + 1, 2 * c) +
                        m(2 * r + 1, 2 * c + 1);
    return out;
}

Mask upsample_nearest2(const Mask& m) {
    Mask out(m.rows() * 2, m.cols() * 2);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double v = m(r, c);
            out(2 * r, 2 * c) = v;
            out(2 * r, 2 * c + 1) = v;
            out(2 * r + 1, 2 * c) = v;
            out(2 * r + 1, 2 * c + 1) = v;
        }
    return out;
}

Mask downscale_area(const Mask& m, int factor) {
    if (factor <= 0) throw std::invalid_argument("downscale_area: factor must be positive");
    if (factor == 1) return m;
    const Eigen::Index h = m.rows(), w = m.cols();
    if (h % factor != 0 || w % factor != 0)
        throw ShapeError("downscale_area: " + std::to_string(h) + "x" + std::to_string(w) +
                         " not divisible by factor " + std::to_string(factor));
    Mask out = Mask::Zero(h / factor, w / factor);
    const double inv = 1.0 / (static_cast<double>(factor) * factor);
    for (Eigen::Index r = 0; r < h; ++r)
        for (Eigen::Index c = 0; c < w; ++c) out(r / factor, c / factor) += m(r, c) * inv;
    return out;
}

Mask upscale_area_adjoint(const Mask& m, int factor) {
    if (factor <= 0) throw std::invalid_argument("upscale_area_adjoint: factor must be positive");
    if (factor == 1) return m;
    Mask out(m.rows() * factor, m.cols() * factor);
    const double inv = 1.0 / (static_cast<double>(factor) * factor);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = m(r / factor, c / factor) * inv;
    return out;
}

}  // namespace maskedit
