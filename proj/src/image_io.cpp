#include "maskedit/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>
#include <filesystem>

namespace maskedit {
namespace io {

std::uint8_t quantize_u8(double v) {
    const double clamped = std::min(1.0, std::max(0.0, v));
    // nearbyint honours the default round-to-nearest-even mode
    return static_cast<std::uint8_t>(std::nearbyint(clamped * 255.0));
}

double dequantize_u8(std::uint8_t q) { return static_cast<double>(q) / 255.0; }

std::vector<std::uint8_t> to_rgb8(const Image& img) {
    const Eigen::Index h = img.height(), w = img.width();
    std::vector<std::uint8_t> out(static_cast<size_t>(h * w * 3));
    size_t i = 0;
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) out[i++] = quantize_u8(img.ch[c](y, x));
    return out;
}

Image from_rgb8(const std::vector<std::uint8_t>& data, Eigen::Index h, Eigen::Index w) {
    if (static_cast<Eigen::Index>(data.size()) != h * w * 3)
        throw ShapeError("from_rgb8: byte count does not match dimensions");
    Image img = Image::zeros(h, w);
    size_t i = 0;
    for (Eigen::Index y = 0; y < h; ++y)
        for (Eigen::Index x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) img.ch[c](y, x) = dequantize_u8(data[i++]);
    return img;
}

Image read_image(const std::string& path) {
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw std::runtime_error("cannot read image file '" + path + "'");
    Image img = Image::zeros(bgr.rows, bgr.cols);
    for (int y = 0; y < bgr.rows; ++y)
        for (int x = 0; x < bgr.cols; ++x) {
            const auto& px = bgr.at<cv::Vec3b>(y, x);
            img.ch[0](y, x) = dequantize_u8(px[2]);
            img.ch[1](y, x) = dequantize_u8(px[1]);
            img.ch[2](y, x) = dequantize_u8(px[0]);
        }
    return img;
}

void write_image(const std::string& path, const Image& img) {
    cv::Mat bgr(static_cast<int>(img.height()), static_cast<int>(img.width()), CV_8UC3);
    for (int y = 0; y < bgr.rows; ++y)
        for (int x = 0; x < bgr.cols; ++x)
            bgr.at<cv::Vec3b>(y, x) = cv::Vec3b(quantize_u8(img.ch[2](y, x)),
                                                quantize_u8(img.ch[1](y, x)),
                                                quantize_u8(img.ch[0](y, x)));
    if (!cv::imwrite(path, bgr))
        throw std::runtime_error("cannot write image file '" + path + "'");
}

void write_mask(const std::string& path, const Mask& m) {
    cv::Mat gray(static_cast<int>(m.rows()), static_cast<int>(m.cols()), CV_8UC1);
    for (int y = 0; y < gray.rows; ++y)
        for (int x = 0; x < gray.cols; ++x) gray.at<std::uint8_t>(y, x) = quantize_u8(m(y, x));
    if (!cv::imwrite(path, gray))
        throw std::runtime_error("cannot write mask file '" + path + "'");
}

Mask read_mask(const std::string& path) {
    cv::Mat gray = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (gray.empty()) throw std::runtime_error("cannot read mask file '" + path + "'");
    Mask m(gray.rows, gray.cols);
    for (int y = 0; y < gray.rows; ++y)
        for (int x = 0; x < gray.cols; ++x) m(y, x) = dequantize_u8(gray.at<std::uint8_t>(y, x));
    return m;
}

}  // namespace io
}  // namespace maskedit
