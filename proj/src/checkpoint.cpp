#include "maskedit/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace maskedit {

namespace {
constexpr char kMagic[4] = {'M', 'E', 'D', 'T'};

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}
}  // namespace

void ArrayStore::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    os.write(kMagic, 4);
    write_u32(os, kVersion);
    write_u32(os, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& [name, m] : arrays) {
        write_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(os, static_cast<std::uint32_t>(m.rows()));
        write_u32(os, static_cast<std::uint32_t>(m.cols()));
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                const double v = m(r, c);
                os.write(reinterpret_cast<const char*>(&v), sizeof(double));
            }
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

ArrayStore ArrayStore::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("checkpoint: '" + path + "' is not an array store");
    const std::uint32_t version = read_u32(is);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    const std::uint32_t count = read_u32(is);
    ArrayStore store;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = read_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const std::uint32_t rows = read_u32(is);
        const std::uint32_t cols = read_u32(is);
        Eigen::MatrixXd m(rows, cols);
        for (std::uint32_t r = 0; r < rows; ++r)
            for (std::uint32_t c = 0; c < cols; ++c) {
                double v;
                is.read(reinterpret_cast<char*>(&v), sizeof(double));
                m(r, c) = v;
            }
        if (!is) throw std::runtime_error("checkpoint: truncated file");
        store.arrays.emplace(std::move(name), std::move(m));
    }
    return store;
}

ArrayStore checkpoint_from(const LatentCode& w, const NoiseStack& n) {
    ArrayStore store;
    store.arrays["style"] = w.styles;
    for (size_t i = 0; i < n.channels.size(); ++i)
        store.arrays["noise." + std::to_string(i)] = n.channels[i].matrix();
    return store;
}

void checkpoint_to(const ArrayStore& store, LatentCode* w, NoiseStack* n) {
    if (w) {
        auto it = store.arrays.find("style");
        if (it == store.arrays.end()) throw std::runtime_error("checkpoint: missing 'style' array");
        w->styles = it->second;
    }
    if (n) {
        n->channels.clear();
        for (size_t i = 0;; ++i) {
            auto it = store.arrays.find("noise." + std::to_string(i));
            if (it == store.arrays.end()) break;
            n->channels.push_back(it->second.array());
        }
    }
}

}  // namespace maskedit
