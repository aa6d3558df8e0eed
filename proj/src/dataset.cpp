#include "sp/dataset.hpp"

#include <fstream>
#include <stdexcept>

namespace sp {

namespace {

uint32_t read_be32(std::istream& in) {
    uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) |
           (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

} // namespace

Dataset load_idx_dataset(const std::string& images_path,
                         const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("cannot open " + images_path);
    if (read_be32(img) != 0x00000803u)
        throw std::runtime_error("bad image magic in " + images_path);
    uint32_t n = read_be32(img);
    uint32_t rows = read_be32(img);
    uint32_t cols = read_be32(img);

    Dataset ds;
    ds.rows = int(rows);
    ds.cols = int(cols);
    ds.pixels.resize(size_t(n) * rows * cols);
    img.read(reinterpret_cast<char*>(ds.pixels.data()),
             std::streamsize(ds.pixels.size()));
    if (!img) throw std::runtime_error("truncated image file " + images_path);

    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open " + labels_path);
    if (read_be32(lab) != 0x00000801u)
        throw std::runtime_error("bad label magic in " + labels_path);
    uint32_t nl = read_be32(lab);
    if (nl != n)
        throw std::runtime_error("image/label count mismatch for " + images_path);
    ds.labels.resize(nl);
    lab.read(reinterpret_cast<char*>(ds.labels.data()), std::streamsize(nl));
    if (!lab) throw std::runtime_error("truncated label file " + labels_path);

    if (ds.labels.empty())
        throw std::runtime_error("empty dataset " + images_path);
    return ds;
}

} // namespace sp
