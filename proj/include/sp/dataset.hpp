#ifndef SP_DATASET_HPP
#define SP_DATASET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sp {

// Labeled image set, single channel, pixels 0..255.
struct Dataset {
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> pixels; // size() * rows * cols, image-major
    std::vector<uint8_t> labels;

    size_t size() const { return labels.size(); }
    std::span<const uint8_t> image(size_t i) const {
        const size_t px = size_t(rows) * size_t(cols);
        return {pixels.data() + i * px, px};
    }
};

// IDX files as used by MNIST: big-endian magic 0x00000803 for images
// (u8 pixels, dims n x rows x cols) and 0x00000801 for labels.
Dataset load_idx_dataset(const std::string& images_path,
                         const std::string& labels_path);

} // namespace sp

#endif
