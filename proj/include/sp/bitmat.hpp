#ifndef SP_BITMAT_HPP
#define SP_BITMAT_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sp {

// Per-layer bit-mask vector: one flag per bit position, index 0 = sign bit.
using BitMask = std::vector<uint8_t>;

// Dense bit matrix for one edge layer: one row per weight, one column per
// bit position (column 0 = sign bit).  Stored one byte per bit; desk-scale
// models stay well under a megabyte per copy.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(size_t rows, size_t cols, uint8_t fill = 0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    uint8_t at(size_t r, size_t c) const { return data_[r * cols_ + c]; }
    uint8_t& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
    uint8_t operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }

    const uint8_t* row(size_t r) const { return data_.data() + r * cols_; }
    uint8_t* row(size_t r) { return data_.data() + r * cols_; }

    const std::vector<uint8_t>& data() const { return data_; }
    std::vector<uint8_t>& data() { return data_; }

    bool same_shape(const BitMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_;
    }
    friend bool operator==(const BitMatrix& a, const BitMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<uint8_t> data_;
};

// One BitMatrix per edge layer.
using LayerBits = std::vector<BitMatrix>;

inline void require_same_shape(const LayerBits& a, const LayerBits& b,
                               const char* what) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(what) + ": layer count mismatch");
    for (size_t i = 0; i < a.size(); ++i)
        if (!a[i].same_shape(b[i]))
            throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

} // namespace sp

#endif
