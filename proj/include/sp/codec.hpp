#ifndef SP_CODEC_HPP
#define SP_CODEC_HPP

#include <array>
#include <span>

#include "sp/bitmat.hpp"

namespace sp {

struct NetworkModel;

inline constexpr int kFloat32Bits = 32;

using Bits32 = std::array<uint8_t, kFloat32Bits>;

// Fixed-point representation: weights in [-c, c], quantized to multiples of
// s = c / (2^(m-1) - 1).  Bit 0 is the sign, bits 1..m-1 the magnitude.
struct FixedPointSpec {
    double clamp = 1.0; // c, must be > 0
    int width = 8;      // m, must be >= 2

    double scale() const { return clamp / double((1ull << (width - 1)) - 1); }
    void validate() const;
};

// value = (-1)^b0 * 2^(E-127) * (1.F)_2 with E the 8 exponent bits and F the
// 23 fraction bits.  The formula is applied literally: E = 0 and E = 255 are
// ordinary exponents, there are no denormals, infinities or NaNs, and the
// all-zero pattern decodes to 2^-127.  Total over all 2^32 patterns.
double decode_float32(std::span<const uint8_t> bits);

// Inverse of decode_float32 with round-to-nearest (ties to even) on the
// fraction.  Magnitudes that would round above the largest representable
// value throw std::out_of_range; magnitudes below the smallest (including 0)
// round up to the nearest representable value.
void encode_float32(double w, std::span<uint8_t> out);
Bits32 encode_float32(double w);

// value = (-1)^b0 * (b1..b_{m-1})_2 * s
double decode_fixed(std::span<const uint8_t> bits, const FixedPointSpec& spec);

// Clamps w to [-c, c], rounds the magnitude to the nearest multiple of s
// (ties away from zero).  Zero encodes to the all-zero pattern.
void encode_fixed(double w, const FixedPointSpec& spec, std::span<uint8_t> out);
std::vector<uint8_t> encode_fixed(double w, const FixedPointSpec& spec);

// Representation selector for whole-model conversions.
struct Representation {
    enum class Kind { Float32, Fixed };
    Kind kind = Kind::Float32;
    FixedPointSpec fixed; // used when kind == Fixed

    int width() const { return kind == Kind::Float32 ? kFloat32Bits : fixed.width; }

    static Representation float32() { return Representation{}; }
    static Representation fixed_point(const FixedPointSpec& spec) {
        spec.validate();
        return Representation{Kind::Fixed, spec};
    }
};

// max |w| over every edge layer of the model; default clamp bound for
// fixed-point conversion.
double max_abs_weight(const NetworkModel& model);

// Layer i of the result holds |W_i| rows of width() bits each, rows in the
// layer's canonical weight order.
LayerBits model_to_bits(const NetworkModel& model, const Representation& repr);

// Writes decoded weights back into the model's layers.  Shapes must match.
void bits_to_model(const LayerBits& bits, const Representation& repr,
                   NetworkModel& model);

} // namespace sp

#endif
