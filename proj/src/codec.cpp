#include "sp/codec.hpp"

#include <algorithm>
#include <cmath>

#include "sp/model.hpp"

namespace sp {

void FixedPointSpec::validate() const {
    if (!(clamp > 0.0))
        throw std::invalid_argument("fixed-point clamp bound must be positive");
    if (width < 2 || width > 63)
        throw std::invalid_argument("fixed-point width out of range");
}

double decode_float32(std::span<const uint8_t> bits) {
    if (bits.size() != kFloat32Bits)
        throw std::invalid_argument("decode_float32: need exactly 32 bits");
    int exponent = 0;
    for (int i = 1; i <= 8; ++i) exponent = (exponent << 1) | bits[i];
    uint32_t fraction = 0;
    for (int i = 9; i < 32; ++i) fraction = (fraction << 1) | bits[i];
    double mantissa = 1.0 + double(fraction) * 0x1p-23;
    double value = std::ldexp(mantissa, exponent - 127);
    return bits[0] ? -value : value;
}

void encode_float32(double w, std::span<uint8_t> out) {
    if (out.size() != kFloat32Bits)
        throw std::invalid_argument("encode_float32: need exactly 32 bits");
    if (std::isnan(w))
        throw std::out_of_range("encode_float32: NaN is not representable");
    const uint8_t sign = std::signbit(w) ? 1 : 0;
    double mag = std::fabs(w);
    if (mag == 0.0) {
        // nearest representable magnitude is 2^-127, the all-zero pattern
        std::fill(out.begin(), out.end(), uint8_t(0));
        out[0] = sign;
        return;
    }

    // mag = mant * 2^e2 with mant in [0.5, 1)  =>  exponent field e2 - 1 + 127.
    int e2 = 0;
    std::frexp(mag, &e2);
    int exponent = e2 - 1 + 127;
    long long fraction = 0;
    if (exponent < 0) {
        // Below half the smallest representable magnitude rounds to the
        // all-zero pattern; otherwise to the smallest few fractions.
        exponent = 0;
        double f = mag * 0x1p127 - 1.0; // may be negative
        fraction = f <= 0.0 ? 0 : std::llrint(f * 0x1p23);
    } else if (exponent > 255) {
        throw std::out_of_range("encode_float32: magnitude too large");
    } else {
        fraction = std::llrint((std::ldexp(mag, -(exponent - 127)) - 1.0) * 0x1p23);
        if (fraction == (1ll << 23)) { // rounded up to the next binade
            fraction = 0;
            if (++exponent > 255)
                throw std::out_of_range("encode_float32: magnitude too large");
        }
    }

    out[0] = sign;
    for (int i = 0; i < 8; ++i) out[1 + i] = uint8_t((exponent >> (7 - i)) & 1);
    for (int i = 0; i < 23; ++i) out[9 + i] = uint8_t((fraction >> (22 - i)) & 1);
}

Bits32 encode_float32(double w) {
    Bits32 out{};
    encode_float32(w, out);
    return out;
}

double decode_fixed(std::span<const uint8_t> bits, const FixedPointSpec& spec) {
    spec.validate();
    if (bits.size() != size_t(spec.width))
        throw std::invalid_argument("decode_fixed: bit count does not match spec width");
    long long magnitude = 0;
    for (int i = 1; i < spec.width; ++i) magnitude = (magnitude << 1) | bits[i];
    double value = double(magnitude) * spec.scale();
    return bits[0] ? -value : value;
}

void encode_fixed(double w, const FixedPointSpec& spec, std::span<uint8_t> out) {
    spec.validate();
    if (out.size() != size_t(spec.width))
        throw std::invalid_argument("encode_fixed: bit count does not match spec width");
    const long long qmax = (1ll << (spec.width - 1)) - 1;
    double clamped = std::clamp(w, -spec.clamp, spec.clamp);
    // llround rounds halves away from zero.
    long long q = std::llround(std::fabs(clamped) / spec.scale());
    if (q > qmax) q = qmax;
    uint8_t sign = (clamped < 0.0 && q != 0) ? 1 : 0; // zero is canonical +0
    out[0] = sign;
    for (int i = 1; i < spec.width; ++i)
        out[i] = uint8_t((q >> (spec.width - 1 - i)) & 1);
}

std::vector<uint8_t> encode_fixed(double w, const FixedPointSpec& spec) {
    std::vector<uint8_t> out(size_t(spec.width));
    encode_fixed(w, spec, out);
    return out;
}

double max_abs_weight(const NetworkModel& model) {
    double best = 0.0;
    for (const auto& layer : model.layers)
        for (double w : layer.weights) best = std::max(best, std::fabs(w));
    return best;
}

LayerBits model_to_bits(const NetworkModel& model, const Representation& repr) {
    const int m = repr.width();
    LayerBits out;
    out.reserve(model.layers.size());
    for (const auto& layer : model.layers) {
        BitMatrix mat(layer.weights.size(), size_t(m));
        for (size_t i = 0; i < layer.weights.size(); ++i) {
            std::span<uint8_t> row(mat.row(i), size_t(m));
            if (repr.kind == Representation::Kind::Float32)
                encode_float32(layer.weights[i], row);
            else
                encode_fixed(layer.weights[i], repr.fixed, row);
        }
        out.push_back(std::move(mat));
    }
    return out;
}

void bits_to_model(const LayerBits& bits, const Representation& repr,
                   NetworkModel& model) {
    if (bits.size() != model.layers.size())
        throw std::invalid_argument("bits_to_model: layer count mismatch");
    const int m = repr.width();
    for (size_t l = 0; l < bits.size(); ++l) {
        auto& layer = model.layers[l];
        if (bits[l].rows() != layer.weights.size() || bits[l].cols() != size_t(m))
            throw std::invalid_argument("bits_to_model: shape mismatch");
        for (size_t i = 0; i < layer.weights.size(); ++i) {
            std::span<const uint8_t> row(bits[l].row(i), size_t(m));
            layer.weights[i] = repr.kind == Representation::Kind::Float32
                                   ? decode_float32(row)
                                   : decode_fixed(row, repr.fixed);
        }
    }
}

} // namespace sp
