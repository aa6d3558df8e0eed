#include "sp/channel.hpp"

namespace sp {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;
constexpr uint64_t kWeightSalt = 0xBF58476D1CE4E5B9ull;
constexpr uint64_t kBitSalt = 0x94D049BB133111EBull;
} // namespace

uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

uint64_t derive_seed(uint64_t base, uint64_t stream) {
    return mix64(base + kGolden * (stream + 1));
}

double bit_uniform(uint64_t seed, uint64_t layer, uint64_t weight, uint64_t bit) {
    uint64_t h = mix64(seed ^ (kGolden * (layer + 1)));
    h = mix64(h ^ (kWeightSalt * (weight + 1)));
    h = mix64(h ^ (kBitSalt * (bit + 1)));
    return double(h >> 11) * 0x1p-53;
}

LayerBits inject(const LayerBits& bits, const LayerBits& protected_mask,
                 const ChannelSpec& chan) {
    chan.validate();
    require_same_shape(bits, protected_mask, "inject");

    LayerBits out = bits;
    if (chan.p <= 0.0) return out;

    for (size_t l = 0; l < out.size(); ++l) {
        BitMatrix& mat = out[l];
        const BitMatrix& prot = protected_mask[l];
        const size_t cols = mat.cols();
        for (size_t r = 0; r < mat.rows(); ++r) {
            uint8_t* row = mat.row(r);
            const uint8_t* prow = prot.row(r);
            for (size_t c = 0; c < cols; ++c) {
                if (prow[c]) continue;
                const uint8_t b = row[c];
                if (chan.direction == FlipDirection::ZeroToOneOnly && b == 1)
                    continue;
                if (chan.direction == FlipDirection::OneToZeroOnly && b == 0)
                    continue;
                if (bit_uniform(chan.seed, l, r, c) < chan.p) row[c] = b ^ 1;
            }
        }
    }
    return out;
}

double empirical_flip_rate(const LayerBits& before, const LayerBits& after,
                           const LayerBits& protected_mask) {
    require_same_shape(before, after, "empirical_flip_rate");
    require_same_shape(before, protected_mask, "empirical_flip_rate");
    uint64_t unprotected = 0, flipped = 0;
    for (size_t l = 0; l < before.size(); ++l) {
        const size_t n = before[l].size();
        const uint8_t* b = before[l].data().data();
        const uint8_t* a = after[l].data().data();
        const uint8_t* p = protected_mask[l].data().data();
        for (size_t i = 0; i < n; ++i) {
            if (p[i]) continue;
            ++unprotected;
            if (a[i] != b[i]) ++flipped;
        }
    }
    return unprotected == 0 ? 0.0 : double(flipped) / double(unprotected);
}

} // namespace sp
