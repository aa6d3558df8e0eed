#ifndef SP_CHANNEL_HPP
#define SP_CHANNEL_HPP

#include <cstdint>

#include "sp/bitmat.hpp"

namespace sp {

enum class FlipDirection {
    Symmetric,     // every bit flips with probability p
    ZeroToOneOnly, // only bits currently 0 may flip
    OneToZeroOnly, // only bits currently 1 may flip
};

struct ChannelSpec {
    double p = 0.0;
    FlipDirection direction = FlipDirection::Symmetric;
    uint64_t seed = 0;

    void validate() const {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("channel flip probability outside [0,1]");
    }
};

// splitmix64 finalizer; the building block of all counter-based randomness
// in this library.
uint64_t mix64(uint64_t x);

// Stream derivation for indexed trials and sub-streams:
//   derive_seed(s, t) = mix64(s + GOLDEN * (t + 1))
// with GOLDEN = 0x9E3779B97F4A7C15.  Trial t of any repeated experiment uses
// the channel seed derive_seed(base_seed, t).
uint64_t derive_seed(uint64_t base, uint64_t stream);

// Uniform in [0,1) keyed by (seed, layer, weight, bit).  Stateless, so
// injection is order-independent: the same position sees the same draw no
// matter how the matrices are traversed or masked.
double bit_uniform(uint64_t seed, uint64_t layer, uint64_t weight, uint64_t bit);

// Flips each unprotected bit independently with probability p, restricted by
// direction.  Protected bits (mask value 1) pass through untouched.  Output
// is a pure function of (bits, protected_mask, chan).
LayerBits inject(const LayerBits& bits, const LayerBits& protected_mask,
                 const ChannelSpec& chan);

// Fraction of unprotected bits that differ between the two matrices
// (0 if there are no unprotected bits).
double empirical_flip_rate(const LayerBits& before, const LayerBits& after,
                           const LayerBits& protected_mask);

} // namespace sp

#endif
