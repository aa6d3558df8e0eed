#ifndef SP_ECC_HPP
#define SP_ECC_HPP

#include <cstdint>
#include <vector>

#include "sp/bitmat.hpp"
#include "sp/channel.hpp"

namespace sp {

// Either an ideal capacity-achieving code, whose parity overhead per
// protected bit is H(p)/(1-H(p)), or an (n, k) block code correcting up to
// t errors per codeword.
struct EccSpec {
    enum class Kind { Ideal, Block };
    Kind kind = Kind::Ideal;
    long n = 0;
    long k = 0;
    long t = 0;

    static EccSpec ideal() { return EccSpec{}; }
    static EccSpec block(long n, long k, long t);

    // parity bits per protected payload bit, (n-k)/k
    double overhead(double p) const;
    void validate() const;
};

// H(p) = -p log2 p - (1-p) log2 (1-p); H(0) = H(1) = 0.
double binary_entropy(double p);

// Code rate 1 - H(p) of the capacity-achieving code; requires 0 < p < 1.
double ideal_rate(double p);

struct RedundancyReport {
    long long k_total = 0;
    long long k_pro = 0;
    double r = 0.0;
};

// r = k_pro * (n-k) / (k_total * k), with k_total = m * sum |W_i| and
// k_pro = sum_i |W_i| * popcount(mask_i).
RedundancyReport redundancy(const std::vector<BitMask>& masks,
                            const std::vector<size_t>& layer_sizes, int m,
                            const EccSpec& ecc, double p);

// P[X > t] for X ~ Binomial(n, p); the probability a block decode fails.
// Log-space summation keeps the far tail accurate.
double block_decode_failure_prob(const EccSpec& ecc, double p);

// Applies channel errors under ECC protection.  Ideal kind: protected bits
// are preserved exactly.  Block kind: protected bits are packed into k-bit
// payload blocks in canonical order (layer-major, weight-major,
// bit-position-minor, blocks may span layers); each block independently
// fails with block_decode_failure_prob, keeping its corrupted bits, and is
// restored otherwise.  The final partial block uses the same failure
// probability.  Block draws are keyed by (chan.seed, block index).
LayerBits simulate_protection(const LayerBits& bits,
                              const std::vector<BitMask>& masks,
                              const EccSpec& ecc, const ChannelSpec& chan);

} // namespace sp

#endif
