#include "sp/ecc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sp {

namespace {
constexpr uint64_t kBlockSalt = 0xD6E8FEB86659FD93ull;
} // namespace

EccSpec EccSpec::block(long n, long k, long t) {
    EccSpec spec;
    spec.kind = Kind::Block;
    spec.n = n;
    spec.k = k;
    spec.t = t;
    spec.validate();
    return spec;
}

void EccSpec::validate() const {
    if (kind == Kind::Block) {
        if (k <= 0 || n <= k)
            throw std::invalid_argument("block code needs 0 < k < n");
        if (t < 1)
            throw std::invalid_argument("block code needs t >= 1");
    }
}

double EccSpec::overhead(double p) const {
    if (kind == Kind::Block) return double(n - k) / double(k);
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument(
            "ideal ECC overhead is undefined for a degenerate channel (H(p)=0)");
    const double h = binary_entropy(p);
    return h / (1.0 - h);
}

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("binary_entropy: p outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double ideal_rate(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("ideal_rate: need 0 < p < 1");
    return 1.0 - binary_entropy(p);
}

RedundancyReport redundancy(const std::vector<BitMask>& masks,
                            const std::vector<size_t>& layer_sizes, int m,
                            const EccSpec& ecc, double p) {
    if (masks.size() != layer_sizes.size())
        throw std::invalid_argument("redundancy: one mask per layer required");
    RedundancyReport rep;
    for (size_t i = 0; i < masks.size(); ++i) {
        if (masks[i].size() != size_t(m))
            throw std::invalid_argument("redundancy: mask width != m");
        long long ones = 0;
        for (uint8_t b : masks[i]) ones += b ? 1 : 0;
        rep.k_total += (long long)m * (long long)layer_sizes[i];
        rep.k_pro += ones * (long long)layer_sizes[i];
    }
    const double factor = ecc.overhead(p);
    // protected fraction first: an all-ones plan gives exactly (n-k)/k
    rep.r = rep.k_total == 0
                ? 0.0
                : double(rep.k_pro) / double(rep.k_total) * factor;
    return rep;
}

double block_decode_failure_prob(const EccSpec& ecc, double p) {
    if (ecc.kind != EccSpec::Kind::Block)
        throw std::invalid_argument("block_decode_failure_prob: block kind required");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("block_decode_failure_prob: p outside [0,1]");
    const long n = ecc.n, t = ecc.t;
    if (t >= n) return 0.0;
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0; // X = n > t

    // log-sum-exp over the upper tail j = t+1 .. n
    const double lp = std::log(p), lq = std::log1p(-p);
    const double lgn = std::lgamma(double(n) + 1.0);
    double max_lt = -std::numeric_limits<double>::infinity();
    std::vector<double> logterms;
    logterms.reserve(size_t(n - t));
    for (long j = t + 1; j <= n; ++j) {
        double lt = lgn - std::lgamma(double(j) + 1.0) -
                    std::lgamma(double(n - j) + 1.0) + double(j) * lp +
                    double(n - j) * lq;
        logterms.push_back(lt);
        max_lt = std::max(max_lt, lt);
    }
    double sum = 0.0;
    for (double lt : logterms) sum += std::exp(lt - max_lt);
    double result = std::exp(max_lt) * sum;
    return std::min(result, 1.0);
}

LayerBits simulate_protection(const LayerBits& bits,
                              const std::vector<BitMask>& masks,
                              const EccSpec& ecc, const ChannelSpec& chan) {
    ecc.validate();
    if (masks.size() != bits.size())
        throw std::invalid_argument("simulate_protection: one mask per layer required");
    for (size_t l = 0; l < bits.size(); ++l)
        if (!bits[l].empty() && masks[l].size() != bits[l].cols())
            throw std::invalid_argument("simulate_protection: mask width mismatch");

    // Expand per-layer masks to per-bit protection matrices.
    LayerBits prot;
    prot.reserve(bits.size());
    for (size_t l = 0; l < bits.size(); ++l) {
        BitMatrix pm(bits[l].rows(), bits[l].cols());
        for (size_t r = 0; r < pm.rows(); ++r)
            for (size_t c = 0; c < pm.cols(); ++c) pm(r, c) = masks[l][c];
        prot.push_back(std::move(pm));
    }

    if (ecc.kind == EccSpec::Kind::Ideal) {
        // Protected bits never see errors; decoding always succeeds.
        return inject(bits, prot, chan);
    }

    // Block kind: corrupt everything, then restore the protected bits of
    // every block whose decode succeeds.
    LayerBits none;
    none.reserve(bits.size());
    for (const auto& mat : bits) none.emplace_back(mat.rows(), mat.cols());
    LayerBits out = inject(bits, none, chan);

    const double pfail = block_decode_failure_prob(ecc, chan.p);
    const uint64_t block_seed = chan.seed ^ kBlockSalt;
    long long index_in_block = 0;
    uint64_t block_index = 0;
    bool block_fails = bit_uniform(block_seed, block_index, 0, 0) < pfail;
    for (size_t l = 0; l < bits.size(); ++l) {
        for (size_t r = 0; r < bits[l].rows(); ++r) {
            for (size_t c = 0; c < bits[l].cols(); ++c) {
                if (!masks[l][c]) continue;
                if (!block_fails) out[l](r, c) = bits[l](r, c);
                if (++index_in_block == ecc.k) {
                    index_in_block = 0;
                    ++block_index;
                    block_fails =
                        bit_uniform(block_seed, block_index, 0, 0) < pfail;
                }
            }
        }
    }
    return out;
}

} // namespace sp
