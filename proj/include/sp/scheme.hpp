#ifndef SP_SCHEME_HPP
#define SP_SCHEME_HPP

#include <string>
#include <vector>

#include "sp/codec.hpp"
#include "sp/dataset.hpp"
#include "sp/ecc.hpp"
#include "sp/model.hpp"

namespace sp {

// The unit the optimizer searches over: one bit-mask vector per edge layer
// plus the code protecting the selected bits.
struct ProtectionPlan {
    std::vector<BitMask> masks;
    EccSpec ecc;
    double target_r = 0.0;

    int mask_width() const { return masks.empty() ? 0 : int(masks[0].size()); }
    void validate(size_t n_layers) const;
};

struct RewardParams {
    double beta_plus = 1.0;
    double beta_minus = 0.05;
    double gamma = 1.0;          // discount within one iteration
    double baseline_decay = 0.95; // EMA factor for the reward baseline B
};

// Every layer protects its first t bit positions.
ProtectionPlan baseline_plan(int t, size_t n_layers, int m, const EccSpec& ecc,
                             double target_r);

// Largest uniform prefix width whose redundancy stays within target_r.
int max_feasible_prefix(const std::vector<size_t>& layer_sizes, int m,
                        const EccSpec& ecc, double p, double target_r);

// Second-round adjustment of TopBits actions: while r exceeds target_r,
// sweep layers in order decrementing each a_i by one (never below zero),
// stopping as soon as r <= target_r; repeats the sweep if one pass is not
// enough.  Returns the adjusted actions.
std::vector<int> topbits_adjust(std::vector<int> actions,
                                const std::vector<size_t>& layer_sizes, int m,
                                const EccSpec& ecc, double p, double target_r);

// Prefix masks from per-layer protected-bit counts.
ProtectionPlan plan_from_topbits(const std::vector<int>& actions, int m,
                                 const EccSpec& ecc, double target_r);

double reward_topbits(double performance, double clean_performance);

// f(r, r_target): beta_plus * (target - r) when r >= target, else
// beta_minus * (r - target); never positive.
double redundancy_penalty(double r, double target_r, const RewardParams& params);

double reward_bitmask(double performance, double clean_performance, double r,
                      double target_r, const RewardParams& params);

struct EvaluationResult {
    double mean_accuracy = 0.0;
    double stddev_accuracy = 0.0;
    double achieved_r = 0.0;
    int trials = 0;
};

RedundancyReport plan_redundancy(const ProtectionPlan& plan,
                                 const std::vector<size_t>& layer_sizes,
                                 double p);

// Monte-Carlo evaluation: encode the model, then for each trial apply
// simulate_protection with the trial-derived channel seed, decode, and score
// accuracy on the first `limit` samples.  Trial t uses channel seed
// derive_seed(chan.seed, t).
EvaluationResult evaluate_plan(const NetworkModel& model,
                               const ProtectionPlan& plan,
                               const Representation& repr,
                               const ChannelSpec& chan, const Dataset& data,
                               int trials, size_t limit);

// Textual plan files ("splan v1"); format pinned by a golden test.
std::string plan_to_string(const ProtectionPlan& plan, double achieved_r);
ProtectionPlan plan_from_string(const std::string& text, double* achieved_r = nullptr);
void save_plan(const ProtectionPlan& plan, double achieved_r,
               const std::string& path);
ProtectionPlan load_plan(const std::string& path, double* achieved_r = nullptr);

} // namespace sp

#endif
