#ifndef SP_DDPG_HPP
#define SP_DDPG_HPP

#include <array>
#include <deque>
#include <random>

#include "sp/gradnet.hpp"
#include "sp/model.hpp"
#include "sp/scheme.hpp"

namespace sp {

enum class ActionMode { BitMask, TopBits };

// Local state of one layer's agent: the six geometry features scaled to
// [0,1] by per-feature maxima over the model, followed by the previous
// layer's action encoding (all zeros for the first layer).
struct LocalState {
    std::vector<double> features;
};

// Executed action of one layer: a full mask (BitMask mode) or a protected
// prefix width in [0, m] (TopBits mode).
struct ActionValue {
    ActionMode mode = ActionMode::TopBits;
    BitMask mask;  // BitMask mode
    int count = 0; // TopBits mode
};

// Network-input encoding of an action: m values in {0,1} for BitMask,
// a single value count/m for TopBits.
int action_dim(ActionMode mode, int m);
std::vector<double> encode_action(const ActionValue& a, int m);

// Scales the six geometry features by their maxima over the model.
struct StateNormalizer {
    std::array<double, 6> maxima{};
    static StateNormalizer from(const std::vector<LayerMeta>& meta);
    std::vector<double> normalize(const LayerMeta& m) const;
};

// One state per layer; prev_action_encs[i] is the encoding of a_i (the
// entry for the layer before layer 0 is the all-zero constant).
std::vector<LocalState> build_local_states(
    const std::vector<LayerMeta>& meta, const StateNormalizer& norm,
    const std::vector<std::vector<double>>& prev_action_encs, ActionMode mode,
    int m);

// Actor forward plus additive Gaussian exploration noise on the raw
// outputs, clamped to the encoded range and rounded to the action grid.
// noise_scale is in encoded units ([0,1] per dimension).
ActionValue act(const GradNet& actor, const LocalState& state,
                double noise_scale, ActionMode mode, int m,
                std::mt19937_64& rng);

double q_value(const GradNet& critic, const LocalState& state,
               std::span<const double> action_enc);

struct Transition {
    LocalState state;
    std::vector<double> action_enc;
    LocalState next_state; // ignored when terminal
    double reward = 0.0;
    bool terminal = false;
};

// Bounded FIFO; when full, pushing evicts the oldest transition.
class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {}
    void push(Transition t);
    size_t size() const { return buffer_.size(); }
    size_t capacity() const { return capacity_; }
    const Transition& operator[](size_t i) const { return buffer_[i]; }
    std::vector<const Transition*> sample(size_t count, std::mt19937_64& rng) const;

private:
    size_t capacity_;
    std::deque<Transition> buffer_;
};

// One descent step on the mean squared critic target error
//   (Q(s,a) - gamma * Q_target(s', actor_target(s')) - (R - B))^2
// over the batch, with the bootstrap term dropped on terminal transitions.
// Returns the pre-step loss.
double critic_update(GradNet& critic, AdamState& critic_opt,
                     const GradNet& target_actor, const GradNet& target_critic,
                     const std::vector<const Transition*>& batch, double gamma,
                     double baseline, double lr);

// One ascent step on mean Q(s, actor(s)) with the critic frozen; gradients
// reach the actor through the critic's input-gradient path.  Returns the
// pre-step loss (-mean Q).
double actor_update(GradNet& actor, AdamState& actor_opt, const GradNet& critic,
                    const std::vector<const Transition*>& batch, double lr);

// Abstracts how a plan's performance is measured so the training loop can
// run against the real model or a synthetic reward in tests.
struct PlanEvaluator {
    virtual ~PlanEvaluator() = default;
    virtual double clean_performance() = 0;
    // single noise draw, seeded
    virtual double measure(const ProtectionPlan& plan, uint64_t seed) = 0;
    virtual EvaluationResult full_eval(const ProtectionPlan& plan, int trials) = 0;
};

// Real evaluator: encode -> protect -> corrupt -> decode -> accuracy.
class ModelPlanEvaluator : public PlanEvaluator {
public:
    ModelPlanEvaluator(const NetworkModel& model, const Representation& repr,
                       const ChannelSpec& chan, const Dataset& data,
                       size_t reward_limit, size_t final_limit);
    double clean_performance() override;
    double measure(const ProtectionPlan& plan, uint64_t seed) override;
    EvaluationResult full_eval(const ProtectionPlan& plan, int trials) override;

private:
    const NetworkModel& model_;
    Representation repr_;
    ChannelSpec chan_;
    const Dataset& data_;
    size_t reward_limit_;
    size_t final_limit_;
    double clean_ = -1.0;
};

struct OptimizerConfig {
    ActionMode mode = ActionMode::TopBits;
    int m = 32;
    double target_r = 0.0;
    int episodes = 300;
    RewardParams reward;
    size_t replay_capacity = 2000;
    size_t batch_size = 64;
    int updates_per_iteration = 4;
    double noise_start = 0.5;
    double noise_end = 0.05;
    double lr_actor = 1e-4;
    double lr_critic = 1e-3;
    double delta = 0.01; // target-network soft-update step
    uint64_t master_seed = 1;
    int top_candidates = 5;   // plans re-evaluated at the end
    int final_trials = 100;
};

struct TrainingLogRow {
    int iteration = 0;
    double r = 0.0;
    double performance = 0.0;
    double reward = 0.0;
    double loss_actor = 0.0;
    double loss_critic = 0.0;
};

// Checkpoint of the four networks, in the order actor, critic,
// target actor, target critic.
struct DdpgNets {
    GradNet actor, critic, target_actor, target_critic;
};

struct OptimizationResult {
    ProtectionPlan best_plan;
    EvaluationResult best_eval;
    std::vector<TrainingLogRow> log;
    DdpgNets nets;
};

// The layer-sequential training loop: per iteration generate a_1..a_N with
// the actor (TopBits adds the decrement pass), evaluate the plan for the
// shared reward, push N transitions, and run the four-network update steps.
// Returns the best plan found with r <= target_r, re-evaluated over
// final_trials; with a zero episode budget (or nothing feasible) falls back
// to the widest feasible uniform-prefix baseline plan.
OptimizationResult run_optimization(const OptimizerConfig& config,
                                    const std::vector<LayerMeta>& meta,
                                    const std::vector<size_t>& sizes,
                                    const EccSpec& ecc, double p,
                                    PlanEvaluator& evaluator);

void save_ddpg_checkpoint(const DdpgNets& nets, const std::string& path);
DdpgNets load_ddpg_checkpoint(const std::string& path);

} // namespace sp

#endif
