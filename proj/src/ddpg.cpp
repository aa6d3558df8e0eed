#include "sp/ddpg.hpp"

#include <algorithm>
#include <cmath>

#include "sp/inference.hpp"

namespace sp {

int action_dim(ActionMode mode, int m) {
    return mode == ActionMode::BitMask ? m : 1;
}

std::vector<double> encode_action(const ActionValue& a, int m) {
    if (a.mode == ActionMode::BitMask) {
        if (a.mask.size() != size_t(m))
            throw std::invalid_argument("encode_action: mask width != m");
        std::vector<double> enc(a.mask.begin(), a.mask.end());
        return enc;
    }
    if (a.count < 0 || a.count > m)
        throw std::invalid_argument("encode_action: count out of [0, m]");
    return {double(a.count) / double(m)};
}

StateNormalizer StateNormalizer::from(const std::vector<LayerMeta>& meta) {
    StateNormalizer norm;
    norm.maxima.fill(1.0);
    for (const auto& l : meta) {
        norm.maxima[0] = std::max(norm.maxima[0], double(l.c_in));
        norm.maxima[1] = std::max(norm.maxima[1], double(l.c_out));
        norm.maxima[2] = std::max(norm.maxima[2], double(l.kernel));
        norm.maxima[3] = std::max(norm.maxima[3], double(l.stride));
        norm.maxima[4] = std::max(norm.maxima[4], double(l.feat));
        norm.maxima[5] = std::max(norm.maxima[5], double(l.w_count));
    }
    return norm;
}

std::vector<double> StateNormalizer::normalize(const LayerMeta& m) const {
    return {double(m.c_in) / maxima[0],  double(m.c_out) / maxima[1],
            double(m.kernel) / maxima[2], double(m.stride) / maxima[3],
            double(m.feat) / maxima[4],   double(m.w_count) / maxima[5]};
}

std::vector<LocalState> build_local_states(
    const std::vector<LayerMeta>& meta, const StateNormalizer& norm,
    const std::vector<std::vector<double>>& prev_action_encs, ActionMode mode,
    int m) {
    const size_t dim = size_t(action_dim(mode, m));
    if (prev_action_encs.size() != meta.size())
        throw std::invalid_argument("build_local_states: need one previous action per layer");
    std::vector<LocalState> states;
    states.reserve(meta.size());
    for (size_t i = 0; i < meta.size(); ++i) {
        LocalState s;
        s.features = norm.normalize(meta[i]);
        const std::vector<double> zeros(dim, 0.0); // a_0 constant
        const auto& prev = i == 0 ? zeros : prev_action_encs[i - 1];
        if (prev.size() != dim)
            throw std::invalid_argument("build_local_states: bad action encoding size");
        s.features.insert(s.features.end(), prev.begin(), prev.end());
        states.push_back(std::move(s));
    }
    return states;
}

ActionValue act(const GradNet& actor, const LocalState& state,
                double noise_scale, ActionMode mode, int m,
                std::mt19937_64& rng) {
    std::vector<double> raw = net_forward(actor, state.features);
    if (int(raw.size()) != action_dim(mode, m))
        throw std::invalid_argument("act: actor output size does not match mode");
    if (noise_scale > 0.0) {
        std::normal_distribution<double> noise(0.0, noise_scale);
        for (double& v : raw) v += noise(rng);
    }
    for (double& v : raw) v = std::clamp(v, 0.0, 1.0);

    ActionValue a;
    a.mode = mode;
    if (mode == ActionMode::BitMask) {
        a.mask.resize(size_t(m));
        for (int j = 0; j < m; ++j)
            a.mask[size_t(j)] = uint8_t(std::lround(raw[size_t(j)]));
    } else {
        a.count = int(std::lround(raw[0] * double(m)));
    }
    return a;
}

double q_value(const GradNet& critic, const LocalState& state,
               std::span<const double> action_enc) {
    std::vector<double> input(state.features);
    input.insert(input.end(), action_enc.begin(), action_enc.end());
    return net_forward(critic, input)[0];
}

void ReplayBuffer::push(Transition t) {
    if (buffer_.size() == capacity_) buffer_.pop_front();
    buffer_.push_back(std::move(t));
}

std::vector<const Transition*> ReplayBuffer::sample(size_t count,
                                                    std::mt19937_64& rng) const {
    if (buffer_.empty())
        throw std::invalid_argument("cannot sample from an empty replay buffer");
    std::vector<const Transition*> out;
    out.reserve(count);
    std::uniform_int_distribution<size_t> pick(0, buffer_.size() - 1);
    for (size_t i = 0; i < count; ++i) out.push_back(&buffer_[pick(rng)]);
    return out;
}

double critic_update(GradNet& critic, AdamState& critic_opt,
                     const GradNet& target_actor, const GradNet& target_critic,
                     const std::vector<const Transition*>& batch, double gamma,
                     double baseline, double lr) {
    if (batch.empty())
        throw std::invalid_argument("critic_update: empty batch");
    Gradients grads = Gradients::like(critic);
    double loss = 0.0;
    const double inv = 1.0 / double(batch.size());
    for (const Transition* t : batch) {
        double target = t->reward - baseline;
        if (!t->terminal && gamma != 0.0) {
            std::vector<double> next_a =
                net_forward(target_actor, t->next_state.features);
            target += gamma * q_value(target_critic, t->next_state, next_a);
        }
        std::vector<double> input(t->state.features);
        input.insert(input.end(), t->action_enc.begin(), t->action_enc.end());
        ForwardCache cache;
        double q = net_forward(critic, input, cache)[0];
        double err = q - target;
        loss += err * err * inv;
        double out_grad[1] = {2.0 * err * inv};
        net_gradient(critic, cache, out_grad, grads);
    }
    optimizer_step(critic, grads, critic_opt, lr);
    return loss;
}

double actor_update(GradNet& actor, AdamState& actor_opt, const GradNet& critic,
                    const std::vector<const Transition*>& batch, double lr) {
    if (batch.empty())
        throw std::invalid_argument("actor_update: empty batch");
    Gradients actor_grads = Gradients::like(actor);
    const size_t state_dim = batch.front()->state.features.size();
    double loss = 0.0;
    const double inv = 1.0 / double(batch.size());
    for (const Transition* t : batch) {
        ForwardCache actor_cache;
        std::vector<double> a =
            net_forward(actor, t->state.features, actor_cache);

        std::vector<double> input(t->state.features);
        input.insert(input.end(), a.begin(), a.end());
        ForwardCache critic_cache;
        double q = net_forward(critic, input, critic_cache)[0];
        loss -= q * inv;

        // dQ/da through the critic's input gradient, critic frozen
        Gradients critic_grads = Gradients::like(critic);
        double out_grad[1] = {1.0};
        net_gradient(critic, critic_cache, out_grad, critic_grads);
        std::vector<double> a_grad(critic_grads.input.begin() + state_dim,
                                   critic_grads.input.end());
        for (double& g : a_grad) g *= -inv; // ascend Q
        net_gradient(actor, actor_cache, a_grad, actor_grads);
    }
    optimizer_step(actor, actor_grads, actor_opt, lr);
    return loss;
}

ModelPlanEvaluator::ModelPlanEvaluator(const NetworkModel& model,
                                       const Representation& repr,
                                       const ChannelSpec& chan,
                                       const Dataset& data, size_t reward_limit,
                                       size_t final_limit)
    : model_(model), repr_(repr), chan_(chan), data_(data),
      reward_limit_(reward_limit), final_limit_(final_limit) {}

double ModelPlanEvaluator::clean_performance() {
    if (clean_ < 0.0) {
        // representation round trip only (includes quantization, no errors)
        NetworkModel scratch = model_;
        bits_to_model(model_to_bits(model_, repr_), repr_, scratch);
        clean_ = evaluate_accuracy(scratch, data_, reward_limit_);
    }
    return clean_;
}

double ModelPlanEvaluator::measure(const ProtectionPlan& plan, uint64_t seed) {
    ChannelSpec chan = chan_;
    chan.seed = seed;
    return evaluate_plan(model_, plan, repr_, chan, data_, 1, reward_limit_)
        .mean_accuracy;
}

EvaluationResult ModelPlanEvaluator::full_eval(const ProtectionPlan& plan,
                                               int trials) {
    return evaluate_plan(model_, plan, repr_, chan_, data_, trials, final_limit_);
}

namespace {

struct Candidate {
    ProtectionPlan plan;
    double reward;
    double r;
};

double plan_r(const ProtectionPlan& plan, const std::vector<size_t>& sizes,
              const EccSpec& ecc, double p) {
    return redundancy(plan.masks, sizes, plan.mask_width(), ecc, p).r;
}

} // namespace

OptimizationResult run_optimization(const OptimizerConfig& config,
                                    const std::vector<LayerMeta>& meta,
                                    const std::vector<size_t>& sizes,
                                    const EccSpec& ecc, double p,
                                    PlanEvaluator& evaluator) {
    if (meta.size() != sizes.size() || meta.empty())
        throw std::invalid_argument("run_optimization: bad layer description");
    const size_t n_layers = meta.size();
    const int m = config.m;
    const int adim = action_dim(config.mode, m);

    const StateNormalizer norm = StateNormalizer::from(meta);
    const int state_dim = 6 + adim;

    OptimizationResult result;
    result.nets.actor = make_gradnet(state_dim, 400, 300, adim,
                                     OutputActivation::Sigmoid,
                                     derive_seed(config.master_seed, 101), 1e-3);
    result.nets.critic = make_gradnet(state_dim + adim, 400, 300, 1,
                                      OutputActivation::Identity,
                                      derive_seed(config.master_seed, 102));
    result.nets.target_actor = result.nets.actor;
    result.nets.target_critic = result.nets.critic;
    GradNet& actor = result.nets.actor;
    GradNet& critic = result.nets.critic;
    AdamState actor_opt = AdamState::like(actor);
    AdamState critic_opt = AdamState::like(critic);

    ReplayBuffer replay(config.replay_capacity);
    std::mt19937_64 rng(derive_seed(config.master_seed, 103));

    const double p0 = evaluator.clean_performance();
    double baseline_ema = 0.0;
    bool have_baseline = false;
    std::vector<Candidate> candidates;

    const double half = std::max(1.0, double(config.episodes) / 2.0);
    for (int it = 0; it < config.episodes; ++it) {
        const double noise =
            config.noise_start -
            (config.noise_start - config.noise_end) * std::min(1.0, it / half);

        // round 1: sequential actions, each state carrying the previous
        // layer's executed action
        std::vector<ActionValue> actions;
        std::vector<std::vector<double>> encs(n_layers);
        std::vector<double> prev(size_t(adim), 0.0);
        for (size_t i = 0; i < n_layers; ++i) {
            LocalState s;
            s.features = norm.normalize(meta[i]);
            s.features.insert(s.features.end(), prev.begin(), prev.end());
            ActionValue a = act(actor, s, noise, config.mode, m, rng);
            encs[i] = encode_action(a, m);
            prev = encs[i];
            actions.push_back(std::move(a));
        }

        ProtectionPlan plan;
        if (config.mode == ActionMode::TopBits) {
            // round 2: decrement pass until the target redundancy holds
            std::vector<int> counts;
            for (const auto& a : actions) counts.push_back(a.count);
            counts = topbits_adjust(counts, sizes, m, ecc, p, config.target_r);
            for (size_t i = 0; i < n_layers; ++i) {
                actions[i].count = counts[i];
                encs[i] = encode_action(actions[i], m);
            }
            plan = plan_from_topbits(counts, m, ecc, config.target_r);
        } else {
            plan.ecc = ecc;
            plan.target_r = config.target_r;
            for (const auto& a : actions) plan.masks.push_back(a.mask);
        }

        const double r = plan_r(plan, sizes, ecc, p);
        const double perf =
            evaluator.measure(plan, derive_seed(config.master_seed, uint64_t(it)));
        const double reward =
            config.mode == ActionMode::TopBits
                ? reward_topbits(perf, p0)
                : reward_bitmask(perf, p0, r, config.target_r, config.reward);

        if (!have_baseline) {
            baseline_ema = reward;
            have_baseline = true;
        } else {
            baseline_ema = config.reward.baseline_decay * baseline_ema +
                           (1.0 - config.reward.baseline_decay) * reward;
        }

        // replay transitions: states rebuilt from the executed (adjusted)
        // actions so (state, action, next_state) stay consistent
        std::vector<std::vector<double>> executed(encs.begin(), encs.end());
        std::vector<LocalState> states =
            build_local_states(meta, norm, executed, config.mode, m);
        for (size_t i = 0; i < n_layers; ++i) {
            Transition t;
            t.state = states[i];
            t.action_enc = encs[i];
            t.terminal = i + 1 == n_layers;
            t.next_state = t.terminal ? states[i] : states[i + 1];
            t.reward = reward;
            replay.push(std::move(t));
        }

        double loss_a = 0.0, loss_c = 0.0;
        if (replay.size() >= config.batch_size) {
            for (int u = 0; u < config.updates_per_iteration; ++u) {
                auto batch = replay.sample(config.batch_size, rng);
                loss_c = critic_update(critic, critic_opt,
                                       result.nets.target_actor,
                                       result.nets.target_critic, batch,
                                       config.reward.gamma, baseline_ema,
                                       config.lr_critic);
                loss_a = actor_update(actor, actor_opt, critic, batch,
                                      config.lr_actor);
                soft_update(result.nets.target_actor, actor, config.delta);
                soft_update(result.nets.target_critic, critic, config.delta);
            }
        }

        if (r <= config.target_r) {
            bool duplicate = false;
            for (auto& c : candidates)
                if (c.plan.masks == plan.masks) {
                    c.reward = std::max(c.reward, reward);
                    duplicate = true;
                    break;
                }
            if (!duplicate) candidates.push_back({plan, reward, r});
        }

        result.log.push_back({it, r, perf, reward, loss_a, loss_c});
    }

    if (candidates.empty()) {
        const int t = max_feasible_prefix(sizes, m, ecc, p, config.target_r);
        result.best_plan = baseline_plan(t, n_layers, m, ecc, config.target_r);
    } else {
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Candidate& a, const Candidate& b) {
                             return a.reward > b.reward;
                         });
        const size_t keep =
            std::min(candidates.size(), size_t(config.top_candidates));
        double best_mean = -1.0;
        for (size_t i = 0; i < keep; ++i) {
            EvaluationResult ev =
                evaluator.full_eval(candidates[i].plan, config.final_trials);
            if (ev.mean_accuracy > best_mean) {
                best_mean = ev.mean_accuracy;
                result.best_plan = candidates[i].plan;
                result.best_eval = ev;
            }
        }
        return result;
    }
    result.best_eval = evaluator.full_eval(result.best_plan, config.final_trials);
    return result;
}

void save_ddpg_checkpoint(const DdpgNets& nets, const std::string& path) {
    save_gradnets({&nets.actor, &nets.critic, &nets.target_actor,
                   &nets.target_critic},
                  path);
}

DdpgNets load_ddpg_checkpoint(const std::string& path) {
    std::vector<GradNet> loaded = load_gradnets(path);
    if (loaded.size() != 4)
        throw std::runtime_error("checkpoint does not hold four networks");
    DdpgNets nets;
    nets.actor = std::move(loaded[0]);
    nets.critic = std::move(loaded[1]);
    nets.target_actor = std::move(loaded[2]);
    nets.target_critic = std::move(loaded[3]);
    return nets;
}

} // namespace sp
