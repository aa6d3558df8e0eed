#include "sp/scheme.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sp/inference.hpp"

namespace sp {

void ProtectionPlan::validate(size_t n_layers) const {
    if (masks.size() != n_layers)
        throw std::invalid_argument("plan must carry one mask per edge layer");
    const size_t m = masks.empty() ? 0 : masks[0].size();
    for (const auto& mask : masks) {
        if (mask.size() != m)
            throw std::invalid_argument("plan masks must share one width");
        for (uint8_t b : mask)
            if (b > 1) throw std::invalid_argument("mask flags must be 0 or 1");
    }
    ecc.validate();
}

ProtectionPlan baseline_plan(int t, size_t n_layers, int m, const EccSpec& ecc,
                             double target_r) {
    if (t < 0 || t > m)
        throw std::invalid_argument("baseline prefix width out of range");
    ProtectionPlan plan;
    plan.ecc = ecc;
    plan.target_r = target_r;
    BitMask mask(size_t(m), 0);
    for (int j = 0; j < t; ++j) mask[size_t(j)] = 1;
    plan.masks.assign(n_layers, mask);
    return plan;
}

namespace {

double topbits_r(const std::vector<int>& actions,
                 const std::vector<size_t>& layer_sizes, int m,
                 double overhead) {
    long long total = 0, pro = 0;
    for (size_t i = 0; i < actions.size(); ++i) {
        total += (long long)m * (long long)layer_sizes[i];
        pro += (long long)actions[i] * (long long)layer_sizes[i];
    }
    return total == 0 ? 0.0 : double(pro) * overhead / double(total);
}

} // namespace

int max_feasible_prefix(const std::vector<size_t>& layer_sizes, int m,
                        const EccSpec& ecc, double p, double target_r) {
    const double overhead = ecc.overhead(p);
    for (int t = m; t >= 1; --t) {
        std::vector<int> uniform(layer_sizes.size(), t);
        if (topbits_r(uniform, layer_sizes, m, overhead) <= target_r) return t;
    }
    return 0;
}

std::vector<int> topbits_adjust(std::vector<int> actions,
                                const std::vector<size_t>& layer_sizes, int m,
                                const EccSpec& ecc, double p, double target_r) {
    if (actions.size() != layer_sizes.size())
        throw std::invalid_argument("topbits_adjust: one action per layer required");
    for (int a : actions)
        if (a < 0 || a > m)
            throw std::invalid_argument("topbits_adjust: action out of [0, m]");

    const double overhead = ecc.overhead(p);
    double r = topbits_r(actions, layer_sizes, m, overhead);
    while (r > target_r) {
        bool any = false;
        for (size_t i = 0; i < actions.size() && r > target_r; ++i) {
            if (actions[i] == 0) continue;
            --actions[i];
            any = true;
            r = topbits_r(actions, layer_sizes, m, overhead);
        }
        if (!any) break; // all zero; r is 0 already
    }
    return actions;
}

ProtectionPlan plan_from_topbits(const std::vector<int>& actions, int m,
                                 const EccSpec& ecc, double target_r) {
    ProtectionPlan plan;
    plan.ecc = ecc;
    plan.target_r = target_r;
    for (int a : actions) {
        if (a < 0 || a > m)
            throw std::invalid_argument("plan_from_topbits: action out of [0, m]");
        BitMask mask(size_t(m), 0);
        for (int j = 0; j < a; ++j) mask[size_t(j)] = 1;
        plan.masks.push_back(std::move(mask));
    }
    return plan;
}

double reward_topbits(double performance, double clean_performance) {
    return performance - clean_performance;
}

double redundancy_penalty(double r, double target_r, const RewardParams& params) {
    return r >= target_r ? params.beta_plus * (target_r - r)
                         : params.beta_minus * (r - target_r);
}

double reward_bitmask(double performance, double clean_performance, double r,
                      double target_r, const RewardParams& params) {
    return performance - clean_performance +
           redundancy_penalty(r, target_r, params);
}

RedundancyReport plan_redundancy(const ProtectionPlan& plan,
                                 const std::vector<size_t>& layer_sizes,
                                 double p) {
    return redundancy(plan.masks, layer_sizes, plan.mask_width(), plan.ecc, p);
}

EvaluationResult evaluate_plan(const NetworkModel& model,
                               const ProtectionPlan& plan,
                               const Representation& repr,
                               const ChannelSpec& chan, const Dataset& data,
                               int trials, size_t limit) {
    if (trials < 1)
        throw std::invalid_argument("evaluate_plan: at least one trial required");
    plan.validate(model.layers.size());
    if (plan.mask_width() != repr.width())
        throw std::invalid_argument("evaluate_plan: plan width != representation width");

    EvaluationResult result;
    result.trials = trials;
    // Ideal ECC with p = 0 has no defined overhead factor; the protected
    // fraction costs nothing in the limit, so report r = 0.
    if (plan.ecc.kind == EccSpec::Kind::Ideal && chan.p == 0.0)
        result.achieved_r = 0.0;
    else
        result.achieved_r =
            plan_redundancy(plan, layer_sizes(model), chan.p).r;

    const LayerBits clean_bits = model_to_bits(model, repr);
    NetworkModel scratch = model;

    // integer correct-counts keep the mean exact (identical trials give a
    // stddev of exactly zero)
    std::vector<size_t> counts;
    counts.reserve(size_t(trials));
    size_t total = 0;
    for (int t = 0; t < trials; ++t) {
        ChannelSpec trial_chan = chan;
        trial_chan.seed = derive_seed(chan.seed, uint64_t(t));
        LayerBits noisy =
            simulate_protection(clean_bits, plan.masks, plan.ecc, trial_chan);
        bits_to_model(noisy, repr, scratch);
        counts.push_back(count_correct(scratch, data, limit));
        total += counts.back();
    }
    result.mean_accuracy = double(total) / (double(trials) * double(limit));
    double sq = 0.0;
    for (size_t c : counts) {
        double d = double(c) / double(limit) - result.mean_accuracy;
        sq += d * d;
    }
    result.stddev_accuracy = std::sqrt(sq / trials);
    return result;
}

std::string plan_to_string(const ProtectionPlan& plan, double achieved_r) {
    std::ostringstream out;
    out << "splan v1\n";
    if (plan.ecc.kind == EccSpec::Kind::Ideal)
        out << "ecc ideal\n";
    else
        out << "ecc block " << plan.ecc.n << " " << plan.ecc.k << " "
            << plan.ecc.t << "\n";
    out << "m " << plan.mask_width() << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", plan.target_r);
    out << "target_r " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", achieved_r);
    out << "achieved_r " << buf << "\n";
    for (size_t i = 0; i < plan.masks.size(); ++i) {
        out << "mask " << i << " ";
        for (uint8_t b : plan.masks[i]) out << (b ? '1' : '0');
        out << "\n";
    }
    return out.str();
}

ProtectionPlan plan_from_string(const std::string& text, double* achieved_r) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "splan v1")
        throw std::runtime_error("not a plan file (missing 'splan v1' header)");

    ProtectionPlan plan;
    int m = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "ecc") {
            std::string kind;
            ls >> kind;
            if (kind == "ideal") {
                plan.ecc = EccSpec::ideal();
            } else if (kind == "block") {
                long n, k, t;
                if (!(ls >> n >> k >> t))
                    throw std::runtime_error("bad ecc line in plan file");
                plan.ecc = EccSpec::block(n, k, t);
            } else {
                throw std::runtime_error("unknown ecc kind in plan file");
            }
        } else if (key == "m") {
            ls >> m;
        } else if (key == "target_r") {
            ls >> plan.target_r;
        } else if (key == "achieved_r") {
            double r = 0.0;
            ls >> r;
            if (achieved_r) *achieved_r = r;
        } else if (key == "mask") {
            size_t index;
            std::string bits;
            if (!(ls >> index >> bits) || int(bits.size()) != m)
                throw std::runtime_error("bad mask line in plan file");
            if (index != plan.masks.size())
                throw std::runtime_error("mask lines out of order in plan file");
            BitMask mask;
            for (char ch : bits) {
                if (ch != '0' && ch != '1')
                    throw std::runtime_error("bad mask bit in plan file");
                mask.push_back(ch == '1' ? 1 : 0);
            }
            plan.masks.push_back(std::move(mask));
        } else {
            throw std::runtime_error("unknown key in plan file: " + key);
        }
    }
    if (plan.masks.empty())
        throw std::runtime_error("plan file has no masks");
    return plan;
}

void save_plan(const ProtectionPlan& plan, double achieved_r,
               const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write plan file: " + path);
    out << plan_to_string(plan, achieved_r);
    if (!out) throw std::runtime_error("failed writing plan file: " + path);
}

ProtectionPlan load_plan(const std::string& path, double* achieved_r) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plan file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return plan_from_string(buf.str(), achieved_r);
}

} // namespace sp
