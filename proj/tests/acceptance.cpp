// Acceptance suite: one pass/fail line per criterion.
//
//   ./acceptance            run everything
//   ./acceptance --only 4 9 run a subset
//   ./acceptance --list     list criteria
//
// Exit code: number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sp/ddpg.hpp"
#include "sp/inference.hpp"

using namespace sp;

namespace {

const std::string kAssets = SP_ASSET_DIR;

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

NetworkModel& reference_model() {
    static NetworkModel model = load_model(kAssets + "/digits16_cnn_v1.spm");
    return model;
}

Dataset& test_split() {
    static Dataset data =
        load_idx_dataset(kAssets + "/digits16/test-images-idx3-ubyte",
                         kAssets + "/digits16/test-labels-idx1-ubyte");
    return data;
}

Representation fixed8_repr() {
    return Representation::fixed_point({max_abs_weight(reference_model()), 8});
}

uint32_t u32_from_bits(const uint8_t* b) {
    uint32_t v = 0;
    for (int i = 0; i < 32; ++i) v = (v << 1) | b[i];
    return v;
}

// --------------------------------------------------------- 1: codec

bool criterion1(std::string& detail) {
    Timer timer;
    bool ok = true;

    Bits32 example{};
    const char* s = "00111100001100000000000000000000";
    for (int i = 0; i < 32; ++i) example[size_t(i)] = uint8_t(s[i] - '0');
    ok &= decode_float32(example) == 0.0107421875;
    ok &= encode_float32(0.0107421875) == example;

    FixedPointSpec fx{127.0, 8};
    std::vector<uint8_t> fx_example = {1, 0, 0, 1, 0, 0, 1, 1};
    ok &= decode_fixed(fx_example, fx) == -19.0;
    ok &= encode_fixed(-19.0, fx) == fx_example;

    // all 256 fixed-point patterns, the two zero patterns canonicalized
    for (int pattern = 0; pattern < 256; ++pattern) {
        std::vector<uint8_t> bits(8);
        for (int i = 0; i < 8; ++i) bits[size_t(i)] = uint8_t((pattern >> (7 - i)) & 1);
        auto back = encode_fixed(decode_fixed(bits, fx), fx);
        if (pattern == 0x80)
            ok &= back == std::vector<uint8_t>(8, 0);
        else
            ok &= back == bits;
    }

    // one million seeded float32 patterns
    std::mt19937_64 rng(0xC0DEC);
    Bits32 buf{};
    for (int i = 0; i < 1000000; ++i) {
        uint32_t pattern = uint32_t(rng());
        for (int j = 0; j < 32; ++j)
            buf[size_t(j)] = uint8_t((pattern >> (31 - j)) & 1);
        double w = decode_float32(buf);
        if (u32_from_bits(encode_float32(w).data()) != pattern) {
            ok = false;
            break;
        }
    }

    double secs = timer.seconds();
    char tail[96];
    std::snprintf(tail, sizeof tail,
                  "worked examples + 256 + 1e6 round trips, %.2fs", secs);
    detail = tail;
    return ok && secs < 5.0;
}

// ---------------------------------------------- 2: redundancy exactness

bool criterion2(std::string& detail) {
    std::mt19937_64 rng(0xEC0);
    const EccSpec ecc = EccSpec::block(8191, 6722, 115);
    const double factor = double(8191 - 6722) / 6722.0;
    bool ok = true;

    for (int trial = 0; trial < 1000; ++trial) {
        size_t n_layers = 1 + rng() % 6;
        int m = (rng() & 1) ? 8 : 32;
        std::vector<size_t> sizes;
        std::vector<BitMask> masks;
        for (size_t l = 0; l < n_layers; ++l) {
            sizes.push_back(1 + rng() % 400);
            BitMask mask(size_t(m), 0);
            for (auto& b : mask) b = uint8_t(rng() & 1);
            masks.push_back(std::move(mask));
        }
        // brute force: count every bit of every weight, one at a time
        long long kp = 0, kt = 0;
        for (size_t l = 0; l < n_layers; ++l)
            for (size_t w = 0; w < sizes[l]; ++w)
                for (int j = 0; j < m; ++j) {
                    ++kt;
                    if (masks[l][size_t(j)]) ++kp;
                }
        double brute = double(kp) / double(kt) * factor;
        ok &= redundancy(masks, sizes, m, ecc, 0.01).r == brute;
    }

    std::vector<BitMask> ones(4, BitMask(32, 1));
    std::vector<size_t> sizes{72, 1152, 16384, 640};
    ok &= redundancy(ones, sizes, 32, ecc, 0.01).r == factor;

    detail = "1000 random plans vs per-bit counting; all-ones = (n-k)/k";
    return ok;
}

// ------------------------------------------------- 3: ideal-ECC overhead

bool criterion3(std::string& detail) {
    const double p = 0.01;
    // independently coded entropy via natural logarithms
    const double h =
        (p * std::log(1.0 / p) + (1.0 - p) * std::log(1.0 / (1.0 - p))) /
        std::log(2.0);
    const double expected = h / (1.0 - h);
    const double got = EccSpec::ideal().overhead(p);
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "overhead(0.01)=%.9g, independent=%.9g, diff=%.3g", got,
                  expected, std::fabs(got - expected));
    detail = buf;
    return std::fabs(got - expected) <= 1e-12 &&
           std::fabs(got - 0.08789) < 5e-5;
}

// ------------------------------------------------ 4: block-failure oracle

bool criterion4(std::string& detail) {
    Timer timer;
    bool ok = true;
    char buf[160];
    std::string parts;
    for (auto [k, t] : {std::pair<long, long>{6722, 115}, {6787, 110}}) {
        EccSpec ecc = EccSpec::block(8191, k, t);
        double q = block_decode_failure_prob(ecc, 0.01);

        std::mt19937_64 rng(0xB10C ^ uint64_t(t));
        std::binomial_distribution<long> draw(8191, 0.01);
        const int samples = 1000000;
        long fails = 0;
        for (int i = 0; i < samples; ++i)
            if (draw(rng) > t) ++fails;
        double mc = double(fails) / samples;
        double sigma = std::sqrt(q * (1 - q) / samples);
        ok &= std::fabs(mc - q) <= 3 * sigma;
        std::snprintf(buf, sizeof buf, "t=%ld: formula=%.4g mc=%.4g (3s=%.2g) ",
                      t, q, mc, 3 * sigma);
        parts += buf;
    }
    double secs = timer.seconds();
    std::snprintf(buf, sizeof buf, "%s%.1fs", parts.c_str(), secs);
    detail = buf;
    return ok && secs < 60.0;
}

// ----------------------------------------------- 5: channel calibration

bool criterion5(std::string& detail) {
    const double p = 0.01;
    std::mt19937_64 rng(0xCA11);
    LayerBits bits;
    BitMatrix mat(312500, 32); // 10^7 bits
    for (auto& b : mat.data()) b = uint8_t(rng() & 1);
    bits.push_back(std::move(mat));
    LayerBits none;
    none.emplace_back(312500, 32);

    LayerBits noisy = inject(bits, none, {p, FlipDirection::Symmetric, 0xF11});
    double rate = empirical_flip_rate(bits, noisy, none);
    double band = 3 * std::sqrt(p * (1 - p) / 1e7);
    bool ok = std::fabs(rate - p) <= band;

    // exhaustive directional assertions
    LayerBits up = inject(bits, none, {0.3, FlipDirection::ZeroToOneOnly, 0xF12});
    LayerBits down =
        inject(bits, none, {0.3, FlipDirection::OneToZeroOnly, 0xF13});
    for (size_t i = 0; i < bits[0].size(); ++i) {
        uint8_t b = bits[0].data()[i];
        if (b == 1 && up[0].data()[i] != 1) ok = false;
        if (b == 0 && down[0].data()[i] != 0) ok = false;
    }

    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "rate=%.6f target 0.01 band %.2g; no forbidden flips", rate,
                  band);
    detail = buf;
    return ok;
}

// ---------------------------------------------- 6: gradient correctness

bool criterion6(std::string& detail) {
    bool ok = true;
    // production shapes: actor 14->400->300->8 (sigmoid),
    // critic 22->400->300->1 (identity)
    GradNet actor =
        make_gradnet(14, 400, 300, 8, OutputActivation::Sigmoid, 0xAC7, 1e-3);
    GradNet critic =
        make_gradnet(22, 400, 300, 1, OutputActivation::Identity, 0xC217);
    std::mt19937_64 rng(0x96AD);
    std::normal_distribution<double> dist(0.0, 1.0);

    for (GradNet* net : {&actor, &critic}) {
        std::vector<double> x(size_t(net->input_size()));
        std::vector<double> coeffs(size_t(net->output_size()));
        for (auto& v : x) v = dist(rng);
        for (auto& v : coeffs) v = dist(rng);

        ForwardCache cache;
        net_forward(*net, x, cache);
        Gradients grads = Gradients::like(*net);
        net_gradient(*net, cache, coeffs, grads);

        auto loss_at = [&](GradNet& n) {
            auto y = net_forward(n, x);
            double loss = 0.0;
            for (size_t i = 0; i < y.size(); ++i) loss += y[i] * coeffs[i];
            return loss;
        };
        for (size_t layer = 0; layer < 3; ++layer) {
            for (int rep = 0; rep < 10; ++rep) {
                size_t index = rng() % net->layers[layer].w.size();
                double& param = net->layers[layer].w[index];
                const double saved = param;
                param = saved + 1e-6;
                double up = loss_at(*net);
                param = saved - 1e-6;
                double down = loss_at(*net);
                param = saved;
                double fd = (up - down) / 2e-6;
                double bp = grads.layers[layer].w[index];
                if (std::fabs(bp - fd) > std::max(1e-7, 1e-5 * std::fabs(fd)))
                    ok = false;
            }
        }
    }
    detail = "actor and critic backprop vs central differences, 10/layer";
    return ok;
}

// --------------------------------------------------- 7: ddpg mechanics

struct PlantedEvaluator : PlanEvaluator {
    BitMask target;
    double clean_performance() override { return 1.0; }
    double score(const ProtectionPlan& plan) const {
        double dist = 0.0;
        for (const auto& mask : plan.masks)
            for (size_t j = 0; j < mask.size(); ++j)
                if (mask[j] != target[j]) dist += 1.0;
        return 1.0 - dist / double(plan.masks.size() * target.size());
    }
    double measure(const ProtectionPlan& plan, uint64_t) override {
        return score(plan);
    }
    EvaluationResult full_eval(const ProtectionPlan& plan, int trials) override {
        return {score(plan), 0.0, 0.0, trials};
    }
};

bool criterion7(std::string& detail) {
    bool ok = true;
    std::string parts;

    // soft update, parameter-wise, delta in {0, 0.01, 1}
    GradNet source = make_gradnet(5, 8, 8, 2, OutputActivation::Identity, 0x50);
    for (double delta : {0.0, 0.01, 1.0}) {
        GradNet target = make_gradnet(5, 8, 8, 2, OutputActivation::Identity, 0x51);
        GradNet before = target;
        soft_update(target, source, delta);
        for (size_t l = 0; l < 3 && ok; ++l)
            for (size_t i = 0; i < target.layers[l].w.size(); ++i) {
                double expected =
                    before.layers[l].w[i] +
                    delta * (source.layers[l].w[i] - before.layers[l].w[i]);
                if (target.layers[l].w[i] != expected) {
                    ok = false;
                    break;
                }
            }
    }
    parts += "soft-update exact; ";

    // gamma = 0 critic regression on a frozen synthetic batch
    {
        GradNet critic =
            make_gradnet(8, 400, 300, 1, OutputActivation::Identity, 0x52);
        GradNet tactor =
            make_gradnet(7, 400, 300, 1, OutputActivation::Sigmoid, 0x53);
        GradNet tcritic = critic;
        AdamState opt = AdamState::like(critic);
        std::mt19937_64 rng(0x54);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        std::vector<Transition> data(64);
        for (auto& t : data) {
            t.state.features.resize(7);
            for (auto& f : t.state.features) f = dist(rng);
            t.action_enc = {dist(rng)};
            t.next_state = t.state;
            t.reward = 0.25 + 0.5 * dist(rng);
            t.terminal = true;
        }
        std::vector<const Transition*> batch;
        for (const auto& t : data) batch.push_back(&t);

        double loss = 1e300;
        int used = 0;
        for (; used < 2000 && loss >= 1e-4; ++used)
            loss = critic_update(critic, opt, tactor, tcritic, batch, 0.0, 0.4,
                                 1e-3);
        ok &= loss < 1e-4;
        char buf[64];
        std::snprintf(buf, sizeof buf, "critic loss %.2g after %d updates; ",
                      loss, used);
        parts += buf;
    }

    // planted-mask recovery, 3 seeds, need 2
    {
        std::vector<LayerMeta> meta = {{1, 8, 3, 1, 16, 72},
                                       {8, 16, 3, 1, 8, 1152},
                                       {16, 10, 1, 1, 1, 160}};
        std::vector<size_t> sizes = {72, 1152, 160};
        EccSpec ecc = EccSpec::block(1200, 1000, 10); // overhead 0.2

        int recovered = 0;
        for (uint64_t seed : {1ull, 2ull, 3ull}) {
            PlantedEvaluator eval;
            eval.target = BitMask{0, 1, 0, 0, 0, 0, 0, 0};
            OptimizerConfig config;
            config.mode = ActionMode::BitMask;
            config.m = 8;
            config.episodes = 300;
            config.updates_per_iteration = 6;
            config.final_trials = 1;
            config.master_seed = seed;
            config.target_r = 0.026; // one bit per layer costs 0.025
            auto result = run_optimization(config, meta, sizes, ecc, 0.01, eval);
            bool exact = true;
            for (const auto& mask : result.best_plan.masks)
                if (mask != eval.target) exact = false;
            if (exact) ++recovered;
        }
        ok &= recovered >= 2;
        char buf[48];
        std::snprintf(buf, sizeof buf, "planted recovery %d/3 seeds", recovered);
        parts += buf;
    }

    detail = parts;
    return ok;
}

// ------------------------------------------- 8: directional asymmetry

bool criterion8(std::string& detail) {
    Timer timer;
    NetworkModel& model = reference_model();
    Dataset& data = test_split();
    const Representation repr = Representation::float32();
    const LayerBits original = model_to_bits(model, repr);

    // only exponent positions (1..8) are exposed
    LayerBits shield;
    for (const auto& mat : original) {
        BitMatrix pm(mat.rows(), mat.cols(), 1);
        for (size_t r = 0; r < pm.rows(); ++r)
            for (size_t c = 1; c <= 8; ++c) pm(r, c) = 0;
        shield.push_back(std::move(pm));
    }

    const int trials = 30;
    const size_t limit = 1000;
    auto run_arm = [&](FlipDirection dir, uint64_t salt, double& mean,
                       double& stddev) {
        NetworkModel scratch = model;
        std::vector<double> accs;
        for (int t = 0; t < trials; ++t) {
            ChannelSpec chan{0.01, dir, derive_seed(salt, uint64_t(t))};
            LayerBits noisy = inject(original, shield, chan);
            bits_to_model(noisy, repr, scratch);
            accs.push_back(evaluate_accuracy(scratch, data, limit));
        }
        double sum = 0.0;
        for (double a : accs) sum += a;
        mean = sum / trials;
        double sq = 0.0;
        for (double a : accs) sq += (a - mean) * (a - mean);
        stddev = std::sqrt(sq / trials);
    };

    double mean_up, std_up, mean_down, std_down;
    run_arm(FlipDirection::ZeroToOneOnly, 0xA51, mean_up, std_up);
    run_arm(FlipDirection::OneToZeroOnly, 0xA52, mean_down, std_down);

    double pooled =
        std::sqrt(std_up * std_up / trials + std_down * std_down / trials);
    double diff = mean_down - mean_up;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "0->1 mean=%.4f, 1->0 mean=%.4f, diff=%.4f > 3*SE=%.4f, %.0fs",
                  mean_up, mean_down, diff, 3 * pooled, timer.seconds());
    detail = buf;
    return diff > 3 * pooled && timer.seconds() < 600.0;
}

// -------------------------------------------- 9: headline analogue

bool criterion9(std::string& detail) {
    Timer timer;
    NetworkModel& model = reference_model();
    Dataset& data = test_split();
    const Representation repr = fixed8_repr();
    const EccSpec ecc = EccSpec::ideal();
    const double p = 0.01;
    const int m = 8;
    auto sizes = layer_sizes(model);
    auto meta = layer_metadata(model);

    const std::vector<double> grid = {0.014, 0.027};
    const std::vector<uint64_t> seeds = {1, 2, 3};
    const int final_trials = 100;
    const size_t eval_limit = 500;
    const uint64_t channel_seed = 0x5EED; // shared by all methods

    ChannelSpec chan{p, FlipDirection::Symmetric, channel_seed};
    ModelPlanEvaluator evaluator(model, repr, chan, data, eval_limit,
                                 eval_limit);

    // baseline per grid point (prefix plans involve no training seed)
    std::vector<EvaluationResult> baseline;
    for (double target : grid) {
        int t = max_feasible_prefix(sizes, m, ecc, p, target);
        auto plan = baseline_plan(t, model.layers.size(), m, ecc, target);
        baseline.push_back(evaluator.full_eval(plan, final_trials));
    }

    auto wins = [&](const EvaluationResult& method,
                    const EvaluationResult& base) {
        double se = std::sqrt(
            method.stddev_accuracy * method.stddev_accuracy / final_trials +
            base.stddev_accuracy * base.stddev_accuracy / final_trials);
        return method.mean_accuracy >= base.mean_accuracy + 2 * se;
    };

    std::string parts;
    bool ok = true;
    for (ActionMode mode : {ActionMode::TopBits, ActionMode::BitMask}) {
        int winning_seeds = 0;
        for (uint64_t seed : seeds) {
            bool seed_wins = false;
            for (size_t g = 0; g < grid.size(); ++g) {
                OptimizerConfig config;
                config.mode = mode;
                config.m = m;
                config.target_r = grid[g];
                config.final_trials = final_trials;
                config.master_seed = seed;
                if (mode == ActionMode::TopBits) {
                    config.episodes = 300;
                } else {
                    config.episodes = 400;
                    config.updates_per_iteration = 6;
                    config.reward.beta_plus = 20.0;
                    config.noise_end = 0.15;
                }
                auto result =
                    run_optimization(config, meta, sizes, ecc, p, evaluator);
                if (wins(result.best_eval, baseline[g])) {
                    seed_wins = true;
                    break; // one matched target_r suffices for this seed
                }
            }
            if (seed_wins) ++winning_seeds;
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s %d/3 seeds; ",
                      mode == ActionMode::TopBits ? "topbits" : "bitmask",
                      winning_seeds);
        parts += buf;
        ok &= winning_seeds >= 2;
    }

    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "%sbaseline means %.3f/%.3f at r=%.3f/%.3f, %.0fs",
                  parts.c_str(), baseline[0].mean_accuracy,
                  baseline[1].mean_accuracy, grid[0], grid[1], timer.seconds());
    detail = buf;
    return ok && timer.seconds() < 7200.0;
}

// ------------------------------------------------- 10: knee shape

// pool-adjacent-violators fit of a non-increasing step function
std::vector<double> isotonic_decreasing(const std::vector<double>& y) {
    std::vector<double> level(y.size());
    std::vector<double> weight(y.size());
    std::vector<size_t> len(y.size());
    size_t blocks = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        level[blocks] = y[i];
        weight[blocks] = 1.0;
        len[blocks] = 1;
        ++blocks;
        while (blocks > 1 && level[blocks - 2] < level[blocks - 1]) {
            double w = weight[blocks - 2] + weight[blocks - 1];
            level[blocks - 2] = (level[blocks - 2] * weight[blocks - 2] +
                                 level[blocks - 1] * weight[blocks - 1]) /
                                w;
            weight[blocks - 2] = w;
            len[blocks - 2] += len[blocks - 1];
            --blocks;
        }
    }
    std::vector<double> fit;
    for (size_t b = 0; b < blocks; ++b) fit.insert(fit.end(), len[b], level[b]);
    return fit;
}

bool criterion10(std::string& detail) {
    NetworkModel& model = reference_model();
    Dataset& data = test_split();
    const Representation repr = fixed8_repr();
    auto plan = baseline_plan(0, model.layers.size(), 8, EccSpec::ideal(), 0.0);

    // ten log-spaced points from 1e-4 to 1e-1
    std::vector<double> ps;
    for (int i = 0; i < 10; ++i) ps.push_back(std::pow(10.0, -4.0 + i / 3.0));

    std::vector<double> means;
    for (double p : ps) {
        ChannelSpec chan{p, FlipDirection::Symmetric, 0x10EE};
        auto ev = evaluate_plan(model, plan, repr, chan, data, 30, 500);
        means.push_back(ev.mean_accuracy);
    }

    auto fit = isotonic_decreasing(means);
    double mae = 0.0;
    for (size_t i = 0; i < means.size(); ++i)
        mae += std::fabs(means[i] - fit[i]);
    mae /= double(means.size());

    // largest decrease from any earlier grid point to a later one
    double drop = 0.0, running_peak = means[0];
    for (size_t i = 1; i < means.size(); ++i) {
        drop = std::max(drop, running_peak - means[i]);
        running_peak = std::max(running_peak, means[i]);
    }

    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "acc %.3f -> %.3f over p in [1e-4, 1e-1], max drop %.3f, "
                  "isotonic MAE %.4f",
                  means.front(), means.back(), drop, mae);
    detail = buf;
    return drop >= 0.30 && mae <= 0.02;
}

struct Criterion {
    int id;
    const char* name;
    bool (*run)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "codec exactness", criterion1},
    {2, "redundancy exactness", criterion2},
    {3, "ideal-ECC overhead", criterion3},
    {4, "block-failure oracle", criterion4},
    {5, "channel calibration", criterion5},
    {6, "gradient correctness", criterion6},
    {7, "DDPG mechanics", criterion7},
    {8, "asymmetry direction", criterion8},
    {9, "headline analogue", criterion9},
    {10, "knee-shape property", criterion10},
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--list") == 0) {
            for (const auto& c : kCriteria)
                std::printf("%2d  %s\n", c.id, c.name);
            return 0;
        }
        if (std::strcmp(argv[i], "--only") == 0) continue;
        only.insert(std::atoi(argv[i]));
    }

    int failed = 0;
    for (const auto& c : kCriteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", c.id,
                    c.name, detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failed;
    }
    return failed;
}
