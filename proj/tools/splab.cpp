// splab: batch experiment driver for selective weight protection.
//
// Subcommands: sweep, bitstats, twophase, train, eval-plan.  Every CSV row
// carries the master seed and a hash of the effective configuration so
// results can be traced back to their run.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "sp/ddpg.hpp"
#include "sp/inference.hpp"

using namespace sp;

namespace {

// ---------------------------------------------------------------- helpers

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

uint64_t fnv1a(const std::string& text) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::string hash_hex(const std::string& text) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  (unsigned long long)fnv1a(text));
    return buf;
}

struct CsvWriter {
    std::ofstream file;
    std::ostream* out;

    explicit CsvWriter(const std::string& path) {
        if (path.empty() || path == "-") {
            out = &std::cout;
        } else {
            file.open(path);
            if (!file) throw std::runtime_error("cannot write " + path);
            out = &file;
        }
    }
    void line(const std::string& s) { *out << s << "\n"; }
};

// -------------------------------------------------------------- arguments

struct CommonArgs {
    std::string model_path;
    std::string dataset_dir;
    std::string repr_spec = "float32";
    std::string ecc_spec = "ideal";
    double ber = 0.01;
    uint64_t seed = 1;
    std::string out_path;
};

void add_model_flag(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--model", args.model_path, "model file (.spm)")
        ->required();
}

void add_dataset_flag(CLI::App* cmd, CommonArgs& args) {
    const char* env = std::getenv("SP_DATASET_DIR");
    if (env) args.dataset_dir = env;
    auto* opt = cmd->add_option(
        "--dataset", args.dataset_dir,
        "directory holding test-images-idx3-ubyte / test-labels-idx1-ubyte "
        "(default: $SP_DATASET_DIR)");
    if (!env) opt->required();
}

Representation parse_repr(const std::string& spec, const NetworkModel& model) {
    if (spec == "float32") return Representation::float32();
    if (spec.rfind("fixed:", 0) == 0) {
        std::string rest = spec.substr(6);
        auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("bad --repr, want fixed:<m>:<c|auto>");
        FixedPointSpec fp;
        fp.width = std::stoi(rest.substr(0, colon));
        std::string cpart = rest.substr(colon + 1);
        fp.clamp = cpart == "auto" ? max_abs_weight(model) : std::stod(cpart);
        return Representation::fixed_point(fp);
    }
    throw std::runtime_error("bad --repr value: " + spec);
}

EccSpec parse_ecc(const std::string& spec) {
    if (spec == "ideal") return EccSpec::ideal();
    if (spec.rfind("bch:", 0) == 0) {
        long n, k, t;
        if (std::sscanf(spec.c_str(), "bch:%ld:%ld:%ld", &n, &k, &t) != 3)
            throw std::runtime_error("bad --ecc, want bch:<n>:<k>:<t>");
        return EccSpec::block(n, k, t);
    }
    throw std::runtime_error("bad --ecc value: " + spec);
}

Dataset load_test_split(const std::string& dir) {
    return load_idx_dataset(dir + "/test-images-idx3-ubyte",
                            dir + "/test-labels-idx1-ubyte");
}

std::string repr_tag(const std::string& spec) { return spec; }

// ------------------------------------------------------------------ sweep

struct SweepArgs : CommonArgs {
    std::vector<double> targets;
    std::vector<std::string> methods = {"baseline", "topbits", "bitmask"};
    int trials = 100;
    int episodes = 300;
    size_t eval_limit = 1000;
    std::string plans_dir;
};

OptimizerConfig make_optimizer_config(ActionMode mode, int m, double target_r,
                                      int episodes, int trials,
                                      uint64_t master_seed) {
    OptimizerConfig config;
    config.mode = mode;
    config.m = m;
    config.target_r = target_r;
    config.episodes = episodes;
    config.final_trials = trials;
    config.master_seed = master_seed;
    return config;
}

int run_sweep(const SweepArgs& args, const std::string& config_hash) {
    NetworkModel model = load_model(args.model_path);
    Dataset data = load_test_split(args.dataset_dir);
    Representation repr = parse_repr(args.repr_spec, model);
    EccSpec ecc = parse_ecc(args.ecc_spec);
    const int m = repr.width();
    auto sizes = layer_sizes(model);
    auto meta = layer_metadata(model);

    ChannelSpec chan{args.ber, FlipDirection::Symmetric, args.seed};
    ModelPlanEvaluator evaluator(model, repr, chan, data, args.eval_limit,
                                 args.eval_limit);

    if (!args.plans_dir.empty())
        std::filesystem::create_directories(args.plans_dir);

    CsvWriter csv(args.out_path);
    csv.line("method,target_r,achieved_r,mean_P,std_P,trials,seed,config");

    for (double target : args.targets) {
        for (const std::string& method : args.methods) {
            ProtectionPlan plan;
            EvaluationResult result;
            if (method == "baseline") {
                int t = max_feasible_prefix(sizes, m, ecc, args.ber, target);
                plan = baseline_plan(t, model.layers.size(), m, ecc, target);
                result = evaluator.full_eval(plan, args.trials);
            } else {
                ActionMode mode = method == "bitmask" ? ActionMode::BitMask
                                                      : ActionMode::TopBits;
                OptimizerConfig config = make_optimizer_config(
                    mode, m, target, args.episodes, args.trials,
                    derive_seed(args.seed, fnv1a(method)));
                auto opt = run_optimization(config, meta, sizes, ecc, args.ber,
                                            evaluator);
                plan = opt.best_plan;
                result = opt.best_eval;
            }
            csv.line(method + "," + format_double(target) + "," +
                     format_double(result.achieved_r) + "," +
                     format_double(result.mean_accuracy) + "," +
                     format_double(result.stddev_accuracy) + "," +
                     std::to_string(result.trials) + "," +
                     std::to_string(args.seed) + "," + config_hash);
            if (!args.plans_dir.empty()) {
                std::string name = args.plans_dir + "/" + method + "_r" +
                                   format_double(target) + ".splan";
                save_plan(plan, result.achieved_r, name);
            }
        }
    }
    return 0;
}

// --------------------------------------------------------------- bitstats

struct BitstatsArgs : CommonArgs {};

int run_bitstats(const BitstatsArgs& args, const std::string& config_hash) {
    NetworkModel model = load_model(args.model_path);
    Representation repr = parse_repr(args.repr_spec, model);
    LayerBits bits = model_to_bits(model, repr);

    const int m = repr.width();
    std::vector<uint64_t> ones(size_t(m), 0);
    uint64_t rows = 0;
    for (const auto& mat : bits) {
        rows += mat.rows();
        for (size_t r = 0; r < mat.rows(); ++r)
            for (int c = 0; c < m; ++c) ones[size_t(c)] += mat(r, size_t(c));
    }

    CsvWriter csv(args.out_path);
    csv.line("position,p_zero,p_one,seed,config");
    for (int c = 0; c < m; ++c) {
        double p1 = rows == 0 ? 0.0 : double(ones[size_t(c)]) / double(rows);
        csv.line(std::to_string(c) + "," + format_double(1.0 - p1) + "," +
                 format_double(p1) + "," + std::to_string(args.seed) + "," +
                 config_hash);
    }
    return 0;
}

// --------------------------------------------------------------- twophase

struct TwophaseArgs : CommonArgs {
    std::string scenario = "oneToZero_then_zeroToOne";
    std::string positions = "all"; // all | sign | exponent | fraction
    int steps = 10;
    int trials = 30;
    size_t eval_limit = 1000;
    std::string plan_a, plan_b;
};

// positions NOT selected here are shielded from injection
BitMask position_filter(const std::string& positions, int m) {
    BitMask selected(size_t(m), 0);
    auto mark = [&](int lo, int hi) {
        for (int j = lo; j < hi && j < m; ++j) selected[size_t(j)] = 1;
    };
    if (positions == "all") mark(0, m);
    else if (positions == "sign") mark(0, 1);
    else if (positions == "exponent") mark(1, 9);
    else if (positions == "fraction") mark(9, m);
    else throw std::runtime_error("bad --positions value: " + positions);
    return selected;
}

LayerBits shield_from_mask(const LayerBits& bits,
                           const std::vector<BitMask>& exposed) {
    LayerBits shield;
    for (size_t l = 0; l < bits.size(); ++l) {
        BitMatrix mat(bits[l].rows(), bits[l].cols());
        for (size_t r = 0; r < mat.rows(); ++r)
            for (size_t c = 0; c < mat.cols(); ++c)
                mat(r, c) = exposed[l][c] ? 0 : 1;
        shield.push_back(std::move(mat));
    }
    return shield;
}

// protect everything the phase must not touch: bits outside `exposed`
// positions plus bits whose original value the direction spec skips anyway
LayerBits phase_shield(const LayerBits& original,
                       const std::vector<BitMask>& exposed,
                       FlipDirection direction) {
    LayerBits shield = shield_from_mask(original, exposed);
    for (size_t l = 0; l < original.size(); ++l)
        for (size_t r = 0; r < original[l].rows(); ++r)
            for (size_t c = 0; c < original[l].cols(); ++c) {
                uint8_t b = original[l](r, c);
                if (direction == FlipDirection::ZeroToOneOnly && b == 1)
                    shield[l](r, c) = 1;
                if (direction == FlipDirection::OneToZeroOnly && b == 0)
                    shield[l](r, c) = 1;
            }
    return shield;
}

int run_twophase(const TwophaseArgs& args, const std::string& config_hash) {
    NetworkModel model = load_model(args.model_path);
    Dataset data = load_test_split(args.dataset_dir);
    Representation repr = parse_repr(args.repr_spec, model);
    const int m = repr.width();
    const size_t n_layers = model.layers.size();

    // per-phase exposed positions and flip directions
    std::vector<BitMask> exposed_a(n_layers), exposed_b(n_layers);
    FlipDirection dir_a = FlipDirection::Symmetric;
    FlipDirection dir_b = FlipDirection::Symmetric;
    BitMask filter = position_filter(args.positions, m);

    if (args.scenario == "oneToZero_then_zeroToOne" ||
        args.scenario == "zeroToOne_then_oneToZero") {
        for (size_t l = 0; l < n_layers; ++l)
            exposed_a[l] = exposed_b[l] = filter;
        bool one_to_zero_first = args.scenario == "oneToZero_then_zeroToOne";
        dir_a = one_to_zero_first ? FlipDirection::OneToZeroOnly
                                  : FlipDirection::ZeroToOneOnly;
        dir_b = one_to_zero_first ? FlipDirection::ZeroToOneOnly
                                  : FlipDirection::OneToZeroOnly;
    } else if (args.scenario == "setdiff_TopBits_first" ||
               args.scenario == "setdiff_BitMask_first") {
        if (args.plan_a.empty() || args.plan_b.empty())
            throw std::runtime_error(
                "set-difference scenarios need --plan-a (TopBits) and "
                "--plan-b (BitMask)");
        ProtectionPlan topbits = load_plan(args.plan_a);
        ProtectionPlan bitmask = load_plan(args.plan_b);
        if (int(topbits.mask_width()) != m || int(bitmask.mask_width()) != m)
            throw std::runtime_error("plan width does not match representation");
        bool topbits_first = args.scenario == "setdiff_TopBits_first";
        for (size_t l = 0; l < n_layers; ++l) {
            BitMask first(size_t(m), 0), second(size_t(m), 0);
            for (int j = 0; j < m; ++j) {
                uint8_t in_top = topbits.masks[l][size_t(j)];
                uint8_t in_bit = bitmask.masks[l][size_t(j)];
                first[size_t(j)] = uint8_t(in_top && !in_bit);  // S_T - S_B
                second[size_t(j)] = uint8_t(in_bit && !in_top); // S_B - S_T
            }
            exposed_a[l] = topbits_first ? first : second;
            exposed_b[l] = topbits_first ? second : first;
        }
    } else {
        throw std::runtime_error("unknown --scenario: " + args.scenario);
    }

    const LayerBits original = model_to_bits(model, repr);
    NetworkModel scratch = model;

    CsvWriter csv(args.out_path);
    csv.line("scenario,phase,p,mean_P,std_P,trials,seed,config");

    auto emit = [&](int phase, double p, double mean, double stddev) {
        csv.line(args.scenario + "," + std::to_string(phase) + "," +
                 format_double(p) + "," + format_double(mean) + "," +
                 format_double(stddev) + "," + std::to_string(args.trials) +
                 "," + std::to_string(args.seed) + "," + config_hash);
    };

    const double p_max = args.ber;
    for (int phase = 1; phase <= 2; ++phase) {
        for (int step = 0; step <= args.steps; ++step) {
            double p = p_max * double(step) / double(args.steps);
            double sum = 0.0, sumsq = 0.0;
            for (int trial = 0; trial < args.trials; ++trial) {
                uint64_t s1 = derive_seed(args.seed, uint64_t(trial) * 2);
                uint64_t s2 = derive_seed(args.seed, uint64_t(trial) * 2 + 1);
                double p1 = phase == 1 ? p : p_max;
                LayerBits noisy =
                    inject(original, phase_shield(original, exposed_a, dir_a),
                           ChannelSpec{p1, dir_a, s1});
                if (phase == 2) {
                    // phase-1 corruption frozen at p_max; phase 2 unions in
                    // errors on its own positions, judged against original
                    // bit values
                    LayerBits shield_b = phase_shield(original, exposed_b, dir_b);
                    noisy = inject(noisy, shield_b, ChannelSpec{p, dir_b, s2});
                }
                bits_to_model(noisy, repr, scratch);
                double acc = evaluate_accuracy(scratch, data, args.eval_limit);
                sum += acc;
                sumsq += acc * acc;
            }
            double mean = sum / args.trials;
            double var = sumsq / args.trials - mean * mean;
            emit(phase, p, mean, var > 0 ? std::sqrt(var) : 0.0);
        }
    }
    return 0;
}

// ------------------------------------------------------------------ train

struct TrainArgs : CommonArgs {
    std::string config_file;
    std::string mode = "topbits";
    double target_r = 0.02;
    int episodes = 300;
    int trials = 100;
    size_t eval_limit = 1000;
    std::string plan_out;
    std::string checkpoint_out;
};

// key value pairs, one per line; '#' starts a comment
std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string key, value;
        if (ls >> key >> value) kv[key] = value;
    }
    return kv;
}

void apply_config_file(TrainArgs& args) {
    if (args.config_file.empty()) return;
    auto kv = parse_config_file(args.config_file);
    auto take = [&](const char* key, auto setter) {
        auto it = kv.find(key);
        if (it != kv.end()) setter(it->second);
    };
    take("model", [&](const std::string& v) { args.model_path = v; });
    take("dataset", [&](const std::string& v) { args.dataset_dir = v; });
    take("repr", [&](const std::string& v) { args.repr_spec = v; });
    take("ecc", [&](const std::string& v) { args.ecc_spec = v; });
    take("ber", [&](const std::string& v) { args.ber = std::stod(v); });
    take("target_r", [&](const std::string& v) { args.target_r = std::stod(v); });
    take("mode", [&](const std::string& v) { args.mode = v; });
    take("episodes", [&](const std::string& v) { args.episodes = std::stoi(v); });
    take("trials", [&](const std::string& v) { args.trials = std::stoi(v); });
    take("eval_limit",
         [&](const std::string& v) { args.eval_limit = std::stoul(v); });
    take("seed", [&](const std::string& v) { args.seed = std::stoull(v); });
    take("out", [&](const std::string& v) { args.out_path = v; });
    take("plan_out", [&](const std::string& v) { args.plan_out = v; });
    take("checkpoint_out",
         [&](const std::string& v) { args.checkpoint_out = v; });
}

int run_train(TrainArgs& args, const std::string& config_hash) {
    if (args.model_path.empty())
        throw std::runtime_error("train needs --model (flag or config file)");
    if (args.dataset_dir.empty())
        throw std::runtime_error("train needs --dataset (flag or config file)");

    NetworkModel model = load_model(args.model_path);
    Dataset data = load_test_split(args.dataset_dir);
    Representation repr = parse_repr(args.repr_spec, model);
    EccSpec ecc = parse_ecc(args.ecc_spec);
    if (args.mode != "bitmask" && args.mode != "topbits")
        throw std::runtime_error("train --mode must be bitmask or topbits");
    ActionMode mode =
        args.mode == "bitmask" ? ActionMode::BitMask : ActionMode::TopBits;

    ChannelSpec chan{args.ber, FlipDirection::Symmetric, args.seed};
    ModelPlanEvaluator evaluator(model, repr, chan, data, args.eval_limit,
                                 args.eval_limit);
    OptimizerConfig config =
        make_optimizer_config(mode, repr.width(), args.target_r, args.episodes,
                              args.trials, args.seed);

    auto result = run_optimization(config, layer_metadata(model),
                                   layer_sizes(model), ecc, args.ber,
                                   evaluator);

    CsvWriter csv(args.out_path);
    csv.line("# state_norm=per_feature_max");
    csv.line("iteration,r,P,R,loss_actor,loss_critic,seed,config");
    for (const auto& row : result.log)
        csv.line(std::to_string(row.iteration) + "," + format_double(row.r) +
                 "," + format_double(row.performance) + "," +
                 format_double(row.reward) + "," +
                 format_double(row.loss_actor) + "," +
                 format_double(row.loss_critic) + "," +
                 std::to_string(args.seed) + "," + config_hash);

    if (!args.plan_out.empty())
        save_plan(result.best_plan, result.best_eval.achieved_r, args.plan_out);
    if (!args.checkpoint_out.empty())
        save_ddpg_checkpoint(result.nets, args.checkpoint_out);

    std::cerr << "best plan: mean_P=" << format_double(result.best_eval.mean_accuracy)
              << " std_P=" << format_double(result.best_eval.stddev_accuracy)
              << " r=" << format_double(result.best_eval.achieved_r) << "\n";
    return 0;
}

// -------------------------------------------------------------- eval-plan

struct EvalPlanArgs : CommonArgs {
    std::string plan_path;
    int trials = 100;
    size_t eval_limit = 1000;
};

int run_eval_plan(const EvalPlanArgs& args, const std::string& config_hash) {
    NetworkModel model = load_model(args.model_path);
    Dataset data = load_test_split(args.dataset_dir);
    Representation repr = parse_repr(args.repr_spec, model);
    ProtectionPlan plan = load_plan(args.plan_path);

    ChannelSpec chan{args.ber, FlipDirection::Symmetric, args.seed};
    auto result = evaluate_plan(model, plan, repr, chan, data, args.trials,
                                args.eval_limit);

    CsvWriter csv(args.out_path);
    csv.line("plan,achieved_r,mean_P,std_P,trials,seed,config");
    csv.line(args.plan_path + "," + format_double(result.achieved_r) + "," +
             format_double(result.mean_accuracy) + "," +
             format_double(result.stddev_accuracy) + "," +
             std::to_string(result.trials) + "," + std::to_string(args.seed) +
             "," + config_hash);
    return 0;
}

template <typename Args>
std::string describe_config(const std::string& name, const Args& args,
                            const std::string& extra) {
    std::ostringstream s;
    s << name << "|model=" << args.model_path << "|dataset=" << args.dataset_dir
      << "|repr=" << repr_tag(args.repr_spec) << "|ecc=" << args.ecc_spec
      << "|ber=" << format_double(args.ber) << "|seed=" << args.seed << "|"
      << extra;
    return s.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"selective weight-protection laboratory"};
    app.require_subcommand(1);

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "redundancy-performance tradeoff over a target_r grid");
    add_model_flag(sweep_cmd, sweep);
    add_dataset_flag(sweep_cmd, sweep);
    sweep_cmd->add_option("--repr", sweep.repr_spec, "float32 | fixed:<m>:<c|auto>");
    sweep_cmd->add_option("--ecc", sweep.ecc_spec, "ideal | bch:<n>:<k>:<t>");
    sweep_cmd->add_option("--ber", sweep.ber, "bit error rate p");
    sweep_cmd->add_option("--target-r", sweep.targets, "target redundancy grid")
        ->required();
    sweep_cmd->add_option("--mode", sweep.methods,
                          "methods to run (baseline topbits bitmask)");
    sweep_cmd->add_option("--trials", sweep.trials, "final evaluation trials");
    sweep_cmd->add_option("--episodes", sweep.episodes, "training iterations");
    sweep_cmd->add_option("--eval-limit", sweep.eval_limit,
                          "samples per accuracy evaluation");
    sweep_cmd->add_option("--seed", sweep.seed, "master seed");
    sweep_cmd->add_option("--out", sweep.out_path, "output CSV ('-' = stdout)");
    sweep_cmd->add_option("--plans-dir", sweep.plans_dir,
                          "directory for emitted plan files");

    BitstatsArgs bitstats;
    auto* bitstats_cmd = app.add_subcommand(
        "bitstats", "per-position bit value distribution of a model");
    add_model_flag(bitstats_cmd, bitstats);
    bitstats_cmd->add_option("--repr", bitstats.repr_spec,
                             "float32 | fixed:<m>:<c|auto>");
    bitstats_cmd->add_option("--seed", bitstats.seed, "master seed");
    bitstats_cmd->add_option("--out", bitstats.out_path, "output CSV");

    TwophaseArgs twophase;
    auto* twophase_cmd = app.add_subcommand(
        "twophase", "two-phase directional or set-difference error ramps");
    add_model_flag(twophase_cmd, twophase);
    add_dataset_flag(twophase_cmd, twophase);
    twophase_cmd->add_option("--repr", twophase.repr_spec,
                             "float32 | fixed:<m>:<c|auto>");
    twophase_cmd->add_option(
        "--scenario", twophase.scenario,
        "oneToZero_then_zeroToOne | zeroToOne_then_oneToZero | "
        "setdiff_TopBits_first | setdiff_BitMask_first");
    twophase_cmd->add_option("--positions", twophase.positions,
                             "all | sign | exponent | fraction");
    twophase_cmd->add_option("--ber", twophase.ber, "per-phase maximum p");
    twophase_cmd->add_option("--steps", twophase.steps, "p grid steps per phase");
    twophase_cmd->add_option("--trials", twophase.trials, "trials per point");
    twophase_cmd->add_option("--eval-limit", twophase.eval_limit,
                             "samples per accuracy evaluation");
    twophase_cmd->add_option("--plan-a", twophase.plan_a, "TopBits plan file");
    twophase_cmd->add_option("--plan-b", twophase.plan_b, "BitMask plan file");
    twophase_cmd->add_option("--seed", twophase.seed, "master seed");
    twophase_cmd->add_option("--out", twophase.out_path, "output CSV");

    TrainArgs train;
    auto* train_cmd = app.add_subcommand(
        "train", "learn a protection plan with the DDPG optimizer");
    train_cmd->add_option("--config", train.config_file,
                          "key-value config file (flags override)");
    train_cmd->add_option("--model", train.model_path, "model file (.spm)");
    train_cmd->add_option("--dataset", train.dataset_dir, "dataset directory");
    train_cmd->add_option("--repr", train.repr_spec, "float32 | fixed:<m>:<c|auto>");
    train_cmd->add_option("--ecc", train.ecc_spec, "ideal | bch:<n>:<k>:<t>");
    train_cmd->add_option("--ber", train.ber, "bit error rate p");
    train_cmd->add_option("--target-r", train.target_r, "target redundancy");
    train_cmd->add_option("--mode", train.mode, "bitmask | topbits");
    train_cmd->add_option("--episodes", train.episodes, "training iterations");
    train_cmd->add_option("--trials", train.trials, "final evaluation trials");
    train_cmd->add_option("--eval-limit", train.eval_limit,
                          "samples per accuracy evaluation");
    train_cmd->add_option("--seed", train.seed, "master seed");
    train_cmd->add_option("--out", train.out_path, "training log CSV");
    train_cmd->add_option("--plan-out", train.plan_out, "best plan file");
    train_cmd->add_option("--checkpoint-out", train.checkpoint_out,
                          "four-network checkpoint file");

    EvalPlanArgs evalplan;
    auto* eval_cmd = app.add_subcommand(
        "eval-plan", "Monte-Carlo evaluation of a stored plan");
    add_model_flag(eval_cmd, evalplan);
    add_dataset_flag(eval_cmd, evalplan);
    eval_cmd->add_option("--repr", evalplan.repr_spec,
                         "float32 | fixed:<m>:<c|auto>");
    eval_cmd->add_option("--plan", evalplan.plan_path, "plan file")->required();
    eval_cmd->add_option("--ber", evalplan.ber, "bit error rate p");
    eval_cmd->add_option("--trials", evalplan.trials, "trials");
    eval_cmd->add_option("--eval-limit", evalplan.eval_limit,
                         "samples per accuracy evaluation");
    eval_cmd->add_option("--seed", evalplan.seed, "master seed");
    eval_cmd->add_option("--out", evalplan.out_path, "output CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep_cmd->parsed()) {
            std::ostringstream extra;
            for (double t : sweep.targets) extra << "r=" << format_double(t) << ";";
            for (const auto& mth : sweep.methods) extra << mth << ";";
            extra << "trials=" << sweep.trials << ";episodes=" << sweep.episodes
                  << ";limit=" << sweep.eval_limit;
            return run_sweep(sweep,
                             hash_hex(describe_config("sweep", sweep, extra.str())));
        }
        if (bitstats_cmd->parsed())
            return run_bitstats(
                bitstats, hash_hex(describe_config("bitstats", bitstats, "")));
        if (twophase_cmd->parsed()) {
            std::string extra = twophase.scenario + ";" + twophase.positions +
                                ";steps=" + std::to_string(twophase.steps) +
                                ";trials=" + std::to_string(twophase.trials);
            return run_twophase(
                twophase, hash_hex(describe_config("twophase", twophase, extra)));
        }
        if (train_cmd->parsed()) {
            apply_config_file(train);
            std::string extra = train.mode +
                                ";target=" + format_double(train.target_r) +
                                ";episodes=" + std::to_string(train.episodes) +
                                ";trials=" + std::to_string(train.trials) +
                                ";limit=" + std::to_string(train.eval_limit);
            return run_train(train,
                             hash_hex(describe_config("train", train, extra)));
        }
        if (eval_cmd->parsed()) {
            std::string extra = "plan=" + evalplan.plan_path +
                                ";trials=" + std::to_string(evalplan.trials);
            return run_eval_plan(
                evalplan, hash_hex(describe_config("eval-plan", evalplan, extra)));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
