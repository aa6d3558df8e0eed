#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "sp/dataset.hpp"
#include "sp/inference.hpp"
#include "sp/scheme.hpp"

using namespace sp;

namespace {

const std::string kAssets = SP_ASSET_DIR;

// ecc stand-in with overhead factor 0.2 at p = 0.01 is inconvenient to build
// exactly; the hand example below instead uses a block code and scales by
// its own (n-k)/k.
EccSpec flat_code() { return EccSpec::block(1200, 1000, 10); } // overhead 0.2

struct TestEnv {
    NetworkModel model;
    Dataset data;
    TestEnv()
        : model(load_model(kAssets + "/digits16_cnn_v1.spm")),
          data(load_idx_dataset(kAssets + "/digits16/test-images-idx3-ubyte",
                                kAssets + "/digits16/test-labels-idx1-ubyte")) {}
};

TestEnv& env() {
    static TestEnv e;
    return e;
}

} // namespace

TEST_CASE("baseline plan shapes") {
    auto ecc = flat_code();
    auto plan = baseline_plan(2, 3, 8, ecc, 0.1);
    REQUIRE(plan.masks.size() == 3);
    for (const auto& m : plan.masks)
        CHECK(m == BitMask{1, 1, 0, 0, 0, 0, 0, 0});

    std::vector<size_t> sizes{10, 10, 10};
    CHECK(plan_redundancy(baseline_plan(0, 3, 8, ecc, 0.1), sizes, 0.01).r == 0.0);
    CHECK(plan_redundancy(baseline_plan(8, 3, 8, ecc, 0.1), sizes, 0.01).r ==
          doctest::Approx(0.2).epsilon(1e-12));
    CHECK_THROWS_AS(baseline_plan(9, 3, 8, ecc, 0.1), std::invalid_argument);
}

TEST_CASE("topbits_adjust: worked example with overhead 0.2") {
    auto ecc = flat_code();
    std::vector<size_t> sizes{100, 100, 100};
    auto out = topbits_adjust({2, 2, 2}, sizes, 8, ecc, 0.01, 0.045);
    CHECK(out == std::vector<int>{1, 2, 2});
    // r after: (5/24)*0.2 = 0.0416..
    auto plan = plan_from_topbits(out, 8, ecc, 0.045);
    CHECK(plan_redundancy(plan, sizes, 0.01).r ==
          doctest::Approx(5.0 / 24.0 * 0.2).epsilon(1e-12));
}

TEST_CASE("topbits_adjust: already feasible and zero-target cases") {
    auto ecc = flat_code();
    std::vector<size_t> sizes{50, 70};
    auto same = topbits_adjust({1, 2}, sizes, 8, ecc, 0.01, 0.5);
    CHECK(same == std::vector<int>{1, 2});

    auto zero = topbits_adjust({5, 3}, sizes, 8, ecc, 0.01, 0.0);
    CHECK(zero == std::vector<int>{0, 0});
}

TEST_CASE("topbits_adjust never increases actions and lands feasible") {
    auto ecc = flat_code();
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<size_t> sizes;
        std::vector<int> actions;
        size_t n = 2 + rng() % 5;
        for (size_t i = 0; i < n; ++i) {
            sizes.push_back(1 + rng() % 500);
            actions.push_back(int(rng() % 9));
        }
        double target = double(rng() % 100) / 400.0;
        auto adjusted = topbits_adjust(actions, sizes, 8, ecc, 0.01, target);
        bool all_zero = true;
        for (size_t i = 0; i < n; ++i) {
            CHECK(adjusted[i] <= actions[i]);
            CHECK(adjusted[i] >= 0);
            if (adjusted[i] != 0) all_zero = false;
        }
        auto plan = plan_from_topbits(adjusted, 8, ecc, target);
        double r = plan_redundancy(plan, sizes, 0.01).r;
        CHECK((r <= target || all_zero));
    }
}

TEST_CASE("reward functions") {
    CHECK(reward_topbits(0.95, 0.95) == 0.0);
    CHECK(reward_topbits(0.90, 0.95) == doctest::Approx(-0.05));

    RewardParams params;
    CHECK(reward_bitmask(0.90, 0.95, 0.25, 0.20, params) ==
          doctest::Approx(-0.10));
    CHECK(reward_bitmask(0.97, 0.95, 0.20, 0.20, params) ==
          doctest::Approx(0.02));
    CHECK(reward_bitmask(0.95, 0.95, 0.18, 0.20, params) ==
          doctest::Approx(-0.001));

    // f(r, target) is never positive, zero only at the target
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> dist(0.0, 0.5);
    for (int i = 0; i < 1000; ++i) {
        double r = dist(rng), target = dist(rng);
        double f = redundancy_penalty(r, target, params);
        CHECK(f <= 0.0);
        if (r == target) CHECK(f == 0.0);
        if (std::fabs(r - target) > 1e-12) CHECK(f < 0.0);
    }
}

TEST_CASE("evaluate_plan: noiseless channel returns clean accuracy") {
    auto& e = env();
    auto plan = baseline_plan(0, e.model.layers.size(), 32, EccSpec::ideal(), 0.0);
    ChannelSpec quiet{0.0, FlipDirection::Symmetric, 5};
    auto result = evaluate_plan(e.model, plan, Representation::float32(), quiet,
                                e.data, 3, 300);
    double clean = evaluate_accuracy(e.model, e.data, 300);
    CHECK(result.mean_accuracy == doctest::Approx(clean).epsilon(1e-14));
    CHECK(result.stddev_accuracy == 0.0);
    CHECK(result.achieved_r == 0.0);
}

TEST_CASE("evaluate_plan: full ideal protection shrugs off a loud channel") {
    auto& e = env();
    auto plan = baseline_plan(32, e.model.layers.size(), 32, EccSpec::ideal(), 1.0);
    ChannelSpec loud{0.2, FlipDirection::Symmetric, 6};
    auto result = evaluate_plan(e.model, plan, Representation::float32(), loud,
                                e.data, 2, 300);
    double clean = evaluate_accuracy(e.model, e.data, 300);
    CHECK(result.mean_accuracy == doctest::Approx(clean).epsilon(1e-14));
    CHECK(result.achieved_r ==
          doctest::Approx(binary_entropy(0.2) / (1 - binary_entropy(0.2)))
              .epsilon(1e-12));
}

TEST_CASE("evaluate_plan: unprotected float32 at p=0.01 collapses") {
    auto& e = env();
    auto plan = baseline_plan(0, e.model.layers.size(), 32, EccSpec::ideal(), 0.0);
    ChannelSpec chan{0.01, FlipDirection::Symmetric, 7};
    auto result = evaluate_plan(e.model, plan, Representation::float32(), chan,
                                e.data, 5, 300);
    double clean = evaluate_accuracy(e.model, e.data, 300);
    CHECK(result.mean_accuracy < clean - 0.30);
}

TEST_CASE("evaluate_plan: mask superset does not hurt at matched seeds") {
    auto& e = env();
    ChannelSpec chan{0.01, FlipDirection::Symmetric, 8};
    auto small = baseline_plan(2, e.model.layers.size(), 32, EccSpec::ideal(), 1.0);
    auto big = baseline_plan(9, e.model.layers.size(), 32, EccSpec::ideal(), 1.0);
    auto rs = evaluate_plan(e.model, small, Representation::float32(), chan,
                            e.data, 8, 300);
    auto rb = evaluate_plan(e.model, big, Representation::float32(), chan,
                            e.data, 8, 300);
    double pooled_se =
        std::sqrt((rs.stddev_accuracy * rs.stddev_accuracy +
                   rb.stddev_accuracy * rb.stddev_accuracy) /
                  8.0);
    CHECK(rb.mean_accuracy >= rs.mean_accuracy - 3 * pooled_se);
}

TEST_CASE("plan files: golden serialization and round trip") {
    ProtectionPlan plan;
    plan.ecc = EccSpec::block(8191, 6722, 115);
    plan.target_r = 0.045;
    plan.masks = {{1, 1, 0, 0, 0, 0, 0, 0}, {0, 1, 1, 0, 0, 0, 0, 1}};

    std::string text = plan_to_string(plan, 0.03125);
    CHECK(text ==
          "splan v1\n"
          "ecc block 8191 6722 115\n"
          "m 8\n"
          "target_r 0.044999999999999998\n"
          "achieved_r 0.03125\n"
          "mask 0 11000000\n"
          "mask 1 01100001\n");

    double achieved = 0.0;
    ProtectionPlan back = plan_from_string(text, &achieved);
    CHECK(back.masks == plan.masks);
    CHECK(back.target_r == plan.target_r);
    CHECK(back.ecc.kind == EccSpec::Kind::Block);
    CHECK(back.ecc.n == 8191);
    CHECK(achieved == 0.03125);

    const std::string path = "test_plan.splan";
    save_plan(plan, 0.03125, path);
    ProtectionPlan loaded = load_plan(path);
    CHECK(loaded.masks == plan.masks);
    std::remove(path.c_str());

    CHECK_THROWS_AS(plan_from_string("not a plan"), std::runtime_error);
}
