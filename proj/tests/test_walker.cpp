#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "rwre/estimators.hpp"
#include "rwre/walker.hpp"

using namespace rwre;

namespace {

// Absorption probability at `hi` for the lazy walk on {lo, ..., hi} that
// steps +1 and -1 with probability 1/4 each, found by Gaussian elimination.
double lazy_walk_absorption(int lo, int hi, int start) {
    const int m = hi - lo - 1;  // transient states lo+1 .. hi-1
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (int r = 0; r < m; ++r) {
        a[r][r] = 0.5;  // 1 - P(stay)
        if (r > 0) a[r][r - 1] = -0.25;
        if (r + 1 < m) a[r][r + 1] = -0.25;
        else a[r][m] = 0.25;  // one step into hi
    }
    for (int c = 0; c < m; ++c) {
        for (int r = c + 1; r < m; ++r) {
            const double f = a[r][c] / a[c][c];
            for (int k = c; k <= m; ++k) a[r][k] -= f * a[c][k];
        }
    }
    std::vector<double> x(m);
    for (int r = m - 1; r >= 0; --r) {
        double s = a[r][m];
        for (int k = r + 1; k < m; ++k) s -= a[r][k] * x[k];
        x[r] = s / a[r][r];
    }
    return x[start - lo - 1];
}

}  // namespace

TEST(Walker, DeterministicEastEpisode) {
    FixedEnvironment env(deterministic(0));
    const auto spec = StopSpec::slab(std::nullopt, Threshold{5.0, false}, 100);
    const auto o = run_episode({0, 0}, env, spec, Direction::e1(), WalkSeed{1});
    EXPECT_EQ(o.reason, StopVerdict::UpperCrossed);
    EXPECT_EQ(o.steps, 5u);
    EXPECT_EQ(o.terminal, (LatticePoint{5, 0}));
    ASSERT_TRUE(o.crossing_perp);
    EXPECT_EQ(*o.crossing_perp, 0.0);
    EXPECT_EQ(run_for({0, 0}, env, 7, WalkSeed{3}), (LatticePoint{7, 0}));
}

TEST(Walker, DeterministicWestEpisode) {
    FixedEnvironment env(deterministic(1));
    const auto spec = StopSpec::slab(Threshold{0.0, true}, std::nullopt, 100);
    const auto o = run_episode({0, 0}, env, spec, Direction::e1(), WalkSeed{1});
    EXPECT_EQ(o.reason, StopVerdict::LowerCrossed);
    EXPECT_EQ(o.steps, 1u);
}

TEST(Walker, TargetAndCensoring) {
    FixedEnvironment env(deterministic(2));
    StopSpec spec;
    spec.targets.insert({0, 3});
    spec.max_steps = 10;
    EXPECT_EQ(run_episode({0, 0}, env, spec, Direction::e1(), WalkSeed{1}).reason, StopVerdict::TargetHit);
    spec.targets = {{1, 1}};
    const auto o = run_episode({0, 0}, env, spec, Direction::e1(), WalkSeed{1}, true);
    EXPECT_EQ(o.reason, StopVerdict::Censored);
    EXPECT_EQ(o.steps, 10u);
    EXPECT_EQ(o.trajectory.size(), 11u);
    EXPECT_FALSE(o.crossing_perp);
}

TEST(Walker, SymmetricNeighbourFrequencies) {
    FixedEnvironment env(symmetric_vector());
    CounterRng rng(8);
    std::array<int, 4> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto next = step({0, 0}, env, rng);
        for (std::size_t k = 0; k < 4; ++k) counts[k] += next == kNeighbourOffsets[k];
    }
    for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / n, 0.25, 0.01);
}

TEST(Walker, PickNeighbourSkipsZeroExits) {
    const TransitionVector tv{{0.5, 0.5, 0.0, 0.0}};
    EXPECT_EQ(pick_neighbour(tv, 0.0), 0u);
    EXPECT_EQ(pick_neighbour(tv, 0.75), 1u);
    EXPECT_EQ(pick_neighbour(tv, std::nextafter(1.0, 0.0)), 1u);
}

TEST(Walker, GamblersRuinOracle) {
    ASSERT_NEAR(lazy_walk_absorption(-1, 3, 0), 0.25, 1e-12);
    ASSERT_NEAR(lazy_walk_absorption(-1, 4, 0), 0.2, 1e-12);

    FixedEnvironment env(symmetric_vector());
    const auto spec = StopSpec::slab(Threshold{0.0, true}, Threshold{3.0, false}, 1000000);
    Tally t;
    for (std::uint64_t m = 0; m < 10000; ++m) {
        const auto o = run_episode({0, 0}, env, spec, Direction::e1(), WalkSeed{derive_seed(5, "ruin", m)});
        if (o.reason == StopVerdict::UpperCrossed) t.add_success();
        else if (o.reason == StopVerdict::LowerCrossed) t.add_failure();
        else t.add_censored();
    }
    const auto e = make_estimate(t);
    EXPECT_EQ(e.censored, 0u);
    EXPECT_NEAR(e.p_hat, lazy_walk_absorption(-1, 3, 0), 0.015);
}

TEST(Walker, EstimateR) {
    const auto d = Direction::e1();
    EXPECT_EQ(estimate_r({0, 0}, FixedEnvironment(deterministic(0)), d, 10, 50, 1, 1000).p_hat, 1.0);
    EXPECT_EQ(estimate_r({0, 0}, FixedEnvironment(deterministic(1)), d, 10, 50, 1, 1000).p_hat, 0.0);
    const auto e = estimate_r({0, 0}, FixedEnvironment(symmetric_vector()), d, 10, 10000, 1, 1000000);
    EXPECT_NEAR(e.p_hat, 0.5, 0.03);
    EXPECT_THROW(estimate_r({0, 0}, FixedEnvironment(symmetric_vector()), d, 0, 10, 1, 10), std::invalid_argument);
}

TEST(Walker, NearestNeighbourBound) {
    CounterRng pick(31);
    for (int i = 0; i < 300; ++i) {
        const IIDEnvironment env(pick(), DirichletLaw{});
        const auto L = static_cast<double>(1 + pick() % 12);
        const Direction d = i % 3 == 0   ? Direction::e1()
                            : i % 3 == 1 ? Direction::e2()
                                         : Direction::from_vector(pick.uniform() - 0.5, pick.uniform() - 0.5);
        const auto spec = StopSpec::slab(Threshold{-L, false}, Threshold{L, false}, 100000);
        const auto o = run_episode({0, 0}, env, spec, d, WalkSeed{pick()});
        if (o.reason == StopVerdict::UpperCrossed || o.reason == StopVerdict::LowerCrossed) {
            EXPECT_GE(o.steps, min_steps_between(0.0, L, d));
            if (d.is_coordinate()) {
                EXPECT_GE(o.steps, static_cast<std::uint64_t>(std::ceil(L)));
            }
        }
        EXPECT_LE(o.steps, spec.max_steps);
    }
}

TEST(Walker, ReplayIsBitExact) {
    const IIDEnvironment env(77, DirichletLaw{});
    const auto spec = StopSpec::slab(Threshold{-20.0, true}, Threshold{20.0, false}, 100000);
    const auto d = Direction::from_vector(1.0, 2.0);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto a = run_episode({0, 0}, env, spec, d, WalkSeed{s}, true);
        const auto b = run_episode({0, 0}, IIDEnvironment(77, DirichletLaw{}), spec, d, WalkSeed{s}, true);
        EXPECT_EQ(a.reason, b.reason);
        EXPECT_EQ(a.steps, b.steps);
        EXPECT_EQ(a.terminal, b.terminal);
        EXPECT_EQ(a.crossing_perp, b.crossing_perp);
        EXPECT_EQ(a.trajectory, b.trajectory);
    }
}

TEST(Walker, EscapeProbabilityRisesAlongCrossingPaths) {
    // Over many quenched Dirichlet environments, r at the point where a walk
    // first reaches projection L (having crossed to the right) exceeds r at
    // the start on average.
    const std::uint64_t L = 10;
    const std::uint64_t horizon = 5;
    const auto d = Direction::e1();
    const auto spec = StopSpec::slab(Threshold{-static_cast<double>(L), true}, Threshold{static_cast<double>(L), false},
                                     1000000);
    double start_sum = 0.0;
    double cross_sum = 0.0;
    int crossings = 0;
    const int envs = 60;
    for (int k = 0; k < envs; ++k) {
        const IIDEnvironment env(derive_seed(4, "env", k), DirichletLaw{});
        start_sum += estimate_r({0, 0}, env, d, horizon, 300, derive_seed(4, "r0", k), 1000000).p_hat;
        for (int m = 0; m < 5; ++m) {
            const auto o = run_episode({0, 0}, env, spec, d, WalkSeed{derive_seed(4, "walk", k * 5 + m)});
            if (o.reason != StopVerdict::UpperCrossed) continue;
            cross_sum += estimate_r(o.terminal, env, d, horizon, 300, derive_seed(4, "rT", k * 5 + m), 1000000).p_hat;
            ++crossings;
        }
    }
    ASSERT_GT(crossings, 20);
    EXPECT_GT(cross_sum / crossings, start_sum / envs);
}

TEST(Estimators, OneSidedCrossingOracles) {
    const auto srw = [](std::uint64_t) { return FixedEnvironment(symmetric_vector()); };
    const auto e = crossing_probability(srw, Direction::e1(), Side::Plus, 4.0, 10000, 1000000, TrialSeeds{1, 2});
    EXPECT_NEAR(e.p_hat, 0.2, 0.02);
    const auto east = [](std::uint64_t) { return FixedEnvironment(deterministic(0)); };
    EXPECT_EQ(crossing_probability(east, Direction::e1(), Side::Plus, 4.0, 100, 100, TrialSeeds{1, 2}).p_hat, 1.0);
    EXPECT_EQ(crossing_probability(east, Direction::e1(), Side::Minus, 4.0, 100, 100, TrialSeeds{1, 2}).p_hat, 0.0);
}

TEST(Estimators, ThreadCountDoesNotChangeResults) {
    const auto make = [](std::uint64_t s) { return IIDEnvironment(s, DirichletLaw{}); };
    const TrialSeeds seeds{3, 4};
    const auto one = crossing_tally(make, Direction::e1(), Side::Plus, 6.0, 400, 100000, seeds, 1);
    const auto four = crossing_tally(make, Direction::e1(), Side::Plus, 6.0, 400, 100000, seeds, 4);
    EXPECT_EQ(one, four);
}
