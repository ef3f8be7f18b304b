#pragma once

#include <cstdint>
#include <vector>

#include "rwre/lattice.hpp"
#include "rwre/parallel.hpp"
#include "rwre/random.hpp"
#include "rwre/stats.hpp"
#include "rwre/walker.hpp"

namespace rwre {

/// Maps an environment seed to an environment.
template <class F>
concept EnvironmentFactory = requires(const F& f, std::uint64_t seed) {
    { f(seed) } -> Environment;
};

/// Seeds for trial t. Annealed runs draw a fresh environment per trial,
/// quenched runs reuse the base environment seed.
struct TrialSeeds {
    std::uint64_t env_base = 0;
    std::uint64_t walk_base = 0;
    bool annealed = true;

    std::uint64_t env(std::uint64_t t) const { return annealed ? derive_seed(env_base, "env", t) : env_base; }
    std::uint64_t walk(std::uint64_t t, std::string_view tag = "walk") const { return derive_seed(walk_base, tag, t); }
};

enum class Side { Plus, Minus };

/// From the origin: Plus is {T_{>=L} < T_{<0}}, Minus is {T_{<=-L} < T_{>0}}.
inline StopSpec one_sided_spec(Side side, double L, std::uint64_t max_steps) {
    if (side == Side::Plus) return StopSpec::slab(Threshold{0.0, true}, Threshold{L, false}, max_steps);
    return StopSpec::slab(Threshold{-L, false}, Threshold{0.0, true}, max_steps);
}

template <EnvironmentFactory Factory>
Tally crossing_tally(const Factory& make_env, const Direction& d, Side side, double L, std::uint64_t trials,
                     std::uint64_t max_steps, const TrialSeeds& seeds, unsigned threads = 1) {
    const StopSpec spec = one_sided_spec(side, L, max_steps);
    const StopVerdict success = side == Side::Plus ? StopVerdict::UpperCrossed : StopVerdict::LowerCrossed;
    auto outcomes = parallel_map(trials, threads, [&](std::uint64_t t) {
        const auto env = make_env(seeds.env(t));
        return run_episode(LatticePoint{}, env, spec, d, WalkSeed{seeds.walk(t)}).reason;
    });
    Tally tally;
    for (StopVerdict v : outcomes) {
        if (v == StopVerdict::Censored) tally.add_censored();
        else if (v == success) tally.add_success();
        else tally.add_failure();
    }
    return tally;
}

/// P_0[T_{>=L} < T_{<0}] (Plus) or P_0[T_{<=-L} < T_{>0}] (Minus).
template <EnvironmentFactory Factory>
Estimate crossing_probability(const Factory& make_env, const Direction& d, Side side, double L, std::uint64_t trials,
                              std::uint64_t max_steps, const TrialSeeds& seeds, unsigned threads = 1) {
    return make_estimate(crossing_tally(make_env, d, side, L, trials, max_steps, seeds, threads), seeds.env_base,
                         seeds.walk_base);
}

/// X_{T_{>=2L}} . perp over pilot episodes with T_{>=2L} < T_{<0}.
template <EnvironmentFactory Factory>
std::vector<double> pilot_crossings(const Factory& make_env, const Direction& d, std::uint64_t L,
                                    std::uint64_t trials, std::uint64_t max_steps, const TrialSeeds& seeds,
                                    unsigned threads = 1) {
    const StopSpec spec = one_sided_spec(Side::Plus, 2.0 * static_cast<double>(L), max_steps);
    auto outcomes = parallel_map(trials, threads, [&](std::uint64_t t) {
        const auto env = make_env(seeds.env(t));
        return run_episode(LatticePoint{}, env, spec, d, WalkSeed{seeds.walk(t, "pilot")});
    });
    std::vector<double> perps;
    for (const auto& o : outcomes) {
        if (o.reason == StopVerdict::UpperCrossed) perps.push_back(*o.crossing_perp);
    }
    return perps;
}

}  // namespace rwre
