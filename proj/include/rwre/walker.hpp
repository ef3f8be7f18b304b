#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/lattice.hpp"
#include "rwre/random.hpp"
#include "rwre/stats.hpp"

namespace rwre {

struct WalkSeed {
    std::uint64_t stream = 0;
};

struct EpisodeOutcome {
    StopVerdict reason = StopVerdict::Censored;
    std::uint64_t steps = 0;
    LatticePoint terminal;
    std::optional<double> crossing_perp;
    std::vector<LatticePoint> trajectory;  // empty unless requested
};

/// Index into (E, W, N, S) by inverse CDF of u in [0, 1).
inline std::size_t pick_neighbour(const TransitionVector& tv, double u) {
    double c = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        c += tv.p[i];
        if (u < c) return i;
    }
    if (tv.p[3] > 0.0) return 3;
    // Rounding pushed u past a partial sum whose remainder is zero.
    for (std::size_t i = 3; i-- > 0;) {
        if (tv.p[i] > 0.0) return i;
    }
    return 3;
}

template <Environment Env>
LatticePoint step(const LatticePoint& x, const Env& env, CounterRng& rng) {
    return x + kNeighbourOffsets[pick_neighbour(env.site(x), rng.uniform())];
}

/// Runs one quenched walk until `spec` fires. The stopping rule is checked
/// at time 0 as well.
template <Environment Env>
EpisodeOutcome run_episode(const LatticePoint& start, const Env& env, const StopSpec& spec, const Direction& d,
                           WalkSeed seed, bool record_trajectory = false) {
    CounterRng rng(seed.stream);
    EpisodeOutcome out;
    LatticePoint x = start;
    std::uint64_t n = 0;
    if (record_trajectory) out.trajectory.push_back(x);
    StopVerdict v = check_stop(x, n, spec, d);
    while (v == StopVerdict::Continue) {
        x = step(x, env, rng);
        ++n;
        if (record_trajectory) out.trajectory.push_back(x);
        v = check_stop(x, n, spec, d);
    }
    out.reason = v;
    out.steps = n;
    out.terminal = x;
    if (v == StopVerdict::LowerCrossed || v == StopVerdict::UpperCrossed) out.crossing_perp = perp_project(x, d);
    return out;
}

/// Exactly `steps` steps with no stopping rule; returns the endpoint.
template <Environment Env>
LatticePoint run_for(const LatticePoint& start, const Env& env, std::uint64_t steps, WalkSeed seed) {
    CounterRng rng(seed.stream);
    LatticePoint x = start;
    for (std::uint64_t n = 0; n < steps; ++n) x = step(x, env, rng);
    return x;
}

/// Slab exit {T_{>= x.l + horizon} < T_{< x.l - horizon}} from x, the
/// finite-horizon stand-in for directional escape.
inline StopSpec escape_spec(const LatticePoint& x, const Direction& d, double horizon, std::uint64_t max_steps) {
    const double base = project(x, d);
    return StopSpec::slab(Threshold{base - horizon, true}, Threshold{base + horizon, false}, max_steps);
}

/// Quenched estimate of the escape probability r(x) with the slab proxy
/// of half-width `horizon`. Censored walks are reported, not counted.
template <Environment Env>
Estimate estimate_r(const LatticePoint& x, const Env& env, const Direction& d, std::uint64_t horizon,
                    std::uint64_t trials, std::uint64_t base_seed, std::uint64_t max_steps) {
    if (trials < 1 || horizon < 1) throw std::invalid_argument("estimate_r: trials and horizon must be >= 1");
    const StopSpec spec = escape_spec(x, d, static_cast<double>(horizon), max_steps);
    Tally t;
    for (std::uint64_t m = 0; m < trials; ++m) {
        const auto o = run_episode(x, env, spec, d, WalkSeed{derive_seed(base_seed, "r", m)});
        if (o.reason == StopVerdict::UpperCrossed) t.add_success();
        else if (o.reason == StopVerdict::LowerCrossed) t.add_failure();
        else t.add_censored();
    }
    return make_estimate(t, 0, base_seed);
}

/// Lower bound on the number of steps a nearest-neighbour walk needs to
/// move its projection from `from` to `to`.
inline std::uint64_t min_steps_between(double from, double to, const Direction& d) {
    const double step_len = std::max(std::abs(d.ell1()), std::abs(d.ell2()));
    return static_cast<std::uint64_t>(std::ceil(std::abs(to - from) / step_len - 1e-12));
}

}  // namespace rwre
