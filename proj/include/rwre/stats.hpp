#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "rwre/random.hpp"

namespace rwre {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
    double low = 0.0;
    double high = 1.0;
    double half_width() const { return 0.5 * (high - low); }
};

/// Wilson score interval for k successes in n trials.
inline Interval wilson(std::uint64_t k, std::uint64_t n, double z = kZ95) {
    if (n == 0) throw std::invalid_argument("wilson: n must be >= 1");
    if (k > n) throw std::invalid_argument("wilson: k must not exceed n");
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    const double z2 = z * z;
    const double denom = nn + z2;
    const double centre = (kk + 0.5 * z2) / denom;
    const double half = z / denom * std::sqrt(kk * (nn - kk) / nn + 0.25 * z2);
    // Clamp the rounding at k == 0 and k == n so low <= k/n <= high holds exactly.
    const double p_hat = kk / nn;
    return {std::clamp(std::min(centre - half, p_hat), 0.0, 1.0), std::clamp(std::max(centre + half, p_hat), 0.0, 1.0)};
}

/// Additive counts. Censored outcomes never enter k or n.
struct Tally {
    std::uint64_t successes = 0;
    std::uint64_t decided = 0;
    std::uint64_t censored = 0;

    void add_success() { ++successes, ++decided; }
    void add_failure() { ++decided; }
    void add_censored() { ++censored; }

    std::uint64_t total() const { return decided + censored; }

    Tally& operator+=(const Tally& o) {
        successes += o.successes;
        decided += o.decided;
        censored += o.censored;
        return *this;
    }
    friend Tally operator+(Tally a, const Tally& b) { return a += b; }
    friend bool operator==(const Tally&, const Tally&) = default;
};

struct Estimate {
    std::uint64_t successes = 0;
    std::uint64_t decided = 0;
    std::uint64_t censored = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::uint64_t env_seed = 0;
    std::uint64_t walk_seed = 0;

    /// Successes over every trial, censored ones counted as failures.
    double p_hat_all() const {
        const auto all = decided + censored;
        return all == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(all);
    }
    double half_width() const { return 0.5 * (ci_high - ci_low); }
};

/// With nothing decided the estimate is 0 with the vacuous interval [0, 1].
inline Estimate make_estimate(const Tally& t, std::uint64_t env_seed = 0, std::uint64_t walk_seed = 0,
                              double z = kZ95) {
    Estimate e;
    e.successes = t.successes;
    e.decided = t.decided;
    e.censored = t.censored;
    e.env_seed = env_seed;
    e.walk_seed = walk_seed;
    if (t.decided > 0) {
        e.p_hat = static_cast<double>(t.successes) / static_cast<double>(t.decided);
        const auto ci = wilson(t.successes, t.decided, z);
        e.ci_low = ci.low;
        e.ci_high = ci.high;
    }
    return e;
}

/// Pools K environments x M walks of a Bernoulli outcome. `trial(env_seed,
/// walk_seed)` returns +1 success, 0 failure, -1 censored; the env seed for
/// environment k and the walk seed for walk m inside it derive from the
/// two bases.
template <class Trial>
Estimate annealed(Trial&& trial, std::uint64_t env_base, std::uint64_t walk_base, std::uint64_t K, std::uint64_t M,
                  double z = kZ95) {
    if (K * M < 1) throw std::invalid_argument("annealed: need at least one trial");
    Tally t;
    for (std::uint64_t k = 0; k < K; ++k) {
        const std::uint64_t env_seed = derive_seed(env_base, "env", k);
        for (std::uint64_t m = 0; m < M; ++m) {
            const std::uint64_t walk_seed = derive_seed(walk_base, "walk", k * M + m);
            const int r = trial(env_seed, walk_seed);
            if (r > 0) t.add_success();
            else if (r == 0) t.add_failure();
            else t.add_censored();
        }
    }
    return make_estimate(t, env_base, walk_base, z);
}

}  // namespace rwre
