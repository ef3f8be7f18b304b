#pragma once

// Two independent walkers in one quenched environment. Walker 1 starts at
// the origin and runs until T_{>=2L} or T_{<0}; walker 2 starts at z_L and
// runs until T_{<=0} or T_{>x_L}. On the joint crossing event their stopped
// paths either share a vertex or avoid each other.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rwre/estimators.hpp"
#include "rwre/lattice.hpp"
#include "rwre/parallel.hpp"
#include "rwre/stats.hpp"
#include "rwre/walker.hpp"

namespace rwre {

struct NoPilotCrossings : std::runtime_error {
    NoPilotCrossings() : std::runtime_error("no pilot episode crossed 2L before 0; enlarge the pilot or the direction is not transient") {}
};

struct PairConfig {
    std::uint64_t L = 1;
    Direction d = Direction::e1();
    LatticePoint z_L;
    double x_L = 0.0;
    double y_L = 0.0;
    LatticePoint w_L;
    std::uint64_t trials = 1;
    std::uint64_t max_steps = 1;

    /// Throws std::invalid_argument unless x_L >= 2L and w_L is a neighbour
    /// of z_L below 2L.
    void validate() const {
        const double two_l = 2.0 * static_cast<double>(L);
        if (L < 1) throw std::invalid_argument("pair: L must be >= 1");
        if (x_L < two_l) throw std::invalid_argument("pair: x_L must be >= 2L");
        const auto diff = w_L - z_L;
        if (std::abs(diff.x1) + std::abs(diff.x2) != 1) throw std::invalid_argument("pair: w_L must neighbour z_L");
        if (!(project(w_L, d) < two_l)) throw std::invalid_argument("pair: w_L must project below 2L");
        if (max_steps < 1) throw std::invalid_argument("pair: max_steps must be >= 1");
    }
};

/// Smallest sample value m with #{< m} <= n/2 and #{> m} <= n/2.
inline double smallest_median(std::vector<double> sample) {
    if (sample.empty()) throw NoPilotCrossings();
    std::sort(sample.begin(), sample.end());
    const std::size_t n = sample.size();
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && sample[j] == sample[i]) ++j;
        const std::size_t less = i;
        const std::size_t greater = n - j;
        if (2 * less <= n && 2 * greater <= n) return sample[i];
        i = j;
    }
    return sample[n / 2];  // unreachable for a nonempty sample
}

/// Picks z_L from pilot crossing-perp values. For e1 this is (2L, y_L)
/// with y_L the smallest median. Otherwise the lattice points with x.l >= 2L
/// and a neighbour below 2L form a band; among them take x.perp nearest the
/// median, then smaller x.l, then smaller x.perp.
inline PairConfig choose_zL(std::uint64_t L, const Direction& d, const std::vector<double>& pilot,
                            std::uint64_t trials = 1, std::uint64_t max_steps = 1) {
    if (pilot.empty()) throw NoPilotCrossings();
    const double m = smallest_median(pilot);
    const double two_l = 2.0 * static_cast<double>(L);
    PairConfig cfg;
    cfg.L = L;
    cfg.d = d;
    cfg.trials = trials;
    cfg.max_steps = max_steps;
    if (d.axis() == Direction::Axis::E1) {
        cfg.z_L = {static_cast<std::int64_t>(2 * L), static_cast<std::int64_t>(std::llround(m))};
        cfg.w_L = cfg.z_L - kEast;
    } else if (d.axis() == Direction::Axis::E2) {
        // perp = (-1, 0), so x.perp = m means x1 = -m.
        cfg.z_L = {-static_cast<std::int64_t>(std::llround(m)), static_cast<std::int64_t>(2 * L)};
        cfg.w_L = cfg.z_L - kNorth;
    } else {
        const double c1 = two_l * d.ell1() + m * d.perp1();
        const double c2 = two_l * d.ell2() + m * d.perp2();
        const auto b1 = static_cast<std::int64_t>(std::floor(c1));
        const auto b2 = static_cast<std::int64_t>(std::floor(c2));
        std::optional<LatticePoint> best;
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::int64_t i = b1 - 3; i <= b1 + 4; ++i) {
            for (std::int64_t j = b2 - 3; j <= b2 + 4; ++j) {
                const LatticePoint x{i, j};
                const double px = project(x, d);
                if (px < two_l) continue;
                bool has_low_neighbour = false;
                for (const auto& o : kNeighbourOffsets) has_low_neighbour |= project(x + o, d) < two_l;
                if (!has_low_neighbour) continue;
                const double gap = std::abs(perp_project(x, d) - m);
                bool better = !best || gap < best_gap;
                if (best && gap == best_gap) {
                    const double bp = project(*best, d);
                    better = px < bp || (px == bp && perp_project(x, d) < perp_project(*best, d));
                }
                if (better) {
                    best = x;
                    best_gap = gap;
                }
            }
        }
        cfg.z_L = *best;
        cfg.w_L = cfg.z_L;
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto& o : kNeighbourOffsets) {
            const double pw = project(cfg.z_L + o, d);
            if (pw < lowest) {
                lowest = pw;
                cfg.w_L = cfg.z_L + o;
            }
        }
    }
    cfg.x_L = project(cfg.z_L, d);
    cfg.y_L = perp_project(cfg.z_L, d);
    return cfg;
}

enum class Band { Lower, Upper };

struct PairOutcome {
    EpisodeOutcome outcome1;
    EpisodeOutcome outcome2;
    bool both_crossed = false;
    bool censored = false;
    bool intersected = false;
    std::optional<LatticePoint> first_common;  // first vertex of walker 1's path also visited by walker 2
    std::optional<Band> common_band;           // Lower iff first_common . l <= L
    int s1 = 0;                                // sign(y_L - walker 1 crossing perp)
    int s2 = 0;                                // sign(walker 2 crossing perp)

    bool avoided() const { return both_crossed && !intersected; }
    /// On the joint event an avoiding pair must have equal nonzero signs.
    bool sign_violation() const { return avoided() && !(s1 == s2 && s1 != 0); }
};

inline int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

inline StopSpec walker1_spec(const PairConfig& cfg) {
    return StopSpec::slab(Threshold{0.0, true}, Threshold{2.0 * static_cast<double>(cfg.L), false}, cfg.max_steps);
}
inline StopSpec walker2_spec(const PairConfig& cfg) {
    return StopSpec::slab(Threshold{0.0, false}, Threshold{cfg.x_L, true}, cfg.max_steps);
}

/// Classifies two stopped paths against the pair configuration.
inline PairOutcome classify_pair(const PairConfig& cfg, EpisodeOutcome o1, EpisodeOutcome o2) {
    PairOutcome out;
    out.censored = o1.reason == StopVerdict::Censored || o2.reason == StopVerdict::Censored;
    out.both_crossed = o1.reason == StopVerdict::UpperCrossed && o2.reason == StopVerdict::LowerCrossed;
    PointSet second(o2.trajectory.begin(), o2.trajectory.end());
    for (const auto& x : o1.trajectory) {
        if (second.contains(x)) {
            out.intersected = true;
            out.first_common = x;
            out.common_band = project(x, cfg.d) <= static_cast<double>(cfg.L) ? Band::Lower : Band::Upper;
            break;
        }
    }
    if (o1.crossing_perp) out.s1 = sign_of(cfg.y_L - *o1.crossing_perp);
    if (o2.crossing_perp) out.s2 = sign_of(*o2.crossing_perp);
    out.outcome1 = std::move(o1);
    out.outcome2 = std::move(o2);
    return out;
}

template <Environment Env>
PairOutcome run_pair(const Env& env, const PairConfig& cfg, WalkSeed seed1, WalkSeed seed2) {
    auto o1 = run_episode(LatticePoint{}, env, walker1_spec(cfg), cfg.d, seed1, true);
    auto o2 = run_episode(cfg.z_L, env, walker2_spec(cfg), cfg.d, seed2, true);
    return classify_pair(cfg, std::move(o1), std::move(o2));
}

/// Additive pair counts; joint == intersected + avoided by construction.
struct PairCounts {
    std::uint64_t trials = 0;
    std::uint64_t censored = 0;
    std::uint64_t joint = 0;
    std::uint64_t intersected = 0;
    std::uint64_t avoided = 0;
    std::uint64_t c_lower = 0;
    std::uint64_t c_upper = 0;
    std::uint64_t sign_violations = 0;
    std::uint64_t zero_sign_intersections = 0;  // intersected pairs with a zero or mismatched sign

    std::uint64_t decided() const { return trials - censored; }

    void add(const PairOutcome& o) {
        ++trials;
        if (o.censored) {
            ++censored;
            return;
        }
        if (!o.both_crossed) return;
        ++joint;
        if (o.intersected) {
            ++intersected;
            if (o.common_band == Band::Lower) ++c_lower;
            else ++c_upper;
            if (!(o.s1 == o.s2 && o.s1 != 0)) ++zero_sign_intersections;
        } else {
            ++avoided;
            if (o.sign_violation()) ++sign_violations;
        }
    }

    PairCounts& operator+=(const PairCounts& o) {
        trials += o.trials;
        censored += o.censored;
        joint += o.joint;
        intersected += o.intersected;
        avoided += o.avoided;
        c_lower += o.c_lower;
        c_upper += o.c_upper;
        sign_violations += o.sign_violations;
        zero_sign_intersections += o.zero_sign_intersections;
        return *this;
    }
    friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

struct PairReport {
    PairConfig config;
    PairCounts counts;
    Estimate C_hat;
    Estimate N_hat;
    Estimate joint_hat;
    Estimate C_lower_hat;
    Estimate C_upper_hat;
};

inline Estimate count_estimate(std::uint64_t k, const PairCounts& c, const TrialSeeds& seeds) {
    Tally t;
    t.successes = k;
    t.decided = c.decided();
    t.censored = c.censored;
    return make_estimate(t, seeds.env_base, seeds.walk_base);
}

inline PairReport make_pair_report(const PairConfig& cfg, const PairCounts& c, const TrialSeeds& seeds) {
    return {cfg,
            c,
            count_estimate(c.intersected, c, seeds),
            count_estimate(c.avoided, c, seeds),
            count_estimate(c.joint, c, seeds),
            count_estimate(c.c_lower, c, seeds),
            count_estimate(c.c_upper, c, seeds)};
}

/// C_L / N_L estimates over cfg.trials pairs. Censored pairs are excluded
/// from the partition and reported.
template <EnvironmentFactory Factory>
PairReport estimate_CN(const Factory& make_env, const PairConfig& cfg, const TrialSeeds& seeds, unsigned threads = 1) {
    cfg.validate();
    auto counts = parallel_map(cfg.trials, threads, [&](std::uint64_t t) {
        const auto env = make_env(seeds.env(t));
        PairCounts c;
        c.add(run_pair(env, cfg, WalkSeed{seeds.walk(t, "pair-1")}, WalkSeed{seeds.walk(t, "pair-2")}));
        return c;
    });
    PairCounts total;
    for (const auto& c : counts) total += c;
    return make_pair_report(cfg, total, seeds);
}

struct AuditRow {
    std::uint64_t L = 0;
    Estimate q_plus;      // P_0[T_{>=L} < T_{<0}]
    Estimate q_minus;     // P_0[T_{<=-L} < T_{>0}]
    Estimate q_plus_2L;
    Estimate q_minus_2L;
    std::size_t pilot_size = 0;
    PairReport pair;
    double product_2L = 0.0;
    double slack = 0.0;   // summed CI half-widths of q_plus_2L, q_minus_2L and joint_hat
    bool inequality_holds = false;
};

struct Audit {
    std::vector<AuditRow> rows;
    bool c_trend_ok = true;  // C_hat non-increasing within 2 summed CI half-widths
};

struct AuditSettings {
    std::uint64_t trials = 1000;
    std::uint64_t pilot_trials = 1000;
    std::uint64_t max_steps = 100000;
};

/// Per-L row: single-walker probabilities, pilot, z_L and the pair
/// partition, checked against q+(2L) q-(2L) <= joint(L) + slack.
template <EnvironmentFactory Factory>
AuditRow audit_row(const Factory& make_env, const Direction& d, std::uint64_t L, const AuditSettings& s,
                   std::uint64_t env_seed, std::uint64_t walk_seed, unsigned threads = 1) {
    const auto sub = [&](std::string_view tag) {
        return TrialSeeds{derive_seed(env_seed, tag, 0), derive_seed(walk_seed, tag, 0), true};
    };
    const double l = static_cast<double>(L);
    AuditRow row;
    row.L = L;
    row.q_plus = crossing_probability(make_env, d, Side::Plus, l, s.trials, s.max_steps, sub("q+L"), threads);
    row.q_minus = crossing_probability(make_env, d, Side::Minus, l, s.trials, s.max_steps, sub("q-L"), threads);
    row.q_plus_2L = crossing_probability(make_env, d, Side::Plus, 2 * l, s.trials, s.max_steps, sub("q+2L"), threads);
    row.q_minus_2L = crossing_probability(make_env, d, Side::Minus, 2 * l, s.trials, s.max_steps, sub("q-2L"), threads);
    const auto pilot = pilot_crossings(make_env, d, L, s.pilot_trials, s.max_steps, sub("pilot"), threads);
    row.pilot_size = pilot.size();
    const PairConfig cfg = choose_zL(L, d, pilot, s.trials, s.max_steps);
    row.pair = estimate_CN(make_env, cfg, sub("pair"), threads);
    row.product_2L = row.q_plus_2L.p_hat * row.q_minus_2L.p_hat;
    row.slack = row.q_plus_2L.half_width() + row.q_minus_2L.half_width() + row.pair.joint_hat.half_width();
    row.inequality_holds = row.product_2L <= row.pair.joint_hat.p_hat + row.slack;
    return row;
}

template <EnvironmentFactory Factory>
Audit audit_chain(const Factory& make_env, const Direction& d, const std::vector<std::uint64_t>& Ls,
                  const AuditSettings& s, std::uint64_t env_base, std::uint64_t walk_base, unsigned threads = 1) {
    if (!std::is_sorted(Ls.begin(), Ls.end())) throw std::invalid_argument("audit: L values must be ascending");
    Audit audit;
    for (std::uint64_t L : Ls) {
        audit.rows.push_back(audit_row(make_env, d, L, s, derive_seed(env_base, "audit", L),
                                       derive_seed(walk_base, "audit", L), threads));
    }
    for (std::size_t i = 1; i < audit.rows.size(); ++i) {
        const auto& prev = audit.rows[i - 1].pair.C_hat;
        const auto& cur = audit.rows[i].pair.C_hat;
        if (cur.p_hat > prev.p_hat + 2.0 * (prev.half_width() + cur.half_width())) audit.c_trend_ok = false;
    }
    return audit;
}

}  // namespace rwre
