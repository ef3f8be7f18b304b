#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

#include "rwre/lattice.hpp"
#include "rwre/random.hpp"

namespace rwre {

/// Exit probabilities of one site, in the fixed order (E, W, N, S).
struct TransitionVector {
    std::array<double, 4> p{0.25, 0.25, 0.25, 0.25};

    double east() const { return p[0]; }
    double west() const { return p[1]; }
    double north() const { return p[2]; }
    double south() const { return p[3]; }

    double sum() const { return p[0] + p[1] + p[2] + p[3]; }
    double min_entry() const { return *std::min_element(p.begin(), p.end()); }
    bool elliptic() const { return min_entry() > 0.0; }
    bool uniformly_elliptic(double kappa) const { return min_entry() > kappa; }

    friend bool operator==(const TransitionVector&, const TransitionVector&) = default;
};

inline constexpr std::array<LatticePoint, 4> kNeighbourOffsets{kEast, kWest, kNorth, kSouth};

struct TransitionReport {
    double sum_deviation = 0.0;
    double min_entry = 0.0;
    bool valid = false;       // nonnegative and sums to 1 within 1e-9
    bool passes_kappa = false;  // valid and every entry > kappa (> 0 when kappa == 0)
    std::string reason;

    bool passed() const { return valid && passes_kappa; }
};

inline TransitionReport validate(const TransitionVector& tv, double kappa) {
    TransitionReport r;
    r.sum_deviation = std::abs(tv.sum() - 1.0);
    r.min_entry = tv.min_entry();
    if (r.min_entry < 0.0) {
        r.reason = "negative entry";
    } else if (r.sum_deviation > 1e-9) {
        r.reason = "entries do not sum to 1";
    } else {
        r.valid = true;
    }
    if (r.valid) {
        r.passes_kappa = r.min_entry > kappa;
        if (!r.passes_kappa) r.reason = kappa == 0.0 ? "not elliptic" : "below ellipticity constant";
    }
    return r;
}

struct DirichletLaw {
    std::array<double, 4> alpha{1.0, 1.0, 1.0, 1.0};
};

/// kappa + (1 - 4 kappa) * Dirichlet(base) per entry.
struct UniformEllipticLaw {
    double kappa = 0.05;
    DirichletLaw base;
};

struct FixedLaw {
    TransitionVector tv;
};

using SiteLaw = std::variant<DirichletLaw, UniformEllipticLaw, FixedLaw>;

/// Throws std::invalid_argument on out-of-range parameters.
inline void validate_law(const SiteLaw& law) {
    auto check_alpha = [](const DirichletLaw& d) {
        for (double a : d.alpha) {
            if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("Dirichlet parameters must be positive");
        }
    };
    std::visit(
        [&](const auto& l) {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, DirichletLaw>) {
                check_alpha(l);
            } else if constexpr (std::is_same_v<L, UniformEllipticLaw>) {
                if (!(l.kappa > 0.0 && l.kappa < 0.25)) throw std::invalid_argument("kappa must lie in (0, 1/4)");
                check_alpha(l.base);
            } else {
                if (!validate(l.tv, 0.0).valid) {
                    throw std::invalid_argument("fixed transition vector is not a probability vector");
                }
            }
        },
        law);
}

inline TransitionVector sample_dirichlet(CounterRng& rng, const DirichletLaw& law) {
    TransitionVector tv;
    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        tv.p[i] = rng.gamma(law.alpha[i]);
        total += tv.p[i];
    }
    for (double& v : tv.p) v /= total;
    return tv;
}

/// One draw from the site law using the supplied stream.
inline TransitionVector sample_law(CounterRng& rng, const SiteLaw& law) {
    return std::visit(
        [&](const auto& l) -> TransitionVector {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, DirichletLaw>) {
                return sample_dirichlet(rng, l);
            } else if constexpr (std::is_same_v<L, UniformEllipticLaw>) {
                TransitionVector tv = sample_dirichlet(rng, l.base);
                for (double& v : tv.p) v = l.kappa + (1.0 - 4.0 * l.kappa) * v;
                return tv;
            } else {
                return l.tv;
            }
        },
        law);
}

/// Anything that maps a lattice point to its exit probabilities.
template <class E>
concept Environment = requires(const E& env, LatticePoint x) {
    { env.site(x) } -> std::convertible_to<TransitionVector>;
};

/// i.i.d. environment with lazily sampled sites. A site is a pure function
/// of (env_seed, x), so the unbounded lattice needs no storage and any
/// number of walkers see the same quenched realization.
class IIDEnvironment {
public:
    IIDEnvironment(std::uint64_t env_seed, SiteLaw law) : seed_(env_seed), law_(std::move(law)) {
        validate_law(law_);
    }

    TransitionVector site(const LatticePoint& x) const {
        if (const auto* fixed = std::get_if<FixedLaw>(&law_)) return fixed->tv;
        const std::uint64_t key = mix64(mix64(seed_) ^ mix64(static_cast<std::uint64_t>(x.x1))) +
                                  mix64(static_cast<std::uint64_t>(x.x2) ^ 0x632be59bd9b4e019ULL);
        CounterRng rng(key);
        return sample_law(rng, law_);
    }

    std::uint64_t seed() const { return seed_; }
    const SiteLaw& law() const { return law_; }

private:
    std::uint64_t seed_;
    SiteLaw law_;
};

class FixedEnvironment {
public:
    explicit FixedEnvironment(TransitionVector tv) : tv_(tv) {}
    TransitionVector site(const LatticePoint&) const { return tv_; }

private:
    TransitionVector tv_;
};

/// Wraps a callable; used for hand-built environments.
template <class F>
class FunctionEnvironment {
public:
    explicit FunctionEnvironment(F f) : f_(std::move(f)) {}
    TransitionVector site(const LatticePoint& x) const { return f_(x); }

private:
    F f_;
};

inline TransitionVector symmetric_vector() { return {}; }
inline TransitionVector deterministic(std::size_t direction) {
    TransitionVector tv{{0.0, 0.0, 0.0, 0.0}};
    tv.p.at(direction) = 1.0;
    return tv;
}

}  // namespace rwre
