#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

namespace rwre {

struct LatticePoint {
    std::int64_t x1 = 0;
    std::int64_t x2 = 0;

    friend constexpr bool operator==(const LatticePoint&, const LatticePoint&) = default;
    friend constexpr LatticePoint operator+(LatticePoint a, LatticePoint b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
    friend constexpr LatticePoint operator-(LatticePoint a, LatticePoint b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
    friend std::ostream& operator<<(std::ostream& os, const LatticePoint& p) {
        return os << '(' << p.x1 << ',' << p.x2 << ')';
    }
};

inline constexpr LatticePoint kEast{1, 0};
inline constexpr LatticePoint kWest{-1, 0};
inline constexpr LatticePoint kNorth{0, 1};
inline constexpr LatticePoint kSouth{0, -1};

struct LatticePointHash {
    std::size_t operator()(const LatticePoint& p) const noexcept {
        auto h = static_cast<std::uint64_t>(p.x1) * 0x9e3779b97f4a7c15ULL;
        h ^= static_cast<std::uint64_t>(p.x2) + 0x7f4a7c159e3779b9ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

using PointSet = std::unordered_set<LatticePoint, LatticePointHash>;

/// Unit direction ell together with its counter-clockwise perpendicular.
/// The coordinate directions e1 and e2 are flagged so projections stay on
/// the integer path.
class Direction {
public:
    enum class Axis { E1, E2, General };

    static Direction e1() { return Direction(1.0, 0.0, Axis::E1); }
    static Direction e2() { return Direction(0.0, 1.0, Axis::E2); }

    /// Normalizes (l1, l2). Throws std::invalid_argument on a zero vector.
    static Direction from_vector(double l1, double l2) {
        const double norm = std::hypot(l1, l2);
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw std::invalid_argument("direction must be a finite nonzero vector");
        }
        const double a = l1 / norm;
        const double b = l2 / norm;
        if (a == 1.0 && b == 0.0) return e1();
        if (a == 0.0 && b == 1.0) return e2();
        return Direction(a, b, Axis::General);
    }

    double ell1() const { return ell1_; }
    double ell2() const { return ell2_; }
    double perp1() const { return -ell2_; }
    double perp2() const { return ell1_; }
    Axis axis() const { return axis_; }
    bool is_coordinate() const { return axis_ != Axis::General; }

private:
    Direction(double a, double b, Axis axis) : ell1_(a), ell2_(b), axis_(axis) {}

    double ell1_;
    double ell2_;
    Axis axis_;
};

inline double project(const LatticePoint& x, const Direction& d) {
    switch (d.axis()) {
        case Direction::Axis::E1: return static_cast<double>(x.x1);
        case Direction::Axis::E2: return static_cast<double>(x.x2);
        default: return static_cast<double>(x.x1) * d.ell1() + static_cast<double>(x.x2) * d.ell2();
    }
}

inline double perp_project(const LatticePoint& x, const Direction& d) {
    switch (d.axis()) {
        case Direction::Axis::E1: return static_cast<double>(x.x2);
        case Direction::Axis::E2: return -static_cast<double>(x.x1);
        default: return static_cast<double>(x.x1) * d.perp1() + static_cast<double>(x.x2) * d.perp2();
    }
}

/// Level plus comparator. For a lower threshold `strict` means `<`, else `<=`;
/// for an upper threshold `strict` means `>`, else `>=`.
struct Threshold {
    double level = 0.0;
    bool strict = true;
};

inline bool below(double value, const Threshold& t) { return t.strict ? value < t.level : value <= t.level; }
inline bool above(double value, const Threshold& t) { return t.strict ? value > t.level : value >= t.level; }

struct StopSpec {
    std::optional<Threshold> lower;
    std::optional<Threshold> upper;
    PointSet targets;
    std::uint64_t max_steps = 1;

    /// Throws std::invalid_argument when no stop condition is present or
    /// max_steps is zero.
    void validate() const {
        if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
        if (!lower && !upper && targets.empty()) {
            throw std::invalid_argument("stop spec needs a threshold or a target set");
        }
    }

    /// {T_{>=up} , T_{<lo}} style slab with the given comparators.
    static StopSpec slab(std::optional<Threshold> lo, std::optional<Threshold> up, std::uint64_t max_steps) {
        StopSpec s;
        s.lower = lo;
        s.upper = up;
        s.max_steps = max_steps;
        return s;
    }
};

enum class StopVerdict { Continue, TargetHit, LowerCrossed, UpperCrossed, Censored };

inline const char* to_string(StopVerdict v) {
    switch (v) {
        case StopVerdict::Continue: return "continue";
        case StopVerdict::TargetHit: return "target";
        case StopVerdict::LowerCrossed: return "lower";
        case StopVerdict::UpperCrossed: return "upper";
        case StopVerdict::Censored: return "censored";
    }
    return "?";
}

/// Priority: target, lower, upper, censor.
inline StopVerdict check_stop(const LatticePoint& x, std::uint64_t n, const StopSpec& spec, const Direction& d) {
    if (!spec.targets.empty() && spec.targets.contains(x)) return StopVerdict::TargetHit;
    if (spec.lower || spec.upper) {
        const double proj = project(x, d);
        if (spec.lower && below(proj, *spec.lower)) return StopVerdict::LowerCrossed;
        if (spec.upper && above(proj, *spec.upper)) return StopVerdict::UpperCrossed;
    }
    if (n >= spec.max_steps) return StopVerdict::Censored;
    return StopVerdict::Continue;
}

}  // namespace rwre
