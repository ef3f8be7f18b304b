#pragma once

// Stationary environment built from two disjoint spanning trees on an n x n
// torus. Black sites come from a thinned Bernoulli field, every black site
// grows a gray line to the right, and T = black + gray drifts east while its
// complement drifts west. The walk runs on Z^2 against the periodic lift.

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/lattice.hpp"
#include "rwre/random.hpp"

namespace rwre::tree {

/// Torus cell: column x1 and row x2, both in [0, n).
struct Cell {
    int x1 = 0;
    int x2 = 0;
    friend constexpr bool operator==(const Cell&, const Cell&) = default;
};

class Torus {
public:
    explicit Torus(int n) : n_(n) {
        if (n < 8) throw std::invalid_argument("torus side must be >= 8");
    }

    int n() const { return n_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_); }

    int wrap(std::int64_t v) const {
        const auto r = v % n_;
        return static_cast<int>(r < 0 ? r + n_ : r);
    }
    std::size_t index(std::int64_t x1, std::int64_t x2) const {
        return static_cast<std::size_t>(wrap(x2)) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(wrap(x1));
    }
    std::size_t index(const LatticePoint& p) const { return index(p.x1, p.x2); }
    std::size_t shifted(std::size_t idx, int dx, int dy) const {
        const auto c = cell(idx);
        return index(c.x1 + dx, c.x2 + dy);
    }
    Cell cell(std::size_t idx) const {
        return {static_cast<int>(idx % static_cast<std::size_t>(n_)), static_cast<int>(idx / static_cast<std::size_t>(n_))};
    }

private:
    int n_;
};

using BitGrid = std::vector<std::uint8_t>;

struct TorusField {
    int n = 0;
    double p = 0.0;
    std::uint64_t seed = 0;
    BitGrid black_initial;
};

/// Offsets whose initial blackness removes a black point.
inline constexpr std::array<std::array<int, 2>, 6> kThinningOffsets{
    {{0, 1}, {0, -1}, {0, 2}, {0, -2}, {-1, 2}, {-1, -2}}};

/// Bernoulli(p) coloring, reproducible from the seed. p = 1 colors every site.
inline TorusField sample_coloring(int n, double p, std::uint64_t seed) {
    const Torus torus(n);
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("coloring probability must lie in (0, 1]");
    TorusField f{n, p, seed, BitGrid(torus.size(), 0)};
    const std::uint64_t key = derive_seed(seed, "coloring", 0);
    for (std::size_t i = 0; i < torus.size(); ++i) f.black_initial[i] = to_unit(mix64(key + mix64(i))) < p;
    return f;
}

/// Simultaneous removal: every decision reads the initial coloring.
inline BitGrid thin(const TorusField& field) {
    const Torus torus(field.n);
    BitGrid b(torus.size(), 0);
    for (std::size_t i = 0; i < torus.size(); ++i) {
        if (!field.black_initial[i]) continue;
        bool keep = true;
        for (const auto& o : kThinningOffsets) {
            if (field.black_initial[torus.shifted(i, o[0], o[1])]) {
                keep = false;
                break;
            }
        }
        b[i] = keep;
    }
    return b;
}

struct GrayLineDiverged : std::runtime_error {
    explicit GrayLineDiverged(Cell c)
        : std::runtime_error("gray line from (" + std::to_string(c.x1) + "," + std::to_string(c.x2) +
                             ") never reaches a neighbour of another black point"),
          origin(c) {}
    Cell origin;
};

struct AncestorUndefined : std::runtime_error {
    explicit AncestorUndefined(Cell c)
        : std::runtime_error("no ancestor case applies at (" + std::to_string(c.x1) + "," + std::to_string(c.x2) + ")"),
          at(c) {}
    Cell at;
};

struct GrayGrowth {
    BitGrid gray;
    std::vector<int> length;  // g(x) at black x, -1 elsewhere
};

/// g(x) = min{k >= 0 : x + k e1 in B + {e2, -e2, -e1}} for every black x,
/// where the black point matched must differ from x itself (on the torus
/// a line can otherwise wrap onto its own left neighbour). Scanning a full
/// lap without a match throws GrayLineDiverged.
inline GrayGrowth grow_gray(const BitGrid& black, int n) {
    const Torus torus(n);
    GrayGrowth out{BitGrid(torus.size(), 0), std::vector<int>(torus.size(), -1)};
    for (std::size_t i = 0; i < torus.size(); ++i) {
        if (!black[i]) continue;
        const Cell origin = torus.cell(i);
        std::optional<int> g;
        for (int k = 0; k < n && !g; ++k) {
            const std::int64_t t1 = origin.x1 + k;
            const bool below_black = black[torus.index(t1, origin.x2 - 1)];  // tip = b + e2
            const bool above_black = black[torus.index(t1, origin.x2 + 1)];  // tip = b - e2
            const std::size_t right = torus.index(t1 + 1, origin.x2);        // tip = b - e1
            const bool right_black = black[right] && right != i;
            if (below_black || above_black || right_black) g = k;
        }
        if (!g) throw GrayLineDiverged(origin);
        out.length[i] = *g;
        for (int k = 1; k <= *g; ++k) out.gray[torus.index(origin.x1 + k, origin.x2)] = 1;
    }
    return out;
}

/// a(x) - x as one of the four unit steps.
enum class Step : std::uint8_t { E = 0, W = 1, N = 2, S = 3 };

inline constexpr std::array<int, 4> kStepDx{1, -1, 0, 0};
inline constexpr std::array<int, 4> kStepDy{0, 0, 1, -1};
inline constexpr std::array<char, 4> kStepCode{'E', 'W', 'N', 'S'};

inline int dx(Step s) { return kStepDx[static_cast<std::size_t>(s)]; }
inline int dy(Step s) { return kStepDy[static_cast<std::size_t>(s)]; }
inline char code(Step s) { return kStepCode[static_cast<std::size_t>(s)]; }

inline std::optional<Step> step_from_code(char c) {
    for (std::size_t i = 0; i < 4; ++i) {
        if (kStepCode[i] == c) return static_cast<Step>(i);
    }
    return std::nullopt;
}

/// Ancestor steps in the listed case order; the first applicable case wins.
/// On T:   +e1; else +e2 if {x+e2, x+e1+e2} in T; else -e2 if {x-e2, x+e1-e2} in T.
/// On T^c: -e1; else +e2 if {x+e2, x-e1+e2} in T^c; else -e2 if {x-e2, x-e1-e2} in T^c.
inline std::vector<Step> ancestor_map(const BitGrid& in_tree, int n) {
    const Torus torus(n);
    std::vector<Step> a(torus.size(), Step::E);
    for (std::size_t i = 0; i < torus.size(); ++i) {
        const bool mine = in_tree[i];
        const int fwd = mine ? 1 : -1;
        auto same = [&](int ox, int oy) { return static_cast<bool>(in_tree[torus.shifted(i, ox, oy)]) == mine; };
        if (same(fwd, 0)) {
            a[i] = mine ? Step::E : Step::W;
        } else if (same(0, 1) && same(fwd, 1)) {
            a[i] = Step::N;
        } else if (same(0, -1) && same(fwd, -1)) {
            a[i] = Step::S;
        } else {
            throw AncestorUndefined(torus.cell(i));
        }
    }
    return a;
}

inline constexpr int kCycle = -1;

/// Longest chain of preimages ending at each site of the functional graph
/// of `a`. Sites on a cycle get kCycle; every other site has finite height
/// because its preimages never lie on a cycle.
inline std::vector<int> compute_heights(const std::vector<std::size_t>& successor) {
    const std::size_t size = successor.size();
    std::vector<int> indegree(size, 0);
    for (std::size_t s : successor) ++indegree[s];
    std::vector<int> h(size, 0);
    std::vector<std::size_t> queue;
    queue.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        if (indegree[i] == 0) queue.push_back(i);
    }
    std::vector<std::uint8_t> removed(size, 0);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::size_t y = queue[head];
        removed[y] = 1;
        const std::size_t x = successor[y];
        h[x] = std::max(h[x], h[y] + 1);
        if (--indegree[x] == 0) queue.push_back(x);
    }
    for (std::size_t i = 0; i < size; ++i) {
        if (!removed[i]) h[i] = kCycle;
    }
    return h;
}

inline std::vector<std::size_t> successors(const std::vector<Step>& a, int n) {
    const Torus torus(n);
    std::vector<std::size_t> succ(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) succ[i] = torus.shifted(i, dx(a[i]), dy(a[i]));
    return succ;
}

struct TreeArtifacts {
    int n = 0;
    double p = 0.0;
    std::uint64_t seed = 0;
    int h_cap = 50;
    BitGrid black;
    BitGrid gray;
    std::vector<int> gray_length;
    std::vector<Step> ancestor;
    std::vector<int> height;

    bool in_tree(std::size_t i) const { return black[i] || gray[i]; }
    BitGrid tree_mask() const {
        BitGrid t(black.size());
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = in_tree(i);
        return t;
    }
    /// min(h, h_cap), with cycle sites at h_cap.
    int effective_height(std::size_t i) const { return height[i] == kCycle ? h_cap : std::min(height[i], h_cap); }
};

/// Runs thinning, gray growth, ancestors and heights on a given coloring.
/// Propagates GrayLineDiverged and AncestorUndefined.
inline TreeArtifacts build_artifacts(const TorusField& field, int h_cap) {
    if (h_cap < 1) throw std::invalid_argument("h_cap must be >= 1");
    TreeArtifacts art;
    art.n = field.n;
    art.p = field.p;
    art.seed = field.seed;
    art.h_cap = h_cap;
    art.black = thin(field);
    auto growth = grow_gray(art.black, field.n);
    art.gray = std::move(growth.gray);
    art.gray_length = std::move(growth.length);
    art.ancestor = ancestor_map(art.tree_mask(), field.n);
    art.height = compute_heights(successors(art.ancestor, field.n));
    return art;
}

/// Exit weights of one site as integers over a common denominator:
/// ancestor (h^2 + 1) / (h^2 + 4), each other neighbour 1 / (h^2 + 4).
struct ExactWeights {
    std::int64_t ancestor = 0;
    std::int64_t other = 0;
    std::int64_t denominator = 0;
};

inline ExactWeights exact_weights(int h_eff) {
    const std::int64_t h2 = static_cast<std::int64_t>(h_eff) * h_eff;
    return {h2 + 1, 1, h2 + 4};
}

/// omega(x, a(x)) = 1 - 3/(h^2 + 4), the other three exits 1/(h^2 + 4).
inline TransitionVector transition_for(Step ancestor, int h_eff) {
    const double d = static_cast<double>(h_eff) * h_eff + 4.0;
    const double other = 1.0 / d;
    TransitionVector tv{{other, other, other, other}};
    tv.p[static_cast<std::size_t>(ancestor)] = 1.0 - 3.0 / d;
    return tv;
}

/// Immutable periodic environment; site(x) looks up x modulo n.
class TreeEnvironment {
public:
    explicit TreeEnvironment(TreeArtifacts artifacts) : art_(std::move(artifacts)), torus_(art_.n) {
        omega_.reserve(art_.ancestor.size());
        for (std::size_t i = 0; i < art_.ancestor.size(); ++i) {
            omega_.push_back(transition_for(art_.ancestor[i], art_.effective_height(i)));
        }
    }

    TransitionVector site(const LatticePoint& x) const { return omega_[torus_.index(x)]; }
    const TreeArtifacts& artifacts() const { return art_; }
    const Torus& torus() const { return torus_; }
    const TransitionVector& at(std::size_t i) const { return omega_[i]; }

private:
    TreeArtifacts art_;
    Torus torus_;
    std::vector<TransitionVector> omega_;
};

inline TreeEnvironment build_transitions(TreeArtifacts artifacts) { return TreeEnvironment(std::move(artifacts)); }

struct Construction {
    TreeEnvironment env;
    std::uint64_t accepted_seed = 0;
    int gray_rejections = 0;
    int ancestor_rejections = 0;
    int rejections() const { return gray_rejections + ancestor_rejections; }
};

struct ConstructionExhausted : std::runtime_error {
    ConstructionExhausted(int gray, int ancestor)
        : std::runtime_error("no valid realization within the resample budget (" + std::to_string(gray) +
                             " gray-line divergences, " + std::to_string(ancestor) + " undefined ancestors)"),
          gray_rejections(gray),
          ancestor_rejections(ancestor) {}
    int gray_rejections;
    int ancestor_rejections;
};

/// Builds a realization, resampling with seed + 1, seed + 2, ... whenever
/// the gray growth or the ancestor map fails on the torus.
inline Construction construct(int n, double p, std::uint64_t seed, int h_cap, int max_resamples = 100) {
    int gray = 0;
    int anc = 0;
    for (int attempt = 0; attempt <= max_resamples; ++attempt) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt);
        try {
            auto art = build_artifacts(sample_coloring(n, p, s), h_cap);
            return Construction{TreeEnvironment(std::move(art)), s, gray, anc};
        } catch (const GrayLineDiverged&) {
            ++gray;
        } catch (const AncestorUndefined&) {
            ++anc;
        }
    }
    throw ConstructionExhausted(gray, anc);
}

}  // namespace rwre::tree
