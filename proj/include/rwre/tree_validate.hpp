#pragma once

#include <map>
#include <string>
#include <vector>

#include "rwre/tree_env.hpp"

namespace rwre::tree {

struct Violation {
    std::string check;
    Cell at;
};

struct LemmaReport {
    std::map<std::string, std::size_t> failures;  // check name -> number of failing sites
    std::vector<Violation> examples;              // first failing site of each check

    bool passed() const { return failures.empty(); }

    void fail(const std::string& check, Cell at) {
        if (failures[check]++ == 0) examples.push_back({check, at});
    }

    std::string summary() const {
        if (passed()) return "lemma: pass";
        std::string s = "lemma: FAIL";
        for (const auto& v : examples) {
            s += "\n  " + v.check + " x" + std::to_string(failures.at(v.check)) + " first at (" +
                 std::to_string(v.at.x1) + "," + std::to_string(v.at.x2) + ")";
        }
        return s;
    }
};

/// Exhaustive structural check of one realization: thinning, B and G
/// disjoint and G consistent with B, nonempty complement, both
/// trichotomies, ancestor steps and case order, no two consecutive vertical
/// ancestor steps, and heights strictly increasing along ancestors away
/// from cycles.
inline LemmaReport validate_lemma(const TreeArtifacts& art) {
    LemmaReport r;
    const Torus torus(art.n);
    const std::size_t size = torus.size();
    if (art.black.size() != size || art.gray.size() != size || art.ancestor.size() != size ||
        art.height.size() != size) {
        r.fail("shape", {0, 0});
        return r;
    }
    auto T = [&](std::size_t i, int ox, int oy) { return art.in_tree(torus.shifted(i, ox, oy)); };

    bool any_complement = false;
    for (std::size_t i = 0; i < size; ++i) {
        const Cell c = torus.cell(i);
        if (art.black[i]) {
            for (const auto& o : kThinningOffsets) {
                if (art.black[torus.shifted(i, o[0], o[1])]) {
                    r.fail("thinning", c);
                    break;
                }
            }
            if (art.gray[i]) r.fail("black-gray-disjoint", c);
        }
        const bool in_t = art.in_tree(i);
        if (!in_t) any_complement = true;

        if (in_t) {
            if (!(T(i, 1, 0) || (T(i, 0, 1) && T(i, 1, 1)) || (T(i, 0, -1) && T(i, 1, -1)))) r.fail("trichotomy-T", c);
        } else {
            if (!(!T(i, -1, 0) || (!T(i, 0, 1) && !T(i, -1, 1)) || (!T(i, 0, -1) && !T(i, -1, -1)))) {
                r.fail("trichotomy-Tc", c);
            }
        }

        const Step s = art.ancestor[i];
        const std::size_t parent = torus.shifted(i, dx(s), dy(s));
        const bool allowed = in_t ? s != Step::W : s != Step::E;
        if (!allowed || art.in_tree(parent) != in_t) r.fail("ancestor-step", c);

        const Step s2 = art.ancestor[parent];
        const int advance = dx(s) + dx(s2);
        if (in_t ? advance < 1 : advance > -1) r.fail("double-vertical", c);

        if (art.height[i] != kCycle && art.height[parent] != kCycle && art.height[parent] < art.height[i] + 1) {
            r.fail("height-increase", c);
        }
    }
    if (!any_complement) r.fail("complement-nonempty", {0, 0});

    try {
        const auto growth = grow_gray(art.black, art.n);
        for (std::size_t i = 0; i < size; ++i) {
            if (growth.gray[i] != art.gray[i]) r.fail("gray-consistency", torus.cell(i));
        }
    } catch (const GrayLineDiverged& e) {
        r.fail("gray-consistency", e.origin);
    }

    try {
        const auto a = ancestor_map(art.tree_mask(), art.n);
        for (std::size_t i = 0; i < size; ++i) {
            if (a[i] != art.ancestor[i]) r.fail("ancestor-case-order", torus.cell(i));
        }
    } catch (const AncestorUndefined& e) {
        r.fail("ancestor-case-order", e.at);
    }

    const auto h = compute_heights(successors(art.ancestor, art.n));
    for (std::size_t i = 0; i < size; ++i) {
        if (h[i] != art.height[i]) r.fail("height-consistency", torus.cell(i));
    }
    return r;
}

}  // namespace rwre::tree
