#pragma once

// Environment snapshot file:
//   {n, p, seed, h_cap, black: [[x,y],...], gray: [[x,y],...],
//    ancestor: ["E"|"W"|"N"|"S", ...], height: [int, ...]}
// The flat arrays are row-major, index = y * n + x; height -1 marks a
// site on a cycle of the ancestor map.

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "rwre/tree_env.hpp"

namespace rwre::tree {

struct SnapshotError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline nlohmann::ordered_json to_snapshot(const TreeArtifacts& art) {
    const Torus torus(art.n);
    nlohmann::ordered_json j;
    j["n"] = art.n;
    j["p"] = art.p;
    j["seed"] = art.seed;
    j["h_cap"] = art.h_cap;
    auto points = [&](const BitGrid& bits) {
        auto arr = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i]) {
                const Cell c = torus.cell(i);
                arr.push_back({c.x1, c.x2});
            }
        }
        return arr;
    };
    j["black"] = points(art.black);
    j["gray"] = points(art.gray);
    auto anc = nlohmann::ordered_json::array();
    for (Step s : art.ancestor) anc.push_back(std::string(1, code(s)));
    j["ancestor"] = std::move(anc);
    j["height"] = art.height;
    return j;
}

/// Parses and shape-checks a snapshot. Content is not validated here;
/// run validate_lemma on the result.
inline TreeArtifacts from_snapshot(const nlohmann::json& j) {
    TreeArtifacts art;
    try {
        art.n = j.at("n").get<int>();
        art.p = j.at("p").get<double>();
        art.seed = j.at("seed").get<std::uint64_t>();
        art.h_cap = j.at("h_cap").get<int>();
        if (art.n < 8) throw SnapshotError("snapshot: n must be >= 8");
        if (art.h_cap < 1) throw SnapshotError("snapshot: h_cap must be >= 1");
        const Torus torus(art.n);
        art.black.assign(torus.size(), 0);
        art.gray.assign(torus.size(), 0);
        auto read_points = [&](const char* key, BitGrid& bits) {
            for (const auto& pt : j.at(key)) {
                if (!pt.is_array() || pt.size() != 2) throw SnapshotError(std::string("snapshot: bad point in ") + key);
                const int x = pt[0].get<int>();
                const int y = pt[1].get<int>();
                if (x < 0 || y < 0 || x >= art.n || y >= art.n) {
                    throw SnapshotError(std::string("snapshot: point outside torus in ") + key);
                }
                bits[torus.index(x, y)] = 1;
            }
        };
        read_points("black", art.black);
        read_points("gray", art.gray);
        const auto& anc = j.at("ancestor");
        const auto& height = j.at("height");
        if (anc.size() != torus.size() || height.size() != torus.size()) {
            throw SnapshotError("snapshot: ancestor/height arrays must have n*n entries");
        }
        art.ancestor.reserve(torus.size());
        for (const auto& a : anc) {
            const auto s = a.get<std::string>();
            const auto step = s.size() == 1 ? step_from_code(s[0]) : std::nullopt;
            if (!step) throw SnapshotError("snapshot: ancestor code must be one of E, W, N, S");
            art.ancestor.push_back(*step);
        }
        art.height = height.get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw SnapshotError(std::string("snapshot: ") + e.what());
    }
    art.gray_length.assign(art.black.size(), -1);
    try {
        art.gray_length = grow_gray(art.black, art.n).length;
    } catch (const GrayLineDiverged&) {
    }
    return art;
}

}  // namespace rwre::tree
