#pragma once

// Run configuration and the batch commands behind the CLI. Every command
// returns its artifact as text so tests can regenerate rows and compare
// bytes. CSV rows share the prefix (run_id, env_seed, walk_seed, L) and a
// row depends only on its own seeds and L.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "rwre/environment.hpp"
#include "rwre/estimators.hpp"
#include "rwre/lattice.hpp"
#include "rwre/pair.hpp"
#include "rwre/snapshot.hpp"
#include "rwre/stats.hpp"
#include "rwre/tree_env.hpp"
#include "rwre/tree_validate.hpp"
#include "rwre/walker.hpp"

namespace rwre {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitValidation = 3,
    kExitPilot = 4,
    kExitConstruction = 5,
};

struct EnvSpec {
    enum class Kind { IID, Tree };
    Kind kind = Kind::IID;
    nlohmann::ordered_json source;  // as given, echoed into headers
    SiteLaw law = DirichletLaw{};
    int n = 64;
    double p = 1.0 / 7.0;
    int h_cap = 50;
    int max_resamples = 100;
};

struct RunConfig {
    std::string command;
    nlohmann::ordered_json direction_source = "e1";
    Direction direction = Direction::e1();
    EnvSpec env;
    std::vector<std::uint64_t> Ls{4, 8, 16};
    std::uint64_t trials = 10000;
    std::uint64_t pilot_trials = 10000;
    std::uint64_t max_steps = 100000;
    std::uint64_t K = 100;
    std::uint64_t M = 10;
    std::uint64_t env_seed = 1;
    std::uint64_t walk_seed = 2;
    std::string out;
    std::string in;
    unsigned threads = 1;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["direction"] = direction_source;
        j["environment"] = env.source;
        j["L"] = Ls;
        j["trials"] = trials;
        j["pilot_trials"] = pilot_trials;
        j["max_steps"] = max_steps;
        j["K"] = K;
        j["M"] = M;
        j["seeds"] = {{"env", env_seed}, {"walk", walk_seed}};
        if (!in.empty()) j["in"] = in;
        return j;
    }
};

/// Accepts a number or a "a/b" fraction string.
inline double parse_probability(const nlohmann::json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        const auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return std::stod(s);
            return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
        } catch (const std::exception&) {
        }
    }
    throw ConfigError("expected a probability, got " + v.dump());
}

inline std::array<double, 4> parse_four(const nlohmann::json& v, const char* what) {
    if (!v.is_array() || v.size() != 4) throw ConfigError(std::string(what) + " must be an array of 4 numbers");
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) out[i] = parse_probability(v[i]);
    return out;
}

inline EnvSpec parse_env(const nlohmann::ordered_json& j) {
    EnvSpec e;
    e.source = j;
    const auto kind = j.value("kind", std::string("dirichlet"));
    if (kind == "dirichlet") {
        e.law = DirichletLaw{j.contains("alpha") ? parse_four(j["alpha"], "alpha") : std::array<double, 4>{1, 1, 1, 1}};
    } else if (kind == "uniform-elliptic") {
        UniformEllipticLaw u;
        u.kappa = j.value("kappa", 0.05);
        if (j.contains("alpha")) u.base.alpha = parse_four(j["alpha"], "alpha");
        e.law = u;
    } else if (kind == "fixed") {
        if (!j.contains("p")) throw ConfigError("fixed environment needs p: [east, west, north, south]");
        e.law = FixedLaw{TransitionVector{parse_four(j["p"], "p")}};
    } else if (kind == "srw") {
        e.law = FixedLaw{symmetric_vector()};
    } else if (kind == "tree") {
        e.kind = EnvSpec::Kind::Tree;
        e.n = j.value("n", 64);
        e.p = j.contains("p") ? parse_probability(j["p"]) : 1.0 / 7.0;
        e.h_cap = j.value("h_cap", 50);
        e.max_resamples = j.value("max_resamples", 100);
        if (e.n < 8) throw ConfigError("tree environment needs n >= 8");
        if (!(e.p > 0.0 && e.p < 1.0)) throw ConfigError("tree environment needs p in (0, 1)");
        if (e.h_cap < 1) throw ConfigError("tree environment needs h_cap >= 1");
        if (e.max_resamples < 0) throw ConfigError("max_resamples must be >= 0");
        return e;
    } else {
        throw ConfigError("unknown environment kind '" + kind + "'");
    }
    try {
        validate_law(e.law);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what());
    }
    return e;
}

inline Direction parse_direction(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "e1") return Direction::e1();
        if (s == "e2") return Direction::e2();
        throw ConfigError("direction must be e1, e2 or [l1, l2]");
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        try {
            return Direction::from_vector(j[0].get<double>(), j[1].get<double>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    throw ConfigError("direction must be e1, e2 or [l1, l2]");
}

inline const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> cmds{"gen-env", "zero-one-scan", "counterexample-demo", "pair-experiment",
                                               "validate-env"};
    return cmds;
}

/// Fills a RunConfig from JSON on top of the command defaults and checks
/// it before anything is sampled.
inline RunConfig parse_config(const std::string& command, const nlohmann::ordered_json& j) {
    RunConfig c;
    c.command = command;
    try {
        if (j.contains("direction")) {
            c.direction_source = j["direction"];
            c.direction = parse_direction(j["direction"]);
        }
        if (j.contains("environment")) {
            c.env = parse_env(j["environment"]);
        } else if (command == "gen-env" || command == "counterexample-demo") {
            c.env = parse_env({{"kind", "tree"}, {"n", 64}, {"p", "1/7"}, {"h_cap", 50}});
        } else {
            c.env = parse_env({{"kind", "dirichlet"}, {"alpha", {1, 1, 1, 1}}});
        }
        if (j.contains("L")) c.Ls = j["L"].get<std::vector<std::uint64_t>>();
        c.trials = j.value("trials", c.trials);
        c.pilot_trials = j.value("pilot_trials", c.trials);
        c.max_steps = j.value("max_steps", c.max_steps);
        c.K = j.value("K", c.K);
        c.M = j.value("M", c.M);
        if (j.contains("seeds")) {
            c.env_seed = j["seeds"].value("env", c.env_seed);
            c.walk_seed = j["seeds"].value("walk", c.walk_seed);
        }
        c.out = j.value("out", c.out);
        c.in = j.value("in", c.in);
        c.threads = j.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline void validate_config(const RunConfig& c) {
    bool known = false;
    for (const auto& k : known_commands()) known |= k == c.command;
    if (!known) throw ConfigError("unknown command '" + c.command + "'");
    const bool tree = c.env.kind == EnvSpec::Kind::Tree;
    if ((c.command == "gen-env" || c.command == "counterexample-demo") && !tree) {
        throw ConfigError(c.command + " needs a tree environment");
    }
    if ((c.command == "zero-one-scan" || c.command == "pair-experiment") && tree) {
        throw ConfigError(c.command + " needs an i.i.d. environment");
    }
    if (c.command == "zero-one-scan" || c.command == "pair-experiment") {
        if (c.Ls.empty()) throw ConfigError("L list must not be empty");
        for (std::size_t i = 0; i < c.Ls.size(); ++i) {
            if (c.Ls[i] < 1) throw ConfigError("L values must be >= 1");
            if (i > 0 && c.Ls[i] <= c.Ls[i - 1]) throw ConfigError("L values must be strictly ascending");
        }
        if (c.trials < 1) throw ConfigError("trials must be >= 1");
    }
    if (c.command == "pair-experiment" && c.pilot_trials < 1) throw ConfigError("pilot_trials must be >= 1");
    if (c.command == "counterexample-demo" && (c.K < 1 || c.M < 1)) throw ConfigError("K and M must be >= 1");
    if (c.max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (c.command == "validate-env" && c.in.empty()) throw ConfigError("validate-env needs an input snapshot");
    if (c.threads < 1) throw ConfigError("threads must be >= 1");
}

inline std::string run_id(const RunConfig& c) {
    return fmt::format("{:016x}", derive_seed(c.env_seed ^ mix64(c.walk_seed), c.command, 0));
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline constexpr const char* kTimestampPrefix = "# timestamp: ";

/// Comment block opening every CSV. The timestamp line is the only part
/// that differs between reruns.
inline std::string csv_header_block(const RunConfig& c, const std::string& timestamp) {
    std::string s = "# rwre " + c.command + "\n";
    s += "# config: " + c.to_json().dump() + "\n";
    s += fmt::format("# seeds: env={} walk={}\n", c.env_seed, c.walk_seed);
    s += kTimestampPrefix + timestamp + "\n";
    return s;
}

/// Drops the timestamp line so two artifacts can be compared byte for byte.
inline std::string strip_timestamp(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
        if (line.rfind(kTimestampPrefix, 0) == 0) continue;
        out += line;
        out += '\n';
    }
    return out;
}

inline auto iid_factory(const SiteLaw& law) {
    return [law](std::uint64_t seed) { return IIDEnvironment(seed, law); };
}

// ---------------------------------------------------------------- zero-one-scan

inline constexpr const char* kScanColumns =
    "run_id,env_seed,walk_seed,L,q_plus,q_plus_lo,q_plus_hi,q_plus_k,q_plus_n,q_plus_censored,"
    "q_minus,q_minus_lo,q_minus_hi,q_minus_k,q_minus_n,q_minus_censored,product,product_lo,product_hi";

struct ScanRow {
    std::uint64_t L = 0;
    std::uint64_t env_seed = 0;
    std::uint64_t walk_seed = 0;
    Estimate q_plus;
    Estimate q_minus;
    double product() const { return q_plus.p_hat * q_minus.p_hat; }
};

inline ScanRow scan_row(const RunConfig& c, std::uint64_t L, std::uint64_t env_seed, std::uint64_t walk_seed) {
    const auto make_env = iid_factory(c.env.law);
    ScanRow r{L, env_seed, walk_seed, {}, {}};
    const double l = static_cast<double>(L);
    r.q_plus = crossing_probability(make_env, c.direction, Side::Plus, l, c.trials, c.max_steps,
                                    TrialSeeds{derive_seed(env_seed, "q+", 0), derive_seed(walk_seed, "q+", 0)},
                                    c.threads);
    r.q_minus = crossing_probability(make_env, c.direction, Side::Minus, l, c.trials, c.max_steps,
                                     TrialSeeds{derive_seed(env_seed, "q-", 0), derive_seed(walk_seed, "q-", 0)},
                                     c.threads);
    return r;
}

inline std::string format_scan_row(const RunConfig& c, const ScanRow& r) {
    const auto& a = r.q_plus;
    const auto& b = r.q_minus;
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", run_id(c), r.env_seed, r.walk_seed,
                       r.L, a.p_hat, a.ci_low, a.ci_high, a.successes, a.decided, a.censored, b.p_hat, b.ci_low,
                       b.ci_high, b.successes, b.decided, b.censored, r.product(), a.ci_low * b.ci_low,
                       a.ci_high * b.ci_high);
}

inline std::uint64_t row_env_seed(const RunConfig& c, std::uint64_t L) { return derive_seed(c.env_seed, c.command, L); }
inline std::uint64_t row_walk_seed(const RunConfig& c, std::uint64_t L) {
    return derive_seed(c.walk_seed, c.command, L);
}

inline std::vector<ScanRow> zero_one_scan(const RunConfig& c) {
    std::vector<ScanRow> rows;
    for (std::uint64_t L : c.Ls) rows.push_back(scan_row(c, L, row_env_seed(c, L), row_walk_seed(c, L)));
    return rows;
}

inline std::string zero_one_scan_csv(const RunConfig& c, const std::vector<ScanRow>& rows, const std::string& ts) {
    std::string s = csv_header_block(c, ts) + kScanColumns + "\n";
    for (const auto& r : rows) s += format_scan_row(c, r) + "\n";
    return s;
}

// ---------------------------------------------------------- counterexample-demo

inline constexpr const char* kDemoColumns =
    "run_id,env_seed,walk_seed,L,env_index,accepted_seed,rejections,walks,right,left,middle,"
    "f_right,f_right_lo,f_right_hi,f_left,f_left_lo,f_left_hi,f_middle";

/// Final-position classes of M walks of max_steps steps from the origin:
/// right if X.e1 >= max_steps/4, left if X.e1 <= -max_steps/4.
struct DemoRow {
    std::string env_index;
    std::uint64_t env_seed = 0;
    std::uint64_t walk_seed = 0;
    std::uint64_t accepted_seed = 0;
    int rejections = 0;
    std::uint64_t right = 0;
    std::uint64_t left = 0;
    std::uint64_t middle = 0;
    std::uint64_t walks() const { return right + left + middle; }
};

inline DemoRow demo_env_row(const RunConfig& c, std::uint64_t index, std::uint64_t env_seed,
                            std::uint64_t walk_seed) {
    const auto built = tree::construct(c.env.n, c.env.p, env_seed, c.env.h_cap, c.env.max_resamples);
    DemoRow r;
    r.env_index = std::to_string(index);
    r.env_seed = env_seed;
    r.walk_seed = walk_seed;
    r.accepted_seed = built.accepted_seed;
    r.rejections = built.rejections();
    const auto ends = parallel_map(c.M, c.threads, [&](std::uint64_t m) {
        return run_for(LatticePoint{}, built.env, c.max_steps, WalkSeed{derive_seed(walk_seed, "walk", m)});
    });
    const auto steps = static_cast<std::int64_t>(c.max_steps);
    for (const auto& x : ends) {
        if (4 * x.x1 >= steps) ++r.right;
        else if (4 * x.x1 <= -steps) ++r.left;
        else ++r.middle;
    }
    return r;
}

inline std::string format_demo_row(const RunConfig& c, const DemoRow& r) {
    Tally right{r.right, r.walks(), 0};
    Tally left{r.left, r.walks(), 0};
    const auto er = make_estimate(right);
    const auto el = make_estimate(left);
    const double mid = r.walks() == 0 ? 0.0 : static_cast<double>(r.middle) / static_cast<double>(r.walks());
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", run_id(c), r.env_seed, r.walk_seed,
                       (c.max_steps + 3) / 4, r.env_index, r.accepted_seed, r.rejections, r.walks(), r.right, r.left,
                       r.middle, er.p_hat, er.ci_low, er.ci_high, el.p_hat, el.ci_low, el.ci_high, mid);
}

struct DemoResult {
    std::vector<DemoRow> envs;
    DemoRow total;
    double f_right() const { return static_cast<double>(total.right) / static_cast<double>(total.walks()); }
    double f_left() const { return static_cast<double>(total.left) / static_cast<double>(total.walks()); }
    double f_middle() const { return static_cast<double>(total.middle) / static_cast<double>(total.walks()); }
};

inline DemoResult counterexample_demo(const RunConfig& c) {
    DemoResult res;
    res.total.env_index = "all";
    res.total.env_seed = c.env_seed;
    res.total.walk_seed = c.walk_seed;
    for (std::uint64_t k = 0; k < c.K; ++k) {
        auto row = demo_env_row(c, k, derive_seed(c.env_seed, "demo", k), derive_seed(c.walk_seed, "demo", k));
        res.total.right += row.right;
        res.total.left += row.left;
        res.total.middle += row.middle;
        res.total.rejections += row.rejections;
        res.envs.push_back(std::move(row));
    }
    return res;
}

inline std::string counterexample_csv(const RunConfig& c, const DemoResult& res, const std::string& ts) {
    std::string s = csv_header_block(c, ts) + kDemoColumns + "\n";
    for (const auto& r : res.envs) s += format_demo_row(c, r) + "\n";
    s += format_demo_row(c, res.total) + "\n";
    return s;
}

// -------------------------------------------------------------- pair-experiment

inline constexpr const char* kPairColumns =
    "run_id,env_seed,walk_seed,L,z1,z2,x_L,y_L,pilot_crossings,trials,censored,joint,intersected,avoided,"
    "c_lower,c_upper,sign_violations,joint_hat,C_hat,C_lo,C_hi,N_hat,N_lo,N_hi,C_lower_hat,C_upper_hat,"
    "q_plus,q_minus,q_plus_2L,q_minus_2L,product_2L,slack,inequality_holds";

struct PairRow {
    std::uint64_t env_seed = 0;
    std::uint64_t walk_seed = 0;
    AuditRow audit;
};

inline AuditSettings audit_settings(const RunConfig& c) { return {c.trials, c.pilot_trials, c.max_steps}; }

/// Throws NoPilotCrossings when the pilot never crosses 2L.
inline PairRow pair_row(const RunConfig& c, std::uint64_t L, std::uint64_t env_seed, std::uint64_t walk_seed) {
    return {env_seed, walk_seed,
            audit_row(iid_factory(c.env.law), c.direction, L, audit_settings(c), env_seed, walk_seed, c.threads)};
}

inline std::string format_pair_row(const RunConfig& c, const PairRow& r) {
    const auto& a = r.audit;
    const auto& p = a.pair;
    const auto& k = p.counts;
    return fmt::format(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", run_id(c),
        r.env_seed, r.walk_seed, a.L, p.config.z_L.x1, p.config.z_L.x2, p.config.x_L, p.config.y_L, a.pilot_size,
        k.trials, k.censored, k.joint, k.intersected, k.avoided, k.c_lower, k.c_upper, k.sign_violations,
        p.joint_hat.p_hat, p.C_hat.p_hat, p.C_hat.ci_low, p.C_hat.ci_high, p.N_hat.p_hat, p.N_hat.ci_low,
        p.N_hat.ci_high, p.C_lower_hat.p_hat, p.C_upper_hat.p_hat, a.q_plus.p_hat, a.q_minus.p_hat,
        a.q_plus_2L.p_hat, a.q_minus_2L.p_hat, a.product_2L, a.slack, a.inequality_holds ? 1 : 0);
}

struct PairExperiment {
    std::vector<PairRow> rows;
    bool c_trend_ok = true;
};

inline PairExperiment pair_experiment(const RunConfig& c) {
    PairExperiment res;
    for (std::uint64_t L : c.Ls) res.rows.push_back(pair_row(c, L, row_env_seed(c, L), row_walk_seed(c, L)));
    for (std::size_t i = 1; i < res.rows.size(); ++i) {
        const auto& prev = res.rows[i - 1].audit.pair.C_hat;
        const auto& cur = res.rows[i].audit.pair.C_hat;
        if (cur.p_hat > prev.p_hat + 2.0 * (prev.half_width() + cur.half_width())) res.c_trend_ok = false;
    }
    return res;
}

inline std::string pair_csv(const RunConfig& c, const PairExperiment& res, const std::string& ts) {
    std::string s = csv_header_block(c, ts) + kPairColumns + "\n";
    for (const auto& r : res.rows) s += format_pair_row(c, r) + "\n";
    return s;
}

// ---------------------------------------------------------------------- gen-env

struct GeneratedEnv {
    tree::Construction construction;
    tree::LemmaReport report;
};

/// Throws tree::ConstructionExhausted when every resample is rejected.
inline GeneratedEnv generate_env(const RunConfig& c) {
    auto built = tree::construct(c.env.n, c.env.p, c.env_seed, c.env.h_cap, c.env.max_resamples);
    auto report = tree::validate_lemma(built.env.artifacts());
    return {std::move(built), std::move(report)};
}

/// The snapshot contract plus a leading "run" block with the config.
inline std::string snapshot_text(const RunConfig& c, const GeneratedEnv& g, const std::string& ts) {
    nlohmann::ordered_json j;
    auto run = c.to_json();
    run["accepted_seed"] = g.construction.accepted_seed;
    run["rejections"] = {{"gray_line_diverged", g.construction.gray_rejections},
                         {"ancestor_undefined", g.construction.ancestor_rejections}};
    run["lemma"] = g.report.passed() ? "pass" : "fail";
    run["timestamp"] = ts;
    j["run"] = std::move(run);
    const auto snapshot = tree::to_snapshot(g.construction.env.artifacts());
    for (const auto& [key, value] : snapshot.items()) j[key] = value;
    return j.dump() + "\n";
}

}  // namespace rwre
