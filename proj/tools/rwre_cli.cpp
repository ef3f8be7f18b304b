#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rwre/experiments.hpp"

namespace {

using rwre::RunConfig;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> walk_seed;
    std::optional<std::uint64_t> trials;
    std::optional<unsigned> threads;
    std::string out;
    std::string in;
};

nlohmann::ordered_json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw rwre::ConfigError("cannot open " + path);
    try {
        return nlohmann::ordered_json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw rwre::ConfigError(path + ": " + e.what());
    }
}

RunConfig load_config(const std::string& command, const Overrides& o) {
    nlohmann::ordered_json j = o.config_path.empty() ? nlohmann::ordered_json::object() : read_json_file(o.config_path);
    if (j.contains("command") && j["command"] != command) {
        throw rwre::ConfigError("config file is for '" + j["command"].get<std::string>() + "', not '" + command + "'");
    }
    RunConfig c = rwre::parse_config(command, j);
    if (o.seed) c.env_seed = *o.seed;
    if (o.walk_seed) c.walk_seed = *o.walk_seed;
    if (o.trials) {
        c.trials = *o.trials;
        if (!j.contains("pilot_trials")) c.pilot_trials = *o.trials;
    }
    if (o.threads) c.threads = *o.threads;
    if (!o.out.empty()) c.out = o.out;
    if (!o.in.empty()) c.in = o.in;
    rwre::validate_config(c);
    return c;
}

void emit(const RunConfig& c, const std::string& text) {
    if (c.out.empty() || c.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw rwre::ConfigError("cannot write " + c.out);
    f << text;
}

int cmd_gen_env(const RunConfig& c) {
    const auto g = rwre::generate_env(c);
    emit(c, rwre::snapshot_text(c, g, rwre::utc_timestamp()));
    std::cerr << "accepted seed " << g.construction.accepted_seed << " after " << g.construction.gray_rejections
              << " gray-line and " << g.construction.ancestor_rejections << " ancestor rejections\n"
              << g.report.summary() << "\n";
    return g.report.passed() ? rwre::kExitOk : rwre::kExitValidation;
}

int cmd_validate_env(const RunConfig& c) {
    const auto art = rwre::tree::from_snapshot(read_json_file(c.in));
    const auto report = rwre::tree::validate_lemma(art);
    std::cout << report.summary() << "\n";
    return report.passed() ? rwre::kExitOk : rwre::kExitValidation;
}

int cmd_zero_one_scan(const RunConfig& c) {
    const auto rows = rwre::zero_one_scan(c);
    emit(c, rwre::zero_one_scan_csv(c, rows, rwre::utc_timestamp()));
    for (const auto& r : rows) {
        std::cerr << "L=" << r.L << " q+=" << r.q_plus.p_hat << " q-=" << r.q_minus.p_hat << " product=" << r.product()
                  << " censored=" << r.q_plus.censored + r.q_minus.censored << "\n";
    }
    return rwre::kExitOk;
}

int cmd_counterexample_demo(const RunConfig& c) {
    const auto res = rwre::counterexample_demo(c);
    emit(c, rwre::counterexample_csv(c, res, rwre::utc_timestamp()));
    std::cerr << "f_right=" << res.f_right() << " f_left=" << res.f_left() << " f_middle=" << res.f_middle()
              << " rejections=" << res.total.rejections << "\n";
    return rwre::kExitOk;
}

int cmd_pair_experiment(const RunConfig& c) {
    rwre::PairExperiment res;
    try {
        res = rwre::pair_experiment(c);
    } catch (const rwre::NoPilotCrossings& e) {
        std::cerr << "pilot failure: " << e.what()
                  << "\nhint: raise pilot_trials or max_steps, or scan the opposite direction\n";
        return rwre::kExitPilot;
    }
    emit(c, rwre::pair_csv(c, res, rwre::utc_timestamp()));
    for (const auto& r : res.rows) {
        const auto& k = r.audit.pair.counts;
        std::cerr << "L=" << r.audit.L << " joint=" << k.joint << " = C " << k.intersected << " + N " << k.avoided
                  << (k.joint == k.intersected + k.avoided ? " (partition ok)" : " (PARTITION BROKEN)")
                  << " sign violations=" << k.sign_violations
                  << " inequality=" << (r.audit.inequality_holds ? "ok" : "violated") << "\n";
    }
    std::cerr << "C_hat trend: " << (res.c_trend_ok ? "non-increasing within 2 CI" : "increasing") << "\n";
    return rwre::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo laboratory for planar random walks in random environments"};
    app.require_subcommand(1);

    Overrides o;
    std::string chosen;
    const std::map<std::string, std::string> about{
        {"gen-env", "build a tree environment on a torus and write its JSON snapshot"},
        {"zero-one-scan", "estimate q+(L), q-(L) and their product over the L list"},
        {"counterexample-demo", "final-position fractions of walks in tree environments"},
        {"pair-experiment", "two-walker intersection audit with pilot-chosen z_L"},
        {"validate-env", "re-check a snapshot against the construction invariants"},
    };
    for (const auto& name : rwre::known_commands()) {
        auto* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("-c,--config", o.config_path, "JSON run configuration");
        sub->add_option("--seed", o.seed, "environment seed");
        sub->add_option("--walk-seed", o.walk_seed, "walk seed");
        sub->add_option("--trials", o.trials, "trials per estimate");
        sub->add_option("--threads", o.threads, "worker threads");
        sub->add_option("-o,--out", o.out, "output path (default stdout)");
        if (name == "validate-env") sub->add_option("-i,--in", o.in, "snapshot to validate");
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? rwre::kExitOk : rwre::kExitConfig;
    }

    try {
        const RunConfig c = load_config(chosen, o);
        if (chosen == "gen-env") return cmd_gen_env(c);
        if (chosen == "validate-env") return cmd_validate_env(c);
        if (chosen == "zero-one-scan") return cmd_zero_one_scan(c);
        if (chosen == "counterexample-demo") return cmd_counterexample_demo(c);
        return cmd_pair_experiment(c);
    } catch (const rwre::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return rwre::kExitConfig;
    } catch (const rwre::tree::SnapshotError& e) {
        std::cerr << e.what() << "\n";
        return rwre::kExitValidation;
    } catch (const rwre::tree::ConstructionExhausted& e) {
        std::cerr << e.what() << "\n";
        return rwre::kExitConstruction;
    }
}
