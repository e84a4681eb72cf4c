// apptsched: clustering, fluid scheduling and simulation from one JSON config.
//
// Exit codes: 0 success, 1 domain error, 2 I/O or config error.

#include <exception>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "appt/commands.hpp"
#include "appt/errors.hpp"
#include "appt/run_config.hpp"

namespace {

std::string key_table() {
    std::ostringstream s;
    s << "\nConfig keys (JSON, all optional; unknown keys are rejected):\n";
    for (const auto& doc : appt::config_key_docs()) {
        s << "  " << doc.key;
        for (std::size_t pad = doc.key.size(); pad < 32; ++pad) s << ' ';
        s << '[' << doc.unit << "] " << doc.description << '\n';
    }
    return s.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Priority clustering and rolling-horizon appointment scheduling"};
    app.footer(key_table());
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "override every seed in the config");
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");

    auto* cluster = app.add_subcommand("cluster", "ingest, elbow, feature selection, K-means vs Ward");
    auto* select = app.add_subcommand("select-features", "entropy ranking and wrapper selection");
    auto* schedule = app.add_subcommand("schedule", "solve the fluid LP and extract the quota policy");
    bool exact = false;
    schedule->add_flag("--exact", exact, "also solve the MDP exactly and report the gap (small instances)");
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo evaluation of a quota policy");
    std::string policy_path;
    bool trace = false;
    std::vector<std::string> compare;
    simulate->add_option("--policy", policy_path, "policy file (.json or .csv)")->check(CLI::ExistingFile);
    simulate->add_flag("--trace", trace, "write trace.csv");
    simulate->add_option("--compare", compare, "extra policies: earliest-slot, reject-all, published");
    auto* solve = app.add_subcommand("mdp-solve", "value iteration on a small instance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        appt::RunConfig config = config_path.empty() ? appt::RunConfig{} : appt::load_run_config(config_path);
        if (seed) {
            config.clustering.seed = *seed;
            config.simulation.seed = *seed;
            config.mdp.seed = *seed;
        }
        if (!out_dir.empty()) config.output_dir = out_dir;
        if (!policy_path.empty()) config.simulation.policy = policy_path;
        if (trace) config.simulation.trace = true;
        if (!compare.empty()) config.simulation.compare = compare;
        config.validate();

        std::string summary;
        if (*cluster) {
            summary = appt::cmd_cluster(config, config.output_dir);
        } else if (*select) {
            summary = appt::cmd_select_features(config, config.output_dir);
        } else if (*schedule) {
            summary = appt::cmd_schedule(config, config.output_dir, exact);
        } else if (*simulate) {
            summary = appt::cmd_simulate(config, config.output_dir);
        } else if (*solve) {
            summary = appt::cmd_mdp_solve(config, config.output_dir);
        }
        std::cout << summary << '\n';
        return 0;
    } catch (const appt::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const appt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const appt::SchemaError& e) {
        std::cerr << "dataset error: " << e.what() << '\n';
        return 2;
    } catch (const appt::RowError& e) {
        std::cerr << "dataset error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
