#pragma once

// The CLI subcommands as library calls. Each writes fixed file names under
// `out` plus run_metadata.json (the only file carrying a timestamp), and
// returns a short human summary.

#include <filesystem>
#include <string>

#include "appt/fluid.hpp"
#include "appt/mdp.hpp"
#include "appt/run_config.hpp"

namespace appt {

struct GapReport {
    double exact_average = 0.0;   // greedy policy of the discounted optimum, stationary average
    double policy_average = 0.0;  // simulated mean daily cost of the quota policy
    double gap = 0.0;             // (policy - exact) / exact
    int iterations = 0;
    double bellman_residual = 0.0;
    std::size_t states = 0;
};

// Solves the instance exactly and simulates `policy` for exact.sim_days days
// (one replication, no warmup). Throws SizeError beyond exact.max_states.
GapReport exact_gap(const mdp::MdpConfig& config, const fluid::BenchmarkPolicy& policy, const ExactSection& exact,
                    std::uint64_t seed);

// Fluid LP -> extracted quotas for the configured instance.
fluid::BenchmarkPolicy fluid_policy(const RunConfig& config);

std::string cmd_cluster(const RunConfig& config, const std::filesystem::path& out);
std::string cmd_select_features(const RunConfig& config, const std::filesystem::path& out);
std::string cmd_schedule(const RunConfig& config, const std::filesystem::path& out, bool exact);
std::string cmd_simulate(const RunConfig& config, const std::filesystem::path& out);
std::string cmd_mdp_solve(const RunConfig& config, const std::filesystem::path& out);

}  // namespace appt
