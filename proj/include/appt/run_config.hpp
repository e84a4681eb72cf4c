#pragma once

// The single JSON file that drives every CLI command.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "appt/mdp.hpp"

namespace appt {

struct ClusteringSection {
    int k_max = 10;
    int k = 0;  // 0 = use the elbow knee
    int restarts = 10;
    std::uint64_t seed = 1;
};

struct FeatureSection {
    double tolerance = 1e-6;
};

struct FluidSection {
    int t_steps = 28;
    double dt = 1.0;
    double tie_break = 1e-6;
};

struct ExactSection {
    double tolerance = 1e-9;
    int max_iterations = 100000;
    std::size_t max_states = 100000;
    int sim_days = 100000;  // days simulated when comparing a policy against the optimum
};

struct SimulationSection {
    int days = 365;
    int replications = 10;
    int warmup = 14;
    std::uint64_t seed = 1;
    std::filesystem::path policy;        // empty = extract from the fluid LP
    std::vector<std::string> compare;    // extra policies: earliest-slot, reject-all, published
    bool trace = false;
    bool next_day_adjustment = true;
};

struct RunConfig {
    std::filesystem::path dataset_path;
    std::map<std::string, std::string> aliases;
    ClusteringSection clustering;
    FeatureSection feature_select;
    mdp::MdpConfig mdp = mdp::MdpConfig::default_instance();
    FluidSection fluid;
    ExactSection exact;
    SimulationSection simulation;
    std::filesystem::path output_dir = "out";

    // Throws ConfigError.
    void validate() const;
};

// Relative paths inside the file resolve against the file's directory.
// Unknown keys anywhere throw ConfigError; IoError when unreadable.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::ordered_json& j, const std::filesystem::path& base_dir);
nlohmann::ordered_json to_json(const RunConfig& config);

struct ConfigKeyDoc {
    std::string key;
    std::string unit;
    std::string description;
};

// Every accepted key, for --help.
const std::vector<ConfigKeyDoc>& config_key_docs();

}  // namespace appt
