#pragma once

// JSON and CSV forms of module results. JSON output is deterministic for a
// given value: keys in insertion order, doubles printed round-trip exact.

#include <filesystem>
#include <ostream>

#include <json.hpp>

#include "appt/clustering.hpp"
#include "appt/feature_select.hpp"
#include "appt/fluid.hpp"
#include "appt/mdp.hpp"
#include "appt/simulator.hpp"

namespace appt::io {

using nlohmann::ordered_json;

ordered_json to_json(const clustering::ClusteringResult& result);
ordered_json to_json(const clustering::ElbowCurve& curve);
ordered_json to_json(const features::EntropyRanking& ranking, const std::vector<std::string>& names);
ordered_json to_json(const features::SubsetSelection& selection, const std::vector<std::string>& names);
ordered_json to_json(const mdp::MdpConfig& config);
ordered_json to_json(const fluid::BenchmarkPolicy& policy);
ordered_json to_json(const fluid::FluidSolution& solution);
ordered_json to_json(const sim::SimulationReport& report);
ordered_json to_json(const sim::Comparison& comparison);

// Strict: unknown keys and missing required keys throw ConfigError.
mdp::MdpConfig mdp_config_from_json(const ordered_json& j);
fluid::BenchmarkPolicy policy_from_json(const ordered_json& j);

// Table-shaped policy: header "class,d1,...,dH", one row per class.
void write_policy_csv(std::ostream& out, const fluid::BenchmarkPolicy& policy);
fluid::BenchmarkPolicy read_policy_csv(std::istream& in);
// Chooses the format by extension (.json or .csv). Throws IoError/ConfigError.
fluid::BenchmarkPolicy read_policy_file(const std::filesystem::path& path);

void write_elbow_csv(std::ostream& out, const clustering::ElbowCurve& curve);
void write_trace_csv(std::ostream& out, const sim::SimulationReport& report);
// One row per state: x_1..x_I, y_1..y_H, value, then the greedy action cells.
void write_value_csv(std::ostream& out, const mdp::MdpConfig& config, const mdp::ValueIterationResult& result);

// Writes j with two-space indentation and a trailing newline. Throws IoError.
void write_json_file(const std::filesystem::path& path, const ordered_json& j);
ordered_json read_json_file(const std::filesystem::path& path);

}  // namespace appt::io
