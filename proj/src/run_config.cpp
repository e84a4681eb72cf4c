#include "appt/run_config.hpp"

#include <set>

#include "appt/errors.hpp"
#include "appt/serialize.hpp"

namespace appt {

using nlohmann::ordered_json;

namespace {

void allow_only(const ordered_json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.count(key)) throw ConfigError((where.empty() ? "" : where + ": ") + "unknown key '" + key + "'");
    }
}

template <class T>
void read(const ordered_json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    if (p.empty() || p.is_absolute()) return p;
    return base / p;
}

}  // namespace

void RunConfig::validate() const {
    const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (clustering.k_max < 2) fail("clustering.k_max must be >= 2");
    if (clustering.k < 0 || clustering.k > clustering.k_max) fail("clustering.k must lie in [0, k_max]");
    if (clustering.restarts < 1) fail("clustering.restarts must be >= 1");
    if (!(feature_select.tolerance >= 0.0)) fail("feature_select.tolerance must be >= 0");
    try {
        mdp.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    if (fluid.t_steps < 1) fail("fluid.t_steps must be >= 1");
    if (fluid.t_steps < mdp.horizon) fail("fluid.t_steps must be >= mdp.horizon");
    if (!(fluid.dt > 0.0)) fail("fluid.dt must be > 0");
    if (!(fluid.tie_break >= 0.0)) fail("fluid.tie_break must be >= 0");
    if (!(exact.tolerance > 0.0)) fail("exact.tolerance must be > 0");
    if (exact.max_iterations < 1) fail("exact.max_iterations must be >= 1");
    if (exact.sim_days < 1) fail("exact.sim_days must be >= 1");
    if (simulation.warmup < 0) fail("simulation.warmup must be >= 0");
    if (simulation.days <= simulation.warmup) fail("simulation.days must exceed simulation.warmup");
    if (simulation.replications < 1) fail("simulation.replications must be >= 1");
    for (const auto& name : simulation.compare) {
        if (name != "earliest-slot" && name != "reject-all" && name != "published") {
            fail("simulation.compare: unknown policy '" + name + "'");
        }
    }
}

RunConfig run_config_from_json(const ordered_json& j, const std::filesystem::path& base_dir) {
    allow_only(j, "", {"dataset", "clustering", "feature_select", "mdp", "fluid", "exact", "simulation", "output_dir"});
    RunConfig c;
    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        allow_only(d, "dataset", {"path", "aliases"});
        std::string path;
        read(d, "path", path, "dataset");
        c.dataset_path = resolve(path, base_dir);
        read(d, "aliases", c.aliases, "dataset");
    }
    if (j.contains("clustering")) {
        const auto& s = j["clustering"];
        allow_only(s, "clustering", {"k_max", "k", "restarts", "seed"});
        read(s, "k_max", c.clustering.k_max, "clustering");
        read(s, "k", c.clustering.k, "clustering");
        read(s, "restarts", c.clustering.restarts, "clustering");
        read(s, "seed", c.clustering.seed, "clustering");
    }
    if (j.contains("feature_select")) {
        const auto& s = j["feature_select"];
        allow_only(s, "feature_select", {"tolerance"});
        read(s, "tolerance", c.feature_select.tolerance, "feature_select");
    }
    if (j.contains("mdp")) c.mdp = io::mdp_config_from_json(j["mdp"]);
    if (j.contains("fluid")) {
        const auto& s = j["fluid"];
        allow_only(s, "fluid", {"t_steps", "dt", "tie_break"});
        read(s, "t_steps", c.fluid.t_steps, "fluid");
        read(s, "dt", c.fluid.dt, "fluid");
        read(s, "tie_break", c.fluid.tie_break, "fluid");
    }
    if (j.contains("exact")) {
        const auto& s = j["exact"];
        allow_only(s, "exact", {"tolerance", "max_iterations", "max_states", "sim_days"});
        read(s, "tolerance", c.exact.tolerance, "exact");
        read(s, "max_iterations", c.exact.max_iterations, "exact");
        read(s, "max_states", c.exact.max_states, "exact");
        read(s, "sim_days", c.exact.sim_days, "exact");
    }
    if (j.contains("simulation")) {
        const auto& s = j["simulation"];
        allow_only(s, "simulation",
                   {"days", "replications", "warmup", "seed", "policy", "compare", "trace", "next_day_adjustment"});
        read(s, "days", c.simulation.days, "simulation");
        read(s, "replications", c.simulation.replications, "simulation");
        read(s, "warmup", c.simulation.warmup, "simulation");
        read(s, "seed", c.simulation.seed, "simulation");
        std::string policy;
        read(s, "policy", policy, "simulation");
        c.simulation.policy = resolve(policy, base_dir);
        read(s, "compare", c.simulation.compare, "simulation");
        read(s, "trace", c.simulation.trace, "simulation");
        read(s, "next_day_adjustment", c.simulation.next_day_adjustment, "simulation");
    }
    if (j.contains("output_dir")) {
        std::string out;
        read(j, "output_dir", out, "");
        c.output_dir = resolve(out, base_dir);
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    const auto j = io::read_json_file(path);
    return run_config_from_json(j, path.parent_path());
}

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["dataset"] = {{"path", c.dataset_path.generic_string()}, {"aliases", c.aliases}};
    j["clustering"] = {{"k_max", c.clustering.k_max},
                       {"k", c.clustering.k},
                       {"restarts", c.clustering.restarts},
                       {"seed", c.clustering.seed}};
    j["feature_select"] = {{"tolerance", c.feature_select.tolerance}};
    j["mdp"] = io::to_json(c.mdp);
    j["fluid"] = {{"t_steps", c.fluid.t_steps}, {"dt", c.fluid.dt}, {"tie_break", c.fluid.tie_break}};
    j["exact"] = {{"tolerance", c.exact.tolerance},
                  {"max_iterations", c.exact.max_iterations},
                  {"max_states", c.exact.max_states},
                  {"sim_days", c.exact.sim_days}};
    j["simulation"] = {{"days", c.simulation.days},
                       {"replications", c.simulation.replications},
                       {"warmup", c.simulation.warmup},
                       {"seed", c.simulation.seed},
                       {"policy", c.simulation.policy.generic_string()},
                       {"compare", c.simulation.compare},
                       {"trace", c.simulation.trace},
                       {"next_day_adjustment", c.simulation.next_day_adjustment}};
    j["output_dir"] = c.output_dir.generic_string();
    return j;
}

const std::vector<ConfigKeyDoc>& config_key_docs() {
    static const std::vector<ConfigKeyDoc> docs = {
        {"dataset.path", "path", "patient CSV, relative to the config file"},
        {"dataset.aliases", "map", "header spelling -> schema feature name"},
        {"clustering.k_max", "clusters", "largest k in the elbow scan"},
        {"clustering.k", "clusters", "final k; 0 takes the elbow knee"},
        {"clustering.restarts", "count", "K-means restarts (k-means++ seeding)"},
        {"clustering.seed", "u64", "clustering RNG seed"},
        {"feature_select.tolerance", "criterion units", "minimum trace-criterion gain to keep a feature"},
        {"mdp.classes", "classes", "number of priority classes I"},
        {"mdp.horizon", "days", "booking horizon H"},
        {"mdp.capacity", "patients/day", "daily capacity G"},
        {"mdp.d_max", "patients/day", "per-class arrival cap D_i"},
        {"mdp.arrival_rates", "patients/day", "per-class Poisson means"},
        {"mdp.late_costs", "cost/patient", "I x H cost of booking class i h days ahead"},
        {"mdp.reject_costs", "cost/patient", "per-class cost of an unserved request"},
        {"mdp.discount", "1/day", "discount factor in [0,1)"},
        {"mdp.seed", "u64", "arrival sampling seed for mdp-solve"},
        {"fluid.t_steps", "steps", "fluid LP planning steps T"},
        {"fluid.dt", "days", "length of one fluid step"},
        {"fluid.tie_break", "cost/patient/day", "earliest-slot preference among tied optima (0 = off)"},
        {"exact.tolerance", "cost", "value-iteration stopping tolerance (sup norm)"},
        {"exact.max_iterations", "sweeps", "value-iteration sweep cap"},
        {"exact.max_states", "states", "largest state space value iteration accepts"},
        {"exact.sim_days", "days", "simulated days for the fluid-vs-exact gap"},
        {"simulation.days", "days", "simulated days per replication"},
        {"simulation.replications", "count", "independent replications"},
        {"simulation.warmup", "days", "initial days excluded from metrics"},
        {"simulation.seed", "u64", "master seed; replications use derived sub-seeds"},
        {"simulation.policy", "path", "quota policy (.json or .csv); empty = solve the fluid LP"},
        {"simulation.compare", "names", "extra policies: earliest-slot, reject-all, published"},
        {"simulation.trace", "bool", "write the per-day trace CSV"},
        {"simulation.next_day_adjustment", "bool", "apply the next-day overflow rule"},
        {"output_dir", "path", "directory for all outputs (overridden by --out)"},
    };
    return docs;
}

}  // namespace appt
