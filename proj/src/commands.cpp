#include "appt/commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "appt/clustering.hpp"
#include "appt/data_ingest.hpp"
#include "appt/errors.hpp"
#include "appt/feature_select.hpp"
#include "appt/serialize.hpp"
#include "appt/simulator.hpp"

namespace appt {

using nlohmann::ordered_json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void prepare(const std::filesystem::path& out) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
}

void write_metadata(const std::filesystem::path& out, const std::string& command, const RunConfig& config) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream stamp;
    stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    ordered_json j;
    j["command"] = command;
    j["timestamp"] = stamp.str();
    j["config"] = to_json(config);
    io::write_json_file(out / "run_metadata.json", j);
}

struct Prepared {
    ingest::FeatureMatrix matrix;
    std::vector<std::string> warnings;
};

Prepared load_matrix(const RunConfig& config) {
    if (config.dataset_path.empty()) throw ConfigError("dataset.path is not set");
    auto schema = ingest::FeatureSchema::patient_features();
    for (const auto& [from, to] : config.aliases) schema.aliases[from] = to;
    auto loaded = ingest::load_dataset(config.dataset_path, schema);
    if (loaded.records.empty()) throw ConfigError("dataset has no rows: " + config.dataset_path.string());
    Prepared p;
    p.matrix = ingest::encode_normalize(loaded.records, schema);
    p.warnings = std::move(loaded.warnings);
    return p;
}

std::string percent(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100.0 * v << '%';
    return s.str();
}

std::unique_ptr<sim::SchedulingPolicy> named_policy(const std::string& name) {
    if (name == "earliest-slot") return std::make_unique<sim::EarliestSlotPolicy>();
    if (name == "reject-all") return std::make_unique<sim::RejectAllPolicy>();
    if (name == "published") return std::make_unique<sim::QuotaPolicy>(fluid::published_policy(), "published");
    throw ConfigError("unknown policy '" + name + "'");
}

}  // namespace

fluid::BenchmarkPolicy fluid_policy(const RunConfig& config) {
    auto problem = fluid::FluidProblem::from_config(config.mdp, config.fluid.t_steps, config.fluid.dt);
    problem.tie_break = config.fluid.tie_break;
    const auto solution = fluid::solve_fluid(problem);
    return fluid::extract_policy(solution, problem);
}

GapReport exact_gap(const mdp::MdpConfig& config, const fluid::BenchmarkPolicy& policy, const ExactSection& exact,
                    std::uint64_t seed) {
    mdp::ValueIterationOptions opt;
    opt.tolerance = exact.tolerance;
    opt.max_iterations = exact.max_iterations;
    opt.max_states = exact.max_states;
    const auto vi = mdp::value_iteration(config, opt);
    const mdp::StateSpace space(config);
    GapReport g;
    g.iterations = vi.iterations;
    g.bellman_residual = vi.bellman_residual;
    g.states = space.size();
    g.exact_average =
        mdp::average_cost(config, [&](const mdp::MdpState& s) { return vi.policy[space.index_of(s)]; });

    sim::SimConfig sc;
    sc.mdp = config;
    sc.days = exact.sim_days;
    sc.replications = 1;
    sc.warmup = 0;
    sc.seed = seed;
    const auto report = sim::run_simulation(sc, sim::QuotaPolicy(policy, "fluid"));
    g.policy_average = report.mean_daily_cost;
    g.gap = g.exact_average > 0.0 ? (g.policy_average - g.exact_average) / g.exact_average : 0.0;
    return g;
}

std::string cmd_cluster(const RunConfig& config, const std::filesystem::path& out) {
    prepare(out);
    const auto prepared = load_matrix(config);
    const auto& m = prepared.matrix;
    {
        auto f = open_out(out / "normalized_matrix.csv");
        ingest::write_matrix_csv(f, m);
    }
    const auto& seed = config.clustering.seed;
    const int k_max = std::min<int>(config.clustering.k_max, static_cast<int>(m.rows()));
    const auto elbow = clustering::elbow_scan(m.data(), k_max, seed, config.clustering.restarts);
    io::write_json_file(out / "elbow.json", io::to_json(elbow));
    {
        auto f = open_out(out / "elbow.csv");
        io::write_elbow_csv(f, elbow);
    }
    const int k = config.clustering.k > 0 ? config.clustering.k : std::max(2, elbow.knee);

    const auto ranking = features::entropy_rank(m.data());
    io::write_json_file(out / "entropy_ranking.json", io::to_json(ranking, m.names()));
    features::WrapperOptions wopt;
    wopt.tolerance = config.feature_select.tolerance;
    wopt.restarts = config.clustering.restarts;
    const auto selection = features::wrapper_select(m.data(), ranking, k, seed, wopt);
    io::write_json_file(out / "feature_selection.json", io::to_json(selection, m.names()));

    const auto subset = m.select_columns(selection.selected);
    clustering::KMeansOptions kopt;
    kopt.restarts = config.clustering.restarts;
    const auto km = clustering::kmeans(subset.data(), k, seed, kopt);
    const auto ward = clustering::ward_agglomerative(subset.data(), k);
    const auto s_km = clustering::silhouette(subset.data(), km.labels);
    const auto s_ward = clustering::silhouette(subset.data(), ward.labels);
    io::write_json_file(out / "kmeans.json", io::to_json(km));
    io::write_json_file(out / "ward.json", io::to_json(ward));
    {
        auto f = open_out(out / "labels.csv");
        f << "id,kmeans,ward,silhouette_kmeans,silhouette_ward\n";
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const auto u = static_cast<std::size_t>(r);
            f << m.ids()[u] << ',' << km.labels[u] << ',' << ward.labels[u] << ','
              << ordered_json(s_km.per_point[u]).dump() << ',' << ordered_json(s_ward.per_point[u]).dump() << '\n';
        }
    }
    const std::string winner = s_km.mean >= s_ward.mean ? "kmeans" : "ward";
    ordered_json summary;
    summary["rows"] = m.rows();
    summary["knee"] = elbow.knee;
    summary["k"] = k;
    summary["selected_features"] = subset.names();
    summary["silhouette"] = {{"kmeans", s_km.mean}, {"ward", s_ward.mean}};
    summary["winner"] = winner;
    std::vector<std::string> warnings = prepared.warnings;
    for (const auto& w : km.warnings) warnings.push_back(w);
    for (const auto& w : ward.warnings) warnings.push_back(w);
    summary["warnings"] = warnings;
    io::write_json_file(out / "cluster_summary.json", summary);
    write_metadata(out, "cluster", config);

    std::ostringstream msg;
    msg << "knee K=" << elbow.knee << ", k=" << k << ", " << subset.cols() << " features selected\n"
        << "silhouette kmeans=" << s_km.mean << " ward=" << s_ward.mean << "\nwinner: " << winner;
    return msg.str();
}

std::string cmd_select_features(const RunConfig& config, const std::filesystem::path& out) {
    prepare(out);
    const auto prepared = load_matrix(config);
    const auto& m = prepared.matrix;
    int k = config.clustering.k;
    if (k == 0) {
        const int k_max = std::min<int>(config.clustering.k_max, static_cast<int>(m.rows()));
        k = std::max(2, clustering::elbow_scan(m.data(), k_max, config.clustering.seed, config.clustering.restarts).knee);
    }
    const auto ranking = features::entropy_rank(m.data());
    features::WrapperOptions wopt;
    wopt.tolerance = config.feature_select.tolerance;
    wopt.restarts = config.clustering.restarts;
    const auto selection = features::wrapper_select(m.data(), ranking, k, config.clustering.seed, wopt);
    io::write_json_file(out / "entropy_ranking.json", io::to_json(ranking, m.names()));
    io::write_json_file(out / "feature_selection.json", io::to_json(selection, m.names()));
    write_metadata(out, "select-features", config);

    std::ostringstream msg;
    msg << "k=" << k << ", selected:";
    for (std::size_t c : selection.selected) msg << ' ' << m.names()[c];
    return msg.str();
}

std::string cmd_schedule(const RunConfig& config, const std::filesystem::path& out, bool exact) {
    auto problem = fluid::FluidProblem::from_config(config.mdp, config.fluid.t_steps, config.fluid.dt);
    problem.tie_break = config.fluid.tie_break;
    problem.validate();
    prepare(out);
    const auto lp_model = fluid::build_fluid_lp(problem);
    {
        auto f = open_out(out / "fluid.lp");
        lp::write_lp_format(f, lp_model.program);
    }
    const auto solution = fluid::solve_fluid(problem);
    io::write_json_file(out / "fluid_solution.json", io::to_json(solution));
    if (solution.status != lp::Status::optimal) {
        throw std::runtime_error("fluid LP status: " + std::string(lp::to_string(solution.status)));
    }
    auto policy = fluid::extract_policy(solution, problem);
    policy.next_day_adjustment = config.simulation.next_day_adjustment;
    io::write_json_file(out / "policy.json", io::to_json(policy));
    {
        auto f = open_out(out / "policy.csv");
        io::write_policy_csv(f, policy);
    }
    std::ostringstream msg;
    msg << "fluid objective " << solution.objective << " over " << problem.t_steps << " steps\n";
    io::write_policy_csv(msg, policy);
    if (exact) {
        const auto g = exact_gap(config.mdp, policy, config.exact, config.simulation.seed);
        ordered_json j;
        j["states"] = g.states;
        j["value_iterations"] = g.iterations;
        j["bellman_residual"] = g.bellman_residual;
        j["exact_average_cost"] = g.exact_average;
        j["policy_average_cost"] = g.policy_average;
        j["gap"] = g.gap;
        j["sim_days"] = config.exact.sim_days;
        io::write_json_file(out / "exact_gap.json", j);
        msg << "exact average cost " << g.exact_average << ", fluid policy " << g.policy_average << ", gap "
            << percent(g.gap) << '\n';
    }
    write_metadata(out, "schedule", config);
    auto s = msg.str();
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

std::string cmd_simulate(const RunConfig& config, const std::filesystem::path& out) {
    sim::SimConfig sc;
    sc.mdp = config.mdp;
    sc.days = config.simulation.days;
    sc.replications = config.simulation.replications;
    sc.warmup = config.simulation.warmup;
    sc.seed = config.simulation.seed;
    sc.trace = config.simulation.trace;
    sc.validate();

    fluid::BenchmarkPolicy policy =
        config.simulation.policy.empty() ? fluid_policy(config) : io::read_policy_file(config.simulation.policy);
    policy.next_day_adjustment = policy.next_day_adjustment && config.simulation.next_day_adjustment;
    const bool shape_ok = policy.quotas.size() == static_cast<std::size_t>(sc.mdp.classes) &&
                          policy.quotas.front().size() == static_cast<std::size_t>(sc.mdp.horizon);
    if (!shape_ok) {
        throw std::invalid_argument("policy is " + std::to_string(policy.quotas.size()) + " x " +
                                    std::to_string(policy.quotas.empty() ? 0 : policy.quotas.front().size()) +
                                    ", the MDP needs " + std::to_string(sc.mdp.classes) + " x " +
                                    std::to_string(sc.mdp.horizon));
    }
    prepare(out);
    const sim::QuotaPolicy benchmark(policy, "benchmark");
    const auto report = sim::run_simulation(sc, benchmark);
    io::write_json_file(out / "simulation_report.json", io::to_json(report));
    if (sc.trace) {
        auto f = open_out(out / "trace.csv");
        io::write_trace_csv(f, report);
    }
    std::ostringstream msg;
    msg << "mean cost per replication " << report.total_cost << ", utilization " << percent(report.utilization);
    for (std::size_t i = 0; i < report.per_class.size(); ++i) {
        const auto& c = report.per_class[i];
        msg << "\nclass " << i + 1 << ": booked " << c.booked << ", rejected " << c.rejected << ", mean wait "
            << c.mean_wait << " days";
    }
    if (!config.simulation.compare.empty()) {
        std::vector<std::unique_ptr<sim::SchedulingPolicy>> owned;
        std::vector<const sim::SchedulingPolicy*> list{&benchmark};
        for (const auto& name : config.simulation.compare) {
            owned.push_back(named_policy(name));
            list.push_back(owned.back().get());
        }
        auto noisy = sc;
        noisy.trace = false;
        const auto comparison = sim::compare_policies(noisy, list);
        io::write_json_file(out / "comparison.json", io::to_json(comparison));
        for (const auto& d : comparison.differences) {
            msg << "\n" << d.policy << " - benchmark: " << d.mean << " (95% CI " << d.ci_low << ", " << d.ci_high
                << ")";
        }
    }
    write_metadata(out, "simulate", config);
    return msg.str();
}

std::string cmd_mdp_solve(const RunConfig& config, const std::filesystem::path& out) {
    mdp::ValueIterationOptions opt;
    opt.tolerance = config.exact.tolerance;
    opt.max_iterations = config.exact.max_iterations;
    opt.max_states = config.exact.max_states;
    const auto vi = mdp::value_iteration(config.mdp, opt);
    prepare(out);
    {
        auto f = open_out(out / "value_function.csv");
        io::write_value_csv(f, config.mdp, vi);
    }
    const mdp::StateSpace space(config.mdp);
    const double avg =
        mdp::average_cost(config.mdp, [&](const mdp::MdpState& s) { return vi.policy[space.index_of(s)]; });
    ordered_json j;
    j["states"] = space.size();
    j["iterations"] = vi.iterations;
    j["bellman_residual"] = vi.bellman_residual;
    j["residuals"] = vi.residuals;
    j["value_at_empty_calendar"] = vi.values[space.index_of(mdp::initial_state(config.mdp))];
    j["average_cost"] = avg;
    io::write_json_file(out / "mdp_solution.json", j);
    write_metadata(out, "mdp-solve", config);
    std::ostringstream msg;
    msg << space.size() << " states, " << vi.iterations << " sweeps, average cost of the greedy policy " << avg;
    return msg.str();
}

}  // namespace appt
