#include "appt/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "appt/csv.hpp"
#include "appt/errors.hpp"

namespace appt::io {

namespace {

ordered_json matrix_rows(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> names_of(const std::vector<std::size_t>& idx, const std::vector<std::string>& names) {
    std::vector<std::string> out;
    for (std::size_t i : idx) out.push_back(i < names.size() ? names[i] : std::to_string(i));
    return out;
}

void require_keys(const ordered_json& j, const std::string& where, std::initializer_list<const char*> allowed,
                  std::initializer_list<const char*> required) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
    for (const char* key : required) {
        if (!j.contains(key)) throw ConfigError(where + ": missing key '" + std::string(key) + "'");
    }
}

template <class T>
T get(const ordered_json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

}  // namespace

ordered_json to_json(const clustering::ClusteringResult& r) {
    ordered_json j;
    j["method"] = std::string(clustering::to_string(r.method));
    j["k"] = r.k;
    j["wcss"] = r.wcss;
    j["iterations"] = r.iterations;
    j["best_restart"] = r.best_restart;
    j["labels"] = r.labels;
    j["centroids"] = matrix_rows(r.centroids);
    if (!r.dendrogram.empty()) {
        ordered_json merges = ordered_json::array();
        for (const auto& m : r.dendrogram) {
            merges.push_back({{"left", m.left}, {"right", m.right}, {"cost", m.cost}, {"size", m.size}});
        }
        j["dendrogram"] = std::move(merges);
    }
    j["warnings"] = r.warnings;
    return j;
}

ordered_json to_json(const clustering::ElbowCurve& curve) {
    ordered_json j;
    ordered_json pts = ordered_json::array();
    for (const auto& p : curve.points) pts.push_back({{"k", p.k}, {"wcss", p.wcss}});
    j["points"] = std::move(pts);
    j["knee"] = curve.knee;
    j["monotone"] = curve.monotone;
    j["rerun"] = curve.rerun;
    return j;
}

ordered_json to_json(const features::EntropyRanking& ranking, const std::vector<std::string>& names) {
    ordered_json j;
    j["entropy_all"] = ranking.entropy_all;
    ordered_json per = ordered_json::array();
    for (const auto& f : ranking.per_feature) {
        per.push_back({{"feature", f.feature < names.size() ? names[f.feature] : std::to_string(f.feature)},
                       {"entropy_without", f.entropy_without},
                       {"importance", f.importance},
                       {"degenerate", f.degenerate}});
    }
    j["per_feature"] = std::move(per);
    j["order"] = names_of(ranking.order, names);
    return j;
}

ordered_json to_json(const features::SubsetSelection& s, const std::vector<std::string>& names) {
    ordered_json j;
    j["selected"] = names_of(s.selected, names);
    j["selected_columns"] = s.selected;
    j["trace_curve"] = s.trace_curve;
    j["stopped_at"] = s.stopped_at;
    return j;
}

ordered_json to_json(const mdp::MdpConfig& c) {
    ordered_json j;
    j["classes"] = c.classes;
    j["horizon"] = c.horizon;
    j["capacity"] = c.capacity;
    j["d_max"] = c.d_max;
    j["arrival_rates"] = c.arrival_rates;
    j["late_costs"] = c.costs.late;
    j["reject_costs"] = c.costs.reject;
    j["discount"] = c.discount;
    j["seed"] = c.seed;
    return j;
}

mdp::MdpConfig mdp_config_from_json(const ordered_json& j) {
    const std::string where = "mdp";
    require_keys(j, where,
                 {"classes", "horizon", "capacity", "d_max", "arrival_rates", "late_costs", "reject_costs", "discount",
                  "seed"},
                 {"classes", "horizon", "capacity", "d_max", "arrival_rates", "late_costs", "reject_costs"});
    mdp::MdpConfig c;
    c.classes = get<int>(j, "classes", where);
    c.horizon = get<int>(j, "horizon", where);
    c.capacity = get<int>(j, "capacity", where);
    c.d_max = get<std::vector<int>>(j, "d_max", where);
    c.arrival_rates = get<std::vector<double>>(j, "arrival_rates", where);
    c.costs.late = get<std::vector<std::vector<double>>>(j, "late_costs", where);
    c.costs.reject = get<std::vector<double>>(j, "reject_costs", where);
    if (j.contains("discount")) c.discount = get<double>(j, "discount", where);
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", where);
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

ordered_json to_json(const fluid::BenchmarkPolicy& p) {
    ordered_json j;
    j["quotas"] = p.quotas;
    j["provenance"] = std::string(fluid::to_string(p.provenance));
    j["next_day_adjustment"] = p.next_day_adjustment;
    return j;
}

fluid::BenchmarkPolicy policy_from_json(const ordered_json& j) {
    const std::string where = "policy";
    require_keys(j, where, {"quotas", "provenance", "next_day_adjustment"}, {"quotas"});
    fluid::BenchmarkPolicy p;
    p.quotas = get<std::vector<std::vector<int>>>(j, "quotas", where);
    if (j.contains("provenance")) {
        const auto s = get<std::string>(j, "provenance", where);
        if (s == "fluid") {
            p.provenance = fluid::Provenance::fluid;
        } else if (s == "manual") {
            p.provenance = fluid::Provenance::manual;
        } else {
            throw ConfigError(where + ".provenance: expected 'fluid' or 'manual'");
        }
    }
    if (j.contains("next_day_adjustment")) p.next_day_adjustment = get<bool>(j, "next_day_adjustment", where);
    for (const auto& row : p.quotas) {
        if (row.size() != p.quotas.front().size()) throw ConfigError(where + ": ragged quota table");
        for (int q : row) {
            if (q < 0) throw ConfigError(where + ": quotas must be >= 0");
        }
    }
    return p;
}

ordered_json to_json(const fluid::FluidSolution& s) {
    ordered_json j;
    j["status"] = std::string(lp::to_string(s.status));
    j["objective"] = s.objective;
    j["iterations"] = s.iterations;
    j["t_steps"] = s.t_steps;
    ordered_json u = ordered_json::array();
    for (int t = 0; t < s.t_steps && !s.bookings.empty(); ++t) {
        ordered_json step = ordered_json::array();
        for (int i = 0; i < s.classes; ++i) {
            ordered_json row = ordered_json::array();
            for (int h = 0; h < s.horizon; ++h) row.push_back(s.u(t, i, h));
            step.push_back(std::move(row));
        }
        u.push_back(std::move(step));
    }
    j["bookings"] = std::move(u);
    return j;
}

ordered_json to_json(const sim::SimulationReport& r) {
    ordered_json j;
    j["policy"] = r.policy;
    j["days"] = r.days;
    j["warmup"] = r.warmup;
    j["seed"] = r.seed;
    ordered_json classes = ordered_json::array();
    for (std::size_t i = 0; i < r.per_class.size(); ++i) {
        const auto& c = r.per_class[i];
        classes.push_back({{"class", i + 1},
                           {"arrivals", c.arrivals},
                           {"booked", c.booked},
                           {"rejected", c.rejected},
                           {"mean_wait_days", c.mean_wait},
                           {"p50_wait_days", c.p50_wait},
                           {"p90_wait_days", c.p90_wait},
                           {"cost", c.cost},
                           {"booked_by_offset", c.booked_by_offset}});
    }
    j["per_class"] = std::move(classes);
    j["utilization"] = r.utilization;
    j["total_cost"] = r.total_cost;
    j["mean_daily_cost"] = r.mean_daily_cost;
    j["max_day_load"] = r.max_day_load;
    j["oversubscribed_days"] = r.oversubscribed_days;
    ordered_json reps = ordered_json::array();
    for (const auto& p : r.per_replication) {
        reps.push_back({{"seed", p.seed},
                        {"arrivals", p.arrivals},
                        {"booked", p.booked},
                        {"rejected", p.rejected},
                        {"cost", p.cost},
                        {"utilization", p.utilization}});
    }
    j["per_replication"] = std::move(reps);
    return j;
}

ordered_json to_json(const sim::Comparison& c) {
    ordered_json j;
    j["baseline"] = c.baseline;
    ordered_json diffs = ordered_json::array();
    for (const auto& d : c.differences) {
        diffs.push_back({{"policy", d.policy},
                         {"mean_difference", d.mean},
                         {"std_error", d.std_error},
                         {"ci95_low", d.ci_low},
                         {"ci95_high", d.ci_high}});
    }
    j["paired_differences"] = std::move(diffs);
    ordered_json reports = ordered_json::array();
    for (const auto& r : c.reports) reports.push_back(to_json(r));
    j["reports"] = std::move(reports);
    return j;
}

void write_policy_csv(std::ostream& out, const fluid::BenchmarkPolicy& p) {
    const std::size_t H = p.quotas.empty() ? 0 : p.quotas.front().size();
    out << "class";
    for (std::size_t h = 0; h < H; ++h) out << ",d" << h + 1;
    out << '\n';
    for (std::size_t i = 0; i < p.quotas.size(); ++i) {
        out << i + 1;
        for (int q : p.quotas[i]) out << ',' << q;
        out << '\n';
    }
}

fluid::BenchmarkPolicy read_policy_csv(std::istream& in) {
    fluid::BenchmarkPolicy p;
    std::string line;
    if (!csv::read_line(in, line)) throw ConfigError("policy csv: empty file");
    const auto header = csv::split_record(line);
    if (header.size() < 2 || header.front() != "class") throw ConfigError("policy csv: header must be class,d1,...");
    int row = 1;
    while (csv::read_line(in, line)) {
        ++row;
        const auto cells = csv::split_record(line);
        if (cells.size() != header.size()) {
            throw ConfigError("policy csv line " + std::to_string(row) + ": expected " +
                              std::to_string(header.size()) + " cells");
        }
        std::vector<int> quotas;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            std::size_t used = 0;
            int q = -1;
            try {
                q = std::stoi(cells[c], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cells[c].size() || q < 0) {
                throw ConfigError("policy csv line " + std::to_string(row) + ": bad quota '" + cells[c] + "'");
            }
            quotas.push_back(q);
        }
        p.quotas.push_back(std::move(quotas));
    }
    if (p.quotas.empty()) throw ConfigError("policy csv: no rows");
    return p;
}

fluid::BenchmarkPolicy read_policy_file(const std::filesystem::path& path) {
    if (path.extension() == ".csv") {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open policy file: " + path.string());
        return read_policy_csv(in);
    }
    return policy_from_json(read_json_file(path));
}

void write_elbow_csv(std::ostream& out, const clustering::ElbowCurve& curve) {
    out << "k,wcss\n";
    for (const auto& p : curve.points) out << p.k << ',' << ordered_json(p.wcss).dump() << '\n';
}

void write_trace_csv(std::ostream& out, const sim::SimulationReport& r) {
    const std::size_t H = r.per_class.empty() ? 0 : r.per_class.front().booked_by_offset.size();
    out << "replication,day,class,arrivals";
    for (std::size_t h = 0; h < H; ++h) out << ",booked_d" << h + 1;
    out << ",rejected\n";
    for (const auto& t : r.trace) {
        out << t.replication << ',' << t.day << ',' << t.cls + 1 << ',' << t.arrivals;
        for (int b : t.booked_by_offset) out << ',' << b;
        out << ',' << t.rejected << '\n';
    }
}

void write_value_csv(std::ostream& out, const mdp::MdpConfig& config, const mdp::ValueIterationResult& result) {
    const mdp::StateSpace space(config);
    for (int i = 0; i < config.classes; ++i) out << 'x' << i + 1 << ',';
    for (int h = 0; h < config.horizon; ++h) out << 'y' << h + 1 << ',';
    out << "value";
    for (int i = 0; i < config.classes; ++i) {
        for (int h = 0; h < config.horizon; ++h) out << ",a" << i + 1 << '_' << h + 1;
    }
    out << '\n';
    for (std::size_t s = 0; s < space.size(); ++s) {
        const auto st = space.state_at(s);
        for (int x : st.waiting) out << x << ',';
        for (int y : st.available) out << y << ',';
        out << ordered_json(result.values[s]).dump();
        const auto& a = result.policy[s];
        for (int i = 0; i < config.classes; ++i) {
            for (int h = 0; h < config.horizon; ++h) out << ',' << a(i, h);
        }
        out << '\n';
    }
}

void write_json_file(const std::filesystem::path& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

ordered_json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace appt::io
