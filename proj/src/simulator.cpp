#include "appt/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include "appt/parallel.hpp"
#include "appt/rng.hpp"

namespace appt::sim {

QuotaPolicy::QuotaPolicy(fluid::BenchmarkPolicy policy, std::string name)
    : policy_(std::move(policy)), name_(std::move(name)) {
    for (const auto& row : policy_.quotas) {
        for (int q : row) {
            if (q < 0) throw std::invalid_argument("quota policy: quotas must be >= 0");
        }
    }
}

mdp::ActionMatrix QuotaPolicy::decide(const mdp::MdpState& state, const mdp::MdpConfig& config) const {
    const int I = config.classes;
    const int H = config.horizon;
    if (policy_.quotas.size() != static_cast<std::size_t>(I)) {
        throw std::invalid_argument("quota policy: expected " + std::to_string(I) + " class rows");
    }
    for (const auto& row : policy_.quotas) {
        if (row.size() != static_cast<std::size_t>(H)) {
            throw std::invalid_argument("quota policy: expected " + std::to_string(H) + " day columns");
        }
    }
    const auto order = config.priority_order();
    mdp::ActionMatrix a(I, H);
    std::vector<int> left = state.waiting;
    for (int h = 0; h < H; ++h) {
        int room = state.available[static_cast<std::size_t>(h)];
        for (int i : order) {
            const int n = std::min({policy_.quotas[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)],
                                    left[static_cast<std::size_t>(i)], room});
            a(i, h) = n;
            left[static_cast<std::size_t>(i)] -= n;
            room -= n;
        }
    }
    if (policy_.next_day_adjustment && !order.empty()) {
        const int top = order.front();
        const int room = state.available[0] - a.day_total(0);
        const int extra = std::min(room, left[static_cast<std::size_t>(top)]);
        if (extra > 0) a(top, 0) += extra;
    }
    return a;
}

mdp::ActionMatrix EarliestSlotPolicy::decide(const mdp::MdpState& state, const mdp::MdpConfig& config) const {
    mdp::ActionMatrix a(config.classes, config.horizon);
    std::vector<int> room = state.available;
    for (int i : config.priority_order()) {
        int left = state.waiting[static_cast<std::size_t>(i)];
        for (int h = 0; h < config.horizon && left > 0; ++h) {
            const int n = std::min(left, room[static_cast<std::size_t>(h)]);
            a(i, h) = n;
            left -= n;
            room[static_cast<std::size_t>(h)] -= n;
        }
    }
    return a;
}

mdp::ActionMatrix RejectAllPolicy::decide(const mdp::MdpState&, const mdp::MdpConfig& config) const {
    return mdp::ActionMatrix(config.classes, config.horizon);
}

void SimConfig::validate() const {
    mdp.validate();
    if (warmup < 0) throw std::invalid_argument("simulation: warmup must be >= 0");
    if (days <= warmup) throw std::invalid_argument("simulation: days must exceed warmup");
    if (replications < 1) throw std::invalid_argument("simulation: replications must be >= 1");
}

namespace {

struct Replication {
    ReplicationReport summary;
    std::vector<std::vector<long long>> booked_by_offset;  // I x H
    std::vector<double> class_cost;
    long long used = 0;
    long long offered = 0;
    int max_day_load = 0;
    long long oversubscribed = 0;
    std::vector<TraceRow> trace;
};

Replication run_one(const SimConfig& config, const SchedulingPolicy& policy, int index) {
    const auto& m = config.mdp;
    const int I = m.classes;
    const int H = m.horizon;
    const auto uI = static_cast<std::size_t>(I);
    Replication r;
    r.summary.seed = derive_seed(config.seed, static_cast<std::uint64_t>(index));
    r.summary.arrivals.assign(uI, 0);
    r.summary.booked.assign(uI, 0);
    r.summary.rejected.assign(uI, 0);
    r.class_cost.assign(uI, 0.0);
    r.booked_by_offset.assign(uI, std::vector<long long>(static_cast<std::size_t>(H), 0));

    std::mt19937_64 rng(r.summary.seed);
    mdp::MdpState state = mdp::initial_state(m);
    // Appointments per absolute service day, kept independently of y.
    std::map<long long, int> ledger;

    for (int day = 0; day < config.days; ++day) {
        state.waiting = mdp::sample_arrivals(m, rng);
        const mdp::ActionMatrix a = policy.decide(state, m);
        if (a.classes() != I || a.horizon() != H || !mdp::is_feasible(state, a)) {
            throw std::logic_error("policy '" + policy.name() + "' returned an infeasible action on day " +
                                   std::to_string(day));
        }
        for (int h = 0; h < H; ++h) {
            if (a.day_total(h) > 0) {
                int& load = ledger[static_cast<long long>(day) + h + 1];
                load += a.day_total(h);
                r.max_day_load = std::max(r.max_day_load, load);
            }
        }
        const bool counted = day >= config.warmup;
        if (counted) {
            for (int i = 0; i < I; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                const int x = state.waiting[ui];
                const int booked = a.class_total(i);
                r.summary.arrivals[ui] += x;
                r.summary.booked[ui] += booked;
                r.summary.rejected[ui] += x - booked;
                double c = m.costs.reject[ui] * (x - booked);
                for (int h = 0; h < H; ++h) {
                    r.booked_by_offset[ui][static_cast<std::size_t>(h)] += a(i, h);
                    c += m.costs.late[ui][static_cast<std::size_t>(h)] * a(i, h);
                }
                r.class_cost[ui] += c;
                r.summary.cost += c;
            }
        }
        if (config.trace) {
            for (int i = 0; i < I; ++i) {
                TraceRow row;
                row.replication = index;
                row.day = day;
                row.cls = i;
                row.arrivals = state.waiting[static_cast<std::size_t>(i)];
                for (int h = 0; h < H; ++h) row.booked_by_offset.push_back(a(i, h));
                row.rejected = row.arrivals - a.class_total(i);
                r.trace.push_back(std::move(row));
            }
        }
        // Service day day+1 leaves the window when the calendar rolls.
        const int served = m.capacity - (state.available[0] - a.day_total(0));
        const auto it = ledger.find(static_cast<long long>(day) + 1);
        const int ledger_load = it == ledger.end() ? 0 : it->second;
        if (ledger_load > m.capacity) ++r.oversubscribed;
        if (ledger_load != served) {
            throw std::logic_error("simulation: calendar and ledger disagree on day " + std::to_string(day + 1));
        }
        if (it != ledger.end()) ledger.erase(it);
        if (counted) {
            r.used += served;
            r.offered += m.capacity;
        }
        state = mdp::transition(state, a, state.waiting, m);
    }
    r.summary.utilization = r.offered > 0 ? static_cast<double>(r.used) / static_cast<double>(r.offered) : 0.0;
    return r;
}

int percentile(const std::vector<long long>& counts, double q) {
    long long total = 0;
    for (long long c : counts) total += c;
    if (total == 0) return 0;
    const auto rank = static_cast<long long>(std::ceil(q * static_cast<double>(total)));
    long long seen = 0;
    for (std::size_t h = 0; h < counts.size(); ++h) {
        seen += counts[h];
        if (seen >= std::max(rank, 1LL)) return static_cast<int>(h) + 1;
    }
    return static_cast<int>(counts.size());
}

}  // namespace

SimulationReport run_simulation(const SimConfig& config, const SchedulingPolicy& policy) {
    config.validate();
    if (const auto* q = dynamic_cast<const QuotaPolicy*>(&policy)) {
        const auto& quotas = q->policy().quotas;
        bool ok = quotas.size() == static_cast<std::size_t>(config.mdp.classes);
        for (const auto& row : quotas) ok = ok && row.size() == static_cast<std::size_t>(config.mdp.horizon);
        if (!ok) throw std::invalid_argument("simulation: policy dimensions do not match the MDP (I x H)");
    }
    const auto reps = static_cast<std::size_t>(config.replications);
    std::vector<Replication> results(reps);
    parallel_for(reps, [&](std::size_t k) { results[k] = run_one(config, policy, static_cast<int>(k)); });

    const int I = config.mdp.classes;
    const int H = config.mdp.horizon;
    SimulationReport report;
    report.policy = policy.name();
    report.days = config.days;
    report.warmup = config.warmup;
    report.seed = config.seed;
    report.per_class.resize(static_cast<std::size_t>(I));
    for (auto& c : report.per_class) c.booked_by_offset.assign(static_cast<std::size_t>(H), 0);
    long long used = 0;
    long long offered = 0;
    for (auto& r : results) {
        for (int i = 0; i < I; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            auto& c = report.per_class[ui];
            c.arrivals += r.summary.arrivals[ui];
            c.booked += r.summary.booked[ui];
            c.rejected += r.summary.rejected[ui];
            c.cost += r.class_cost[ui];
            for (int h = 0; h < H; ++h) c.booked_by_offset[static_cast<std::size_t>(h)] += r.booked_by_offset[ui][static_cast<std::size_t>(h)];
        }
        report.total_cost += r.summary.cost;
        used += r.used;
        offered += r.offered;
        report.max_day_load = std::max(report.max_day_load, r.max_day_load);
        report.oversubscribed_days += r.oversubscribed;
        report.per_replication.push_back(r.summary);
        for (auto& row : r.trace) report.trace.push_back(std::move(row));
    }
    const double n = static_cast<double>(config.replications);
    for (auto& c : report.per_class) {
        c.cost /= n;
        double weighted = 0.0;
        for (int h = 0; h < H; ++h) weighted += static_cast<double>(h + 1) * static_cast<double>(c.booked_by_offset[static_cast<std::size_t>(h)]);
        c.mean_wait = c.booked > 0 ? weighted / static_cast<double>(c.booked) : 0.0;
        c.p50_wait = percentile(c.booked_by_offset, 0.5);
        c.p90_wait = percentile(c.booked_by_offset, 0.9);
    }
    report.total_cost /= n;
    report.mean_daily_cost = report.total_cost / static_cast<double>(config.days - config.warmup);
    report.utilization = offered > 0 ? static_cast<double>(used) / static_cast<double>(offered) : 0.0;
    return report;
}

Comparison compare_policies(const SimConfig& config, const std::vector<const SchedulingPolicy*>& policies) {
    if (policies.size() < 2) throw std::invalid_argument("compare_policies: need at least two policies");
    for (const auto* p : policies) {
        if (p == nullptr) throw std::invalid_argument("compare_policies: null policy");
    }
    Comparison out;
    out.baseline = policies.front()->name();
    for (const auto* p : policies) out.reports.push_back(run_simulation(config, *p));
    const auto& base = out.reports.front().per_replication;
    const double n = static_cast<double>(base.size());
    for (std::size_t k = 1; k < out.reports.size(); ++k) {
        const auto& other = out.reports[k].per_replication;
        std::vector<double> d(base.size());
        for (std::size_t r = 0; r < base.size(); ++r) d[r] = other[r].cost - base[r].cost;
        PairedDifference pd;
        pd.policy = out.reports[k].policy;
        for (double v : d) pd.mean += v;
        pd.mean /= n;
        if (d.size() > 1) {
            double ss = 0.0;
            for (double v : d) ss += (v - pd.mean) * (v - pd.mean);
            pd.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
        }
        pd.ci_low = pd.mean - 1.96 * pd.std_error;
        pd.ci_high = pd.mean + 1.96 * pd.std_error;
        out.differences.push_back(pd);
    }
    return out;
}

}  // namespace appt::sim
