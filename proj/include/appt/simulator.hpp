#pragma once

// Monte-Carlo rolling-horizon evaluation of booking policies.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "appt/fluid.hpp"
#include "appt/mdp.hpp"

namespace appt::sim {

class SchedulingPolicy {
public:
    virtual ~SchedulingPolicy() = default;
    virtual std::string name() const = 0;
    // Must return an action feasible for `state`.
    virtual mdp::ActionMatrix decide(const mdp::MdpState& state, const mdp::MdpConfig& config) const = 0;
};

// Books quota(i,h) where arrivals and day capacity allow, classes in priority
// order for each day so a short day 1 cuts low-priority bookings first. With
// next-day adjustment on, leftover day-1 capacity then takes more requests of
// the highest-priority class.
class QuotaPolicy final : public SchedulingPolicy {
public:
    explicit QuotaPolicy(fluid::BenchmarkPolicy policy, std::string name = "quota");
    std::string name() const override { return name_; }
    mdp::ActionMatrix decide(const mdp::MdpState& state, const mdp::MdpConfig& config) const override;
    const fluid::BenchmarkPolicy& policy() const { return policy_; }

private:
    fluid::BenchmarkPolicy policy_;
    std::string name_;
};

// First come, first served: every request takes the earliest open day,
// high-priority classes first.
class EarliestSlotPolicy final : public SchedulingPolicy {
public:
    std::string name() const override { return "earliest-slot"; }
    mdp::ActionMatrix decide(const mdp::MdpState& state, const mdp::MdpConfig& config) const override;
};

class RejectAllPolicy final : public SchedulingPolicy {
public:
    std::string name() const override { return "reject-all"; }
    mdp::ActionMatrix decide(const mdp::MdpState& state, const mdp::MdpConfig& config) const override;
};

class FunctionPolicy final : public SchedulingPolicy {
public:
    FunctionPolicy(std::string name, mdp::PolicyFn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
    std::string name() const override { return name_; }
    mdp::ActionMatrix decide(const mdp::MdpState& state, const mdp::MdpConfig&) const override { return fn_(state); }

private:
    std::string name_;
    mdp::PolicyFn fn_;
};

struct SimConfig {
    mdp::MdpConfig mdp;
    int days = 365;
    int replications = 10;
    std::uint64_t seed = 1;
    int warmup = 14;
    bool trace = false;

    // Throws std::invalid_argument.
    void validate() const;
};

struct ClassReport {
    long long arrivals = 0;
    long long booked = 0;
    long long rejected = 0;
    double mean_wait = 0.0;  // days, over booked requests
    int p50_wait = 0;
    int p90_wait = 0;
    double cost = 0.0;  // mean per replication
    std::vector<long long> booked_by_offset;
};

struct ReplicationReport {
    std::uint64_t seed = 0;
    std::vector<long long> arrivals;
    std::vector<long long> booked;
    std::vector<long long> rejected;
    double cost = 0.0;
    double utilization = 0.0;
};

struct TraceRow {
    int replication = 0;
    int day = 0;
    int cls = 0;
    int arrivals = 0;
    std::vector<int> booked_by_offset;
    int rejected = 0;
};

struct SimulationReport {
    std::string policy;
    int days = 0;
    int warmup = 0;
    std::uint64_t seed = 0;
    std::vector<ClassReport> per_class;
    double utilization = 0.0;  // served / offered capacity, post-warmup
    double total_cost = 0.0;   // mean over replications
    double mean_daily_cost = 0.0;
    std::vector<ReplicationReport> per_replication;
    // From a calendar ledger kept apart from the policy's own state.
    int max_day_load = 0;
    long long oversubscribed_days = 0;
    std::vector<TraceRow> trace;
};

// Throws std::invalid_argument on a bad config or a quota table whose shape
// differs from I x H; std::logic_error if a policy returns an infeasible action.
SimulationReport run_simulation(const SimConfig& config, const SchedulingPolicy& policy);

struct PairedDifference {
    std::string policy;
    double mean = 0.0;  // policy cost - baseline cost, per replication
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct Comparison {
    std::string baseline;
    std::vector<SimulationReport> reports;
    std::vector<PairedDifference> differences;  // one per policy after the first
};

// Every policy sees the same arrival stream in each replication. The
// confidence interval is the normal-approximation 95% band.
Comparison compare_policies(const SimConfig& config, const std::vector<const SchedulingPolicy*>& policies);

}  // namespace appt::sim
