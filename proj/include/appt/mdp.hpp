#pragma once

// Finite MDP for rolling-horizon advance booking. Day offsets are 0-based in
// code: offset 0 is "tomorrow" (one day ahead), offset H-1 is H days ahead.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace appt::mdp {

struct CostParams {
    std::vector<std::vector<double>> late;  // I x H, cost per booking of class i at offset h
    std::vector<double> reject;             // I, cost per unserved request
};

struct MdpConfig {
    int classes = 0;
    int horizon = 0;
    int capacity = 0;
    std::vector<int> d_max;             // per-class arrival cap
    std::vector<double> arrival_rates;  // Poisson means, requests/day
    CostParams costs;
    double discount = 0.95;
    std::uint64_t seed = 1;

    // Throws std::invalid_argument on any dimension or range violation.
    void validate() const;
    // Non-fatal observations, e.g. a late-cost row that is not non-decreasing.
    std::vector<std::string> warnings() const;

    // The two-class, seven-day, G = 90 instance with arrival means 44 / 56.
    static MdpConfig default_instance();

    // I = 2, H = 2, G = 2, D = 2 with the first two late-cost columns of the
    // full-size instance and arrival means scaled by G / 90.
    static MdpConfig toy_instance();

    // Class indices from highest to lowest priority (larger reject cost
    // first, ties keep index order).
    std::vector<int> priority_order() const;
};

struct MdpState {
    std::vector<int> waiting;    // x_i
    std::vector<int> available;  // y_h, available[H-1] == capacity

    bool operator==(const MdpState&) const = default;
};

// Throws std::invalid_argument unless 0 <= x_i <= D_i, 0 <= y_h <= G and y_H = G.
void check_state(const MdpState& state, const MdpConfig& config);

// An empty calendar with no waiting requests.
MdpState initial_state(const MdpConfig& config);

class ActionMatrix {
public:
    ActionMatrix() = default;
    ActionMatrix(int classes, int horizon)
        : classes_(classes), horizon_(horizon),
          cells_(static_cast<std::size_t>(classes) * static_cast<std::size_t>(horizon), 0) {}

    int classes() const { return classes_; }
    int horizon() const { return horizon_; }

    int& operator()(int i, int h) { return cells_[index(i, h)]; }
    int operator()(int i, int h) const { return cells_[index(i, h)]; }

    int class_total(int i) const;
    int day_total(int h) const;
    int total() const;

    bool operator==(const ActionMatrix&) const = default;

private:
    std::size_t index(int i, int h) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(horizon_) + static_cast<std::size_t>(h);
    }

    int classes_ = 0;
    int horizon_ = 0;
    std::vector<int> cells_;
};

bool is_feasible(const MdpState& state, const ActionMatrix& action);

// Upper bound on the number of feasible actions: prod_i C(x_i + H, H).
double action_count_bound(const MdpState& state, const MdpConfig& config);

// Every integer booking matrix with day totals <= y_h and class totals <= x_i,
// in lexicographic order of the row-major cells. Throws SizeError when
// action_count_bound exceeds `limit`.
std::vector<ActionMatrix> enumerate_actions(const MdpState& state, const MdpConfig& config,
                                            double limit = 1e6);

// Late costs of the bookings plus reject costs of the requests left unbooked.
// Throws std::invalid_argument if the action is infeasible for the state.
double stage_cost(const MdpState& state, const ActionMatrix& action, const MdpConfig& config);

// Roll the calendar one day: new y_h = y_{h+1} - bookings at h+1, y_H = G,
// x = arrivals. Bookings consume capacity.
MdpState transition(const MdpState& state, const ActionMatrix& action, std::span<const int> arrivals,
                    const MdpConfig& config);

// Independent Poisson draws truncated at D_i (mass above D_i lands on D_i).
std::vector<int> sample_arrivals(const MdpConfig& config, std::mt19937_64& rng);
std::vector<int> sample_arrivals(const MdpConfig& config, std::uint64_t seed);

// P(X = 0..d_max) for X ~ min(Poisson(rate), d_max).
std::vector<double> truncated_poisson_pmf(double rate, int d_max);

// Dense indexing of every state with 0 <= x_i <= D_i, 0 <= y_h <= G, y_H = G.
class StateSpace {
public:
    explicit StateSpace(const MdpConfig& config);

    std::size_t size() const { return size_; }
    std::size_t index_of(const MdpState& state) const;
    MdpState state_at(std::size_t index) const;

    // States differ only in x for a fixed calendar; these split an index.
    std::size_t calendar_count() const { return calendar_count_; }
    std::size_t demand_count() const { return demand_count_; }
    std::size_t calendar_index(std::span<const int> available) const;

private:
    const MdpConfig* config_;
    std::size_t demand_count_ = 1;
    std::size_t calendar_count_ = 1;
    std::size_t size_ = 1;
};

struct ValueIterationOptions {
    double tolerance = 1e-9;
    int max_iterations = 100000;
    std::size_t max_states = 100000;
    double max_actions_per_state = 1e6;
};

struct ValueIterationResult {
    std::vector<double> values;                // indexed by StateSpace
    std::vector<ActionMatrix> policy;          // greedy action per state
    std::vector<double> residuals;             // sup-norm change per sweep
    int iterations = 0;
    double bellman_residual = 0.0;             // of the returned values
};

// Solves the discounted Bellman equation by successive approximation. Ties
// between actions go to the first in enumeration order. Throws SizeError when
// the state space exceeds options.max_states.
ValueIterationResult value_iteration(const MdpConfig& config, const ValueIterationOptions& options = {});

using PolicyFn = std::function<ActionMatrix(const MdpState&)>;

// Long-run average cost per day of a stationary policy, from the stationary
// distribution of the induced chain started at the empty calendar.
double average_cost(const MdpConfig& config, const PolicyFn& policy);

}  // namespace appt::mdp
