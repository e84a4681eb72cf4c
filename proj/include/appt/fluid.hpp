#pragma once

// Discretized fluid relaxation of the booking MDP, solved as an LP, and the
// stationary quota table extracted from its solution.

#include <string_view>
#include <vector>

#include "appt/lp.hpp"
#include "appt/mdp.hpp"

namespace appt::fluid {

struct FluidProblem {
    mdp::MdpConfig config;
    std::vector<std::vector<double>> late;  // beta, I x H (mirrors config late costs)
    std::vector<double> reject;             // gamma, I
    // Demand fed at each step, T x I. Row 0 is overridden by initial_demand.
    std::vector<std::vector<double>> arrival_schedule;
    int t_steps = 28;
    double dt = 1.0;
    std::vector<double> initial_demand;     // x^0
    std::vector<double> initial_available;  // y^0
    // Cost added per booking and per day of offset; selects the earliest
    // slots among otherwise equal-cost optima. Zero disables it.
    double tie_break = 1e-6;

    // Constant rates, an empty calendar and x^0 = lambda * dt.
    static FluidProblem from_config(const mdp::MdpConfig& config, int t_steps = 28, double dt = 1.0);

    // Throws std::invalid_argument (including T < H).
    void validate() const;
};

// Variable layout of the built LP.
struct FluidLp {
    lp::LinearProgram program;
    int t_steps = 0;
    int classes = 0;
    int horizon = 0;

    int booking(int t, int i, int h) const { return (t * classes + i) * horizon + h; }
    int available(int t, int h) const { return t_steps * classes * horizon + t * horizon + h; }
};

// Per step t: bookings u(t,i,h) >= 0 and calendar y(t,h) >= 0 with
//   sum_i u(t,i,h) <= y(t,h),   sum_h u(t,i,h) <= x_i(t),
//   y(t+1,h) = y(t,h+1) - sum_i u(t,i,h+1),   y(t+1,H) = G,
// except that service days past the end of the horizon carry no capacity.
// Objective: sum_t [ beta.u(t) + gamma.(x(t) - sum_h u(t,.,h)) ], minimized.
FluidLp build_fluid_lp(const FluidProblem& problem);

struct FluidSolution {
    lp::Status status = lp::Status::infeasible;
    int t_steps = 0;
    int classes = 0;
    int horizon = 0;
    std::vector<double> bookings;   // u, T x I x H row-major
    std::vector<double> available;  // y, T x H
    double objective = 0.0;         // discretized cost without the tie-break term
    int iterations = 0;

    double u(int t, int i, int h) const {
        return bookings[static_cast<std::size_t>((t * classes + i) * horizon + h)];
    }
    double y(int t, int h) const { return available[static_cast<std::size_t>(t * horizon + h)]; }
};

FluidSolution solve_fluid(const FluidProblem& problem, const lp::SimplexOptions& options = {});

// Demand x_i(t) fed at step t.
double demand(const FluidProblem& problem, int t, int i);

// Discretized cost of an arbitrary booking tensor (tie-break excluded).
double evaluate_cost(const FluidProblem& problem, const std::vector<double>& bookings);

// Rolls the calendar forward under the given bookings and returns the largest
// violation of the per-step constraints (0 when feasible).
double max_violation(const FluidProblem& problem, const std::vector<double>& bookings);

enum class Provenance { fluid, manual };

std::string_view to_string(Provenance provenance);

struct BenchmarkPolicy {
    std::vector<std::vector<int>> quotas;  // I x H bookings per decision epoch
    Provenance provenance = Provenance::manual;
    // Apply the next-day overflow / underflow adjustments in simulation.
    bool next_day_adjustment = true;
};

// The published seven-day quota table.
BenchmarkPolicy published_policy();

// Averages u over t in [H, T-H], floors, then hands each class's
// floor(sum of fractional parts) to its earliest offsets, highest-priority
// class first. Throws std::invalid_argument when the solution is not optimal
// or T < 2H.
BenchmarkPolicy extract_policy(const FluidSolution& solution, const FluidProblem& problem);

}  // namespace appt::fluid
