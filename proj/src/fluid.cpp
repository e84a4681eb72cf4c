#include "appt/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace appt::fluid {

FluidProblem FluidProblem::from_config(const mdp::MdpConfig& config, int t_steps, double dt) {
    FluidProblem p;
    p.config = config;
    p.late = config.costs.late;
    p.reject = config.costs.reject;
    p.t_steps = t_steps;
    p.dt = dt;
    std::vector<double> rate(config.arrival_rates.begin(), config.arrival_rates.end());
    p.arrival_schedule.assign(static_cast<std::size_t>(std::max(t_steps, 0)), rate);
    p.initial_demand = rate;
    for (double& x : p.initial_demand) x *= dt;
    p.initial_available.assign(static_cast<std::size_t>(config.horizon), static_cast<double>(config.capacity));
    return p;
}

void FluidProblem::validate() const {
    config.validate();
    const auto fail = [](const std::string& msg) { throw std::invalid_argument("fluid problem: " + msg); };
    const auto I = static_cast<std::size_t>(config.classes);
    const auto H = static_cast<std::size_t>(config.horizon);
    if (t_steps < config.horizon) fail("t_steps (" + std::to_string(t_steps) + ") must be >= horizon");
    if (!(dt > 0.0)) fail("dt must be > 0");
    if (late.size() != I || reject.size() != I) fail("cost dimensions do not match the class count");
    for (std::size_t i = 0; i < I; ++i) {
        if (late[i].size() != H) fail("late cost rows need one entry per day");
        for (double b : late[i]) {
            if (!(b >= 0.0)) fail("late costs must be >= 0");
        }
        if (!(reject[i] >= 0.0)) fail("reject costs must be >= 0");
    }
    if (arrival_schedule.size() != static_cast<std::size_t>(t_steps)) fail("arrival schedule needs T rows");
    for (const auto& row : arrival_schedule) {
        if (row.size() != I) fail("arrival schedule rows need one entry per class");
        for (double r : row) {
            if (!(r >= 0.0)) fail("arrival rates must be >= 0");
        }
    }
    if (initial_demand.size() != I) fail("initial demand needs one entry per class");
    for (double x : initial_demand) {
        if (!(x >= 0.0)) fail("initial demand must be >= 0");
    }
    if (initial_available.size() != H) fail("initial calendar needs one entry per day");
    for (double y : initial_available) {
        if (!(y >= 0.0 && y <= config.capacity)) fail("initial calendar entries must lie in [0, G]");
    }
    if (!(tie_break >= 0.0)) fail("tie_break must be >= 0");
}

double demand(const FluidProblem& problem, int t, int i) {
    if (t == 0) return problem.initial_demand[static_cast<std::size_t>(i)];
    return problem.arrival_schedule[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] * problem.dt;
}

namespace {

// Capacity of the day that enters the calendar at step t (offset H), zero
// once that day falls past the planning horizon.
double fresh_capacity(const FluidProblem& p, int t) {
    return t + p.config.horizon <= p.t_steps ? static_cast<double>(p.config.capacity) : 0.0;
}

double initial_capacity(const FluidProblem& p, int h) {
    return h + 1 <= p.t_steps ? p.initial_available[static_cast<std::size_t>(h)] : 0.0;
}

}  // namespace

FluidLp build_fluid_lp(const FluidProblem& problem) {
    problem.validate();
    FluidLp f;
    f.t_steps = problem.t_steps;
    f.classes = problem.config.classes;
    f.horizon = problem.config.horizon;
    const int T = f.t_steps;
    const int I = f.classes;
    const int H = f.horizon;
    auto& lp = f.program;

    // Rejections are x - sum_h u, so each booking saves gamma_i and the
    // constant sum_t gamma.x(t) moves to the objective offset.
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < I; ++i) {
            for (int h = 0; h < H; ++h) {
                const double cost = problem.late[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)] -
                                    problem.reject[static_cast<std::size_t>(i)] + problem.tie_break * (h + 1);
                lp.add_variable("u_" + std::to_string(t) + "_" + std::to_string(i + 1) + "_" + std::to_string(h + 1), cost);
            }
        }
    }
    for (int t = 0; t < T; ++t) {
        for (int h = 0; h < H; ++h) lp.add_variable("y_" + std::to_string(t) + "_" + std::to_string(h + 1));
    }
    for (int t = 0; t < T; ++t) {
        for (int i = 0; i < I; ++i) lp.objective_offset += problem.reject[static_cast<std::size_t>(i)] * demand(problem, t, i);
    }

    for (int h = 0; h < H; ++h) {
        lp.add_constraint("init_y_" + std::to_string(h + 1), {{f.available(0, h), 1.0}}, lp::Sense::equal,
                          initial_capacity(problem, h));
    }
    for (int t = 0; t < T; ++t) {
        for (int h = 0; h < H; ++h) {
            std::vector<lp::Term> row;
            for (int i = 0; i < I; ++i) row.push_back({f.booking(t, i, h), 1.0});
            row.push_back({f.available(t, h), -1.0});
            lp.add_constraint("cap_" + std::to_string(t) + "_" + std::to_string(h + 1), std::move(row),
                              lp::Sense::less_equal, 0.0);
        }
        for (int i = 0; i < I; ++i) {
            std::vector<lp::Term> row;
            for (int h = 0; h < H; ++h) row.push_back({f.booking(t, i, h), 1.0});
            lp.add_constraint("dem_" + std::to_string(t) + "_" + std::to_string(i + 1), std::move(row),
                              lp::Sense::less_equal, demand(problem, t, i));
        }
        if (t + 1 == T) continue;
        for (int h = 0; h + 1 < H; ++h) {
            std::vector<lp::Term> row{{f.available(t + 1, h), 1.0}, {f.available(t, h + 1), -1.0}};
            for (int i = 0; i < I; ++i) row.push_back({f.booking(t, i, h + 1), 1.0});
            lp.add_constraint("roll_" + std::to_string(t + 1) + "_" + std::to_string(h + 1), std::move(row),
                              lp::Sense::equal, 0.0);
        }
        lp.add_constraint("fresh_" + std::to_string(t + 1), {{f.available(t + 1, H - 1), 1.0}}, lp::Sense::equal,
                          fresh_capacity(problem, t + 1));
    }
    return f;
}

double evaluate_cost(const FluidProblem& problem, const std::vector<double>& bookings) {
    const int I = problem.config.classes;
    const int H = problem.config.horizon;
    double cost = 0.0;
    for (int t = 0; t < problem.t_steps; ++t) {
        for (int i = 0; i < I; ++i) {
            double booked = 0.0;
            for (int h = 0; h < H; ++h) {
                const double u = bookings[static_cast<std::size_t>((t * I + i) * H + h)];
                booked += u;
                cost += problem.late[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)] * u;
            }
            cost += problem.reject[static_cast<std::size_t>(i)] * (demand(problem, t, i) - booked);
        }
    }
    return cost;
}

double max_violation(const FluidProblem& problem, const std::vector<double>& bookings) {
    const int I = problem.config.classes;
    const int H = problem.config.horizon;
    std::vector<double> y(static_cast<std::size_t>(H));
    for (int h = 0; h < H; ++h) y[static_cast<std::size_t>(h)] = initial_capacity(problem, h);
    double worst = 0.0;
    for (int t = 0; t < problem.t_steps; ++t) {
        const auto u = [&](int i, int h) { return bookings[static_cast<std::size_t>((t * I + i) * H + h)]; };
        for (int h = 0; h < H; ++h) {
            double day = 0.0;
            for (int i = 0; i < I; ++i) {
                worst = std::max(worst, -u(i, h));
                day += u(i, h);
            }
            worst = std::max(worst, day - y[static_cast<std::size_t>(h)]);
        }
        for (int i = 0; i < I; ++i) {
            double row = 0.0;
            for (int h = 0; h < H; ++h) row += u(i, h);
            worst = std::max(worst, row - demand(problem, t, i));
        }
        std::vector<double> next(static_cast<std::size_t>(H));
        for (int h = 0; h + 1 < H; ++h) {
            double booked = 0.0;
            for (int i = 0; i < I; ++i) booked += u(i, h + 1);
            next[static_cast<std::size_t>(h)] = y[static_cast<std::size_t>(h + 1)] - booked;
        }
        next.back() = fresh_capacity(problem, t + 1);
        y = std::move(next);
    }
    return worst;
}

FluidSolution solve_fluid(const FluidProblem& problem, const lp::SimplexOptions& options) {
    const FluidLp f = build_fluid_lp(problem);
    const lp::Solution sol = lp::solve(f.program, options);
    FluidSolution out;
    out.status = sol.status;
    out.t_steps = f.t_steps;
    out.classes = f.classes;
    out.horizon = f.horizon;
    out.iterations = sol.iterations;
    if (sol.status == lp::Status::unbounded) {
        // Every booking is bounded by demand and capacity.
        throw std::logic_error("fluid LP reported unbounded; the model is inconsistent");
    }
    if (sol.status != lp::Status::optimal) return out;
    const std::size_t nu = static_cast<std::size_t>(f.t_steps * f.classes * f.horizon);
    out.bookings.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(nu));
    out.available.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(nu), sol.x.end());
    out.objective = evaluate_cost(problem, out.bookings);
    return out;
}

std::string_view to_string(Provenance provenance) {
    return provenance == Provenance::fluid ? "fluid" : "manual";
}

BenchmarkPolicy published_policy() {
    BenchmarkPolicy p;
    p.quotas = {{15, 12, 9, 6, 3, 0, 0}, {20, 17, 14, 11, 8, 5, 2}};
    p.provenance = Provenance::manual;
    return p;
}

BenchmarkPolicy extract_policy(const FluidSolution& solution, const FluidProblem& problem) {
    if (solution.status != lp::Status::optimal) {
        throw std::invalid_argument("extract_policy: fluid solution is not optimal");
    }
    const int H = solution.horizon;
    const int I = solution.classes;
    const int first = H;
    const int last = solution.t_steps - H;
    if (last < first) {
        throw std::invalid_argument("extract_policy: t_steps must be at least twice the horizon");
    }

    BenchmarkPolicy policy;
    policy.provenance = Provenance::fluid;
    policy.quotas.assign(static_cast<std::size_t>(I), std::vector<int>(static_cast<std::size_t>(H), 0));
    const double window = last - first + 1;
    for (int i : problem.config.priority_order()) {
        auto& row = policy.quotas[static_cast<std::size_t>(i)];
        double fractional = 0.0;
        for (int h = 0; h < H; ++h) {
            double mean = 0.0;
            for (int t = first; t <= last; ++t) mean += solution.u(t, i, h);
            mean /= window;
            // absorb simplex round-off so 33.9999999 floors to 34
            const double whole = std::floor(mean + 1e-7);
            row[static_cast<std::size_t>(h)] = static_cast<int>(whole);
            fractional += std::max(0.0, mean - whole);
        }
        auto remainder = static_cast<int>(std::floor(fractional + 1e-7));
        for (int h = 0; remainder > 0; h = (h + 1) % H, --remainder) ++row[static_cast<std::size_t>(h)];
    }
    return policy;
}

}  // namespace appt::fluid
