#pragma once

// Dense two-phase revised simplex for small and medium linear programs of the
// form  min c'x + offset  s.t.  rows (<=, =, >=),  x >= 0.

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace appt::lp {

enum class Sense { less_equal, equal, greater_equal };

struct Term {
    int variable = 0;
    double coefficient = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::less_equal;
    double rhs = 0.0;
};

class LinearProgram {
public:
    int add_variable(std::string name, double cost = 0.0);
    void add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);
    void set_cost(int variable, double cost) { costs_.at(static_cast<std::size_t>(variable)) = cost; }

    std::size_t variable_count() const { return costs_.size(); }
    std::size_t constraint_count() const { return constraints_.size(); }
    const std::vector<double>& costs() const { return costs_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }

    double objective_offset = 0.0;

    // Value of the objective at x (offset included).
    double evaluate(const std::vector<double>& x) const;
    // Largest violation of any row or sign constraint at x.
    double max_violation(const std::vector<double>& x) const;

private:
    std::vector<double> costs_;
    std::vector<std::string> names_;
    std::vector<Constraint> constraints_;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

std::string_view to_string(Status status);

struct SimplexOptions {
    double feasibility_tolerance = 1e-9;
    double optimality_tolerance = 1e-9;
    double pivot_tolerance = 1e-9;
    int refactor_interval = 50;
    // Consecutive degenerate pivots before switching to Bland's rule.
    int degenerate_limit = 50;
    int max_iterations = 0;  // 0 = 50 * (rows + columns)
};

struct Solution {
    Status status = Status::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
    int bland_pivots = 0;
};

// Deterministic: Dantzig pricing with ties to the lowest column, falling
// back to Bland's rule while the objective stalls.
Solution solve(const LinearProgram& program, const SimplexOptions& options = {});

// CPLEX LP text format, readable by common external solvers.
void write_lp_format(std::ostream& out, const LinearProgram& program);

}  // namespace appt::lp
