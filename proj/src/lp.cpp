#include "appt/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace appt::lp {

int LinearProgram::add_variable(std::string name, double cost) {
    costs_.push_back(cost);
    names_.push_back(std::move(name));
    return static_cast<int>(costs_.size()) - 1;
}

void LinearProgram::add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
    for (const auto& t : terms) {
        if (t.variable < 0 || static_cast<std::size_t>(t.variable) >= costs_.size()) {
            throw std::out_of_range("constraint '" + name + "' references an unknown variable");
        }
    }
    constraints_.push_back({std::move(name), std::move(terms), sense, rhs});
}

double LinearProgram::evaluate(const std::vector<double>& x) const {
    double v = objective_offset;
    for (std::size_t j = 0; j < costs_.size(); ++j) v += costs_[j] * x[j];
    return v;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (double v : x) worst = std::max(worst, -v);
    for (const auto& row : constraints_) {
        double lhs = 0.0;
        for (const auto& t : row.terms) lhs += t.coefficient * x[static_cast<std::size_t>(t.variable)];
        switch (row.sense) {
            case Sense::less_equal: worst = std::max(worst, lhs - row.rhs); break;
            case Sense::greater_equal: worst = std::max(worst, row.rhs - lhs); break;
            case Sense::equal: worst = std::max(worst, std::abs(lhs - row.rhs)); break;
        }
    }
    return worst;
}

std::string_view to_string(Status status) {
    switch (status) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
        case Status::iteration_limit: return "iteration_limit";
    }
    return "unknown";
}

namespace {

struct SparseColumn {
    std::vector<std::pair<int, double>> entries;
};

enum class ColumnKind { structural, slack, artificial };

class RevisedSimplex {
public:
    RevisedSimplex(const LinearProgram& program, const SimplexOptions& options)
        : opt_(options), n_(static_cast<int>(program.variable_count())),
          m_(static_cast<int>(program.constraint_count())) {
        build(program);
    }

    Solution run() {
        Solution sol;
        const int limit = opt_.max_iterations > 0 ? opt_.max_iterations : 50 * (m_ + cols());

        // Phase 1: minimize the sum of artificials.
        std::vector<double> phase1(static_cast<std::size_t>(cols()), 0.0);
        bool any_artificial = false;
        for (int j = 0; j < cols(); ++j) {
            if (kind_[static_cast<std::size_t>(j)] == ColumnKind::artificial) {
                phase1[static_cast<std::size_t>(j)] = 1.0;
                any_artificial = true;
            }
        }
        if (any_artificial) {
            const Status s = iterate(phase1, /*allow_artificial=*/true, limit, sol);
            if (s == Status::iteration_limit) {
                sol.status = s;
                return sol;
            }
            double infeasibility = 0.0;
            for (int r = 0; r < m_; ++r) {
                if (kind_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] == ColumnKind::artificial) {
                    infeasibility += xb_(r);
                }
            }
            if (infeasibility > opt_.feasibility_tolerance * (1.0 + rhs_.lpNorm<Eigen::Infinity>())) {
                sol.status = Status::infeasible;
                return sol;
            }
            drive_out_artificials();
        }

        // Phase 2 on the true costs.
        std::vector<double> phase2(static_cast<std::size_t>(cols()), 0.0);
        std::copy(cost_.begin(), cost_.end(), phase2.begin());
        sol.status = iterate(phase2, /*allow_artificial=*/false, limit, sol);
        if (sol.status != Status::optimal) return sol;

        sol.x.assign(static_cast<std::size_t>(n_), 0.0);
        for (int r = 0; r < m_; ++r) {
            const int j = basis_[static_cast<std::size_t>(r)];
            if (j < n_) sol.x[static_cast<std::size_t>(j)] = std::max(0.0, xb_(r));
        }
        return sol;
    }

private:
    int cols() const { return static_cast<int>(columns_.size()); }

    void build(const LinearProgram& program) {
        cost_ = program.costs();
        columns_.resize(static_cast<std::size_t>(n_));
        kind_.assign(static_cast<std::size_t>(n_), ColumnKind::structural);
        rhs_ = Eigen::VectorXd::Zero(m_);
        basis_.assign(static_cast<std::size_t>(m_), -1);

        for (int r = 0; r < m_; ++r) {
            const auto& row = program.constraints()[static_cast<std::size_t>(r)];
            // Keep every right-hand side non-negative.
            const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
            Sense sense = row.sense;
            if (sign < 0.0 && sense != Sense::equal) {
                sense = sense == Sense::less_equal ? Sense::greater_equal : Sense::less_equal;
            }
            rhs_(r) = sign * row.rhs;
            for (const auto& t : row.terms) {
                if (t.coefficient != 0.0) {
                    columns_[static_cast<std::size_t>(t.variable)].entries.emplace_back(r, sign * t.coefficient);
                }
            }
            if (sense == Sense::less_equal) {
                basis_[static_cast<std::size_t>(r)] = add_column(r, 1.0, ColumnKind::slack);
            } else {
                if (sense == Sense::greater_equal) add_column(r, -1.0, ColumnKind::slack);
                basis_[static_cast<std::size_t>(r)] = add_column(r, 1.0, ColumnKind::artificial);
            }
        }
        // Merge duplicate (row, variable) entries.
        for (auto& col : columns_) {
            std::sort(col.entries.begin(), col.entries.end());
            std::vector<std::pair<int, double>> merged;
            for (const auto& e : col.entries) {
                if (!merged.empty() && merged.back().first == e.first) {
                    merged.back().second += e.second;
                } else {
                    merged.push_back(e);
                }
            }
            col.entries = std::move(merged);
        }
        cost_.resize(static_cast<std::size_t>(cols()), 0.0);
        in_basis_.assign(static_cast<std::size_t>(cols()), -1);
        for (int r = 0; r < m_; ++r) in_basis_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = r;
        refactor();
    }

    int add_column(int row, double value, ColumnKind kind) {
        columns_.push_back({{{row, value}}});
        kind_.push_back(kind);
        return cols() - 1;
    }

    void refactor() {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
        for (int r = 0; r < m_; ++r) {
            for (const auto& [row, v] : columns_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])].entries) {
                B(row, r) = v;
            }
        }
        binv_ = B.partialPivLu().inverse();
        xb_ = binv_ * rhs_;
        for (int r = 0; r < m_; ++r) {
            if (std::abs(xb_(r)) < 1e-12) xb_(r) = 0.0;
        }
        since_refactor_ = 0;
    }

    Eigen::VectorXd column_direction(int j) const {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(m_);
        for (const auto& [row, v] : columns_[static_cast<std::size_t>(j)].entries) w += v * binv_.col(row);
        return w;
    }

    double reduced_cost(int j, const std::vector<double>& c, const Eigen::VectorXd& duals) const {
        double d = c[static_cast<std::size_t>(j)];
        for (const auto& [row, v] : columns_[static_cast<std::size_t>(j)].entries) d -= duals(row) * v;
        return d;
    }

    void pivot(int row, int entering, const Eigen::VectorXd& w, double theta) {
        xb_ -= theta * w;
        xb_(row) = theta;
        const double p = w(row);
        binv_.row(row) /= p;
        for (int r = 0; r < m_; ++r) {
            if (r != row && w(r) != 0.0) binv_.row(r) -= w(r) * binv_.row(row);
        }
        in_basis_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(row)])] = -1;
        basis_[static_cast<std::size_t>(row)] = entering;
        in_basis_[static_cast<std::size_t>(entering)] = row;
        if (++since_refactor_ >= opt_.refactor_interval) refactor();
    }

    Status iterate(const std::vector<double>& c, bool allow_artificial, int limit, Solution& sol) {
        int degenerate_run = 0;
        Eigen::VectorXd cb(m_);
        while (true) {
            if (sol.iterations >= limit) return Status::iteration_limit;
            for (int r = 0; r < m_; ++r) cb(r) = c[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])];
            const Eigen::VectorXd duals = binv_.transpose() * cb;
            const bool bland = degenerate_run >= opt_.degenerate_limit;

            int entering = -1;
            double best = -opt_.optimality_tolerance;
            for (int j = 0; j < cols(); ++j) {
                if (in_basis_[static_cast<std::size_t>(j)] >= 0) continue;
                if (!allow_artificial && kind_[static_cast<std::size_t>(j)] == ColumnKind::artificial) continue;
                const double d = reduced_cost(j, c, duals);
                if (d < best) {
                    entering = j;
                    if (bland) break;
                    best = d;
                }
            }
            if (entering < 0) return Status::optimal;

            const Eigen::VectorXd w = column_direction(entering);
            int leaving = -1;
            double theta = std::numeric_limits<double>::infinity();
            for (int r = 0; r < m_; ++r) {
                const int basic = basis_[static_cast<std::size_t>(r)];
                double ratio;
                if (!allow_artificial && kind_[static_cast<std::size_t>(basic)] == ColumnKind::artificial) {
                    // A leftover artificial is pinned at zero.
                    if (std::abs(w(r)) <= opt_.pivot_tolerance) continue;
                    ratio = 0.0;
                } else {
                    if (w(r) <= opt_.pivot_tolerance) continue;
                    ratio = std::max(0.0, xb_(r)) / w(r);
                }
                bool take = false;
                if (leaving < 0 || ratio < theta - 1e-12) {
                    take = true;
                } else if (ratio <= theta + 1e-12) {
                    const int current = basis_[static_cast<std::size_t>(leaving)];
                    take = bland ? basic < current : std::abs(w(r)) > std::abs(w(leaving));
                }
                if (take) {
                    leaving = r;
                    theta = ratio;
                }
            }
            if (leaving < 0) return Status::unbounded;

            ++sol.iterations;
            if (bland) ++sol.bland_pivots;
            degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;
            pivot(leaving, entering, w, theta);
        }
    }

    void drive_out_artificials() {
        for (int r = 0; r < m_; ++r) {
            if (kind_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] != ColumnKind::artificial) continue;
            for (int j = 0; j < cols(); ++j) {
                if (in_basis_[static_cast<std::size_t>(j)] >= 0 || kind_[static_cast<std::size_t>(j)] == ColumnKind::artificial) continue;
                const Eigen::VectorXd w = column_direction(j);
                if (std::abs(w(r)) > 1e-7) {
                    pivot(r, j, w, std::max(0.0, xb_(r)) / w(r));
                    break;
                }
            }
            // Otherwise the row is redundant and its artificial stays at zero.
        }
    }

    SimplexOptions opt_;
    int n_;
    int m_;
    std::vector<double> cost_;
    std::vector<SparseColumn> columns_;
    std::vector<ColumnKind> kind_;
    Eigen::VectorXd rhs_;
    std::vector<int> basis_;
    std::vector<int> in_basis_;
    Eigen::MatrixXd binv_;
    Eigen::VectorXd xb_;
    int since_refactor_ = 0;
};

}  // namespace

Solution solve(const LinearProgram& program, const SimplexOptions& options) {
    RevisedSimplex simplex(program, options);
    Solution sol = simplex.run();
    if (sol.status == Status::optimal) sol.objective = program.evaluate(sol.x);
    return sol;
}

void write_lp_format(std::ostream& out, const LinearProgram& program) {
    const auto precision = out.precision(17);
    const auto write_terms = [&](const std::vector<std::pair<int, double>>& terms) {
        int on_line = 0;
        bool first = true;
        for (const auto& [var, coef] : terms) {
            if (coef == 0.0) continue;
            if (on_line == 6) {
                out << "\n   ";
                on_line = 0;
            }
            out << (coef < 0.0 ? " - " : (first ? " " : " + ")) << std::abs(coef) << ' '
                << program.names()[static_cast<std::size_t>(var)];
            first = false;
            ++on_line;
        }
        if (first) out << " 0 " << (program.names().empty() ? "x" : program.names().front());
    };

    out << "\\ generated by apptsched\n";
    if (program.objective_offset != 0.0) out << "\\ objective constant " << program.objective_offset << '\n';
    out << "Minimize\n obj:";
    std::vector<std::pair<int, double>> obj;
    for (std::size_t j = 0; j < program.costs().size(); ++j) obj.emplace_back(static_cast<int>(j), program.costs()[j]);
    write_terms(obj);
    out << "\nSubject To\n";
    for (const auto& row : program.constraints()) {
        out << ' ' << row.name << ':';
        std::vector<std::pair<int, double>> terms;
        for (const auto& t : row.terms) terms.emplace_back(t.variable, t.coefficient);
        write_terms(terms);
        switch (row.sense) {
            case Sense::less_equal: out << " <= "; break;
            case Sense::equal: out << " = "; break;
            case Sense::greater_equal: out << " >= "; break;
        }
        out << row.rhs << '\n';
    }
    out << "End\n";
    out.precision(precision);
}

}  // namespace appt::lp
