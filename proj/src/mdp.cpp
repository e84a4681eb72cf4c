#include "appt/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "appt/errors.hpp"

namespace appt::mdp {

void MdpConfig::validate() const {
    const auto fail = [](const std::string& msg) { throw std::invalid_argument("mdp config: " + msg); };
    if (classes < 1) fail("classes must be >= 1");
    if (horizon < 1) fail("horizon must be >= 1");
    if (capacity < 0) fail("capacity must be >= 0");
    const auto I = static_cast<std::size_t>(classes);
    const auto H = static_cast<std::size_t>(horizon);
    if (d_max.size() != I) fail("d_max needs one entry per class");
    if (arrival_rates.size() != I) fail("arrival_rates needs one entry per class");
    if (costs.late.size() != I) fail("late_costs needs one row per class");
    if (costs.reject.size() != I) fail("reject_costs needs one entry per class");
    for (std::size_t i = 0; i < I; ++i) {
        if (d_max[i] < 0) fail("d_max must be >= 0");
        if (!(arrival_rates[i] >= 0.0) || !std::isfinite(arrival_rates[i])) fail("arrival rates must be >= 0");
        if (costs.late[i].size() != H) fail("late_costs rows need one entry per day of the horizon");
        for (double b : costs.late[i]) {
            if (!(b >= 0.0) || !std::isfinite(b)) fail("late costs must be >= 0");
        }
        if (!(costs.reject[i] >= 0.0) || !std::isfinite(costs.reject[i])) fail("reject costs must be >= 0");
    }
    if (!(discount >= 0.0 && discount < 1.0)) fail("discount must lie in [0, 1)");
}

std::vector<std::string> MdpConfig::warnings() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < costs.late.size(); ++i) {
        const auto& row = costs.late[i];
        for (std::size_t h = 1; h < row.size(); ++h) {
            if (row[h] < row[h - 1]) {
                std::ostringstream msg;
                msg << "late cost of class " << i + 1 << " decreases from day " << h << " (" << row[h - 1]
                    << ") to day " << h + 1 << " (" << row[h] << ")";
                out.push_back(msg.str());
            }
        }
    }
    return out;
}

MdpConfig MdpConfig::default_instance() {
    MdpConfig c;
    c.classes = 2;
    c.horizon = 7;
    c.capacity = 90;
    c.d_max = {200, 200};
    c.arrival_rates = {44.0, 56.0};
    c.costs.late = {{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}, {0.0, 1.0, 3.0, 0.0, 1.0, 2.0, 3.0}};
    c.costs.reject = {5.0, 10.0};
    c.discount = 0.95;
    c.seed = 1;
    return c;
}

MdpConfig MdpConfig::toy_instance() {
    MdpConfig c = default_instance();
    c.horizon = 2;
    c.capacity = 2;
    c.d_max = {2, 2};
    c.arrival_rates = {44.0 * 2.0 / 90.0, 56.0 * 2.0 / 90.0};
    for (auto& row : c.costs.late) row.resize(2);
    return c;
}

std::vector<int> MdpConfig::priority_order() const {
    std::vector<int> order(static_cast<std::size_t>(classes));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return costs.reject[static_cast<std::size_t>(a)] > costs.reject[static_cast<std::size_t>(b)];
    });
    return order;
}

void check_state(const MdpState& state, const MdpConfig& config) {
    if (state.waiting.size() != static_cast<std::size_t>(config.classes) ||
        state.available.size() != static_cast<std::size_t>(config.horizon)) {
        throw std::invalid_argument("state dimensions do not match the model");
    }
    for (std::size_t i = 0; i < state.waiting.size(); ++i) {
        if (state.waiting[i] < 0 || state.waiting[i] > config.d_max[i]) {
            throw std::invalid_argument("waiting count out of [0, D_i]");
        }
    }
    for (int y : state.available) {
        if (y < 0 || y > config.capacity) throw std::invalid_argument("available capacity out of [0, G]");
    }
    if (state.available.back() != config.capacity) {
        throw std::invalid_argument("last day of the horizon must be fully available");
    }
}

MdpState initial_state(const MdpConfig& config) {
    return {std::vector<int>(static_cast<std::size_t>(config.classes), 0),
            std::vector<int>(static_cast<std::size_t>(config.horizon), config.capacity)};
}

int ActionMatrix::class_total(int i) const {
    int s = 0;
    for (int h = 0; h < horizon_; ++h) s += (*this)(i, h);
    return s;
}

int ActionMatrix::day_total(int h) const {
    int s = 0;
    for (int i = 0; i < classes_; ++i) s += (*this)(i, h);
    return s;
}

int ActionMatrix::total() const { return std::accumulate(cells_.begin(), cells_.end(), 0); }

bool is_feasible(const MdpState& state, const ActionMatrix& action) {
    if (action.classes() != static_cast<int>(state.waiting.size()) ||
        action.horizon() != static_cast<int>(state.available.size())) {
        return false;
    }
    for (int i = 0; i < action.classes(); ++i) {
        for (int h = 0; h < action.horizon(); ++h) {
            if (action(i, h) < 0) return false;
        }
        if (action.class_total(i) > state.waiting[static_cast<std::size_t>(i)]) return false;
    }
    for (int h = 0; h < action.horizon(); ++h) {
        if (action.day_total(h) > state.available[static_cast<std::size_t>(h)]) return false;
    }
    return true;
}

double action_count_bound(const MdpState& state, const MdpConfig& config) {
    // Compositions of at most x_i bookings into H ordered days.
    double bound = 1.0;
    for (int x : state.waiting) {
        double c = 1.0;
        for (int j = 1; j <= config.horizon; ++j) c = c * (x + j) / j;
        bound *= c;
    }
    return bound;
}

std::vector<ActionMatrix> enumerate_actions(const MdpState& state, const MdpConfig& config, double limit) {
    check_state(state, config);
    const double bound = action_count_bound(state, config);
    if (bound > limit) {
        std::ostringstream msg;
        msg << "action enumeration needs up to " << bound << " matrices (limit " << limit
            << "); use the fluid solver for instances of this size";
        throw SizeError(msg.str());
    }
    const int I = config.classes;
    const int H = config.horizon;
    std::vector<ActionMatrix> out;
    ActionMatrix a(I, H);
    std::vector<int> class_left = state.waiting;
    std::vector<int> day_left = state.available;

    // Fill cells in row-major order; each cell ranges over what both its row
    // budget and column capacity still allow.
    const auto recurse = [&](auto&& self, int cell) -> void {
        if (cell == I * H) {
            out.push_back(a);
            return;
        }
        const int i = cell / H;
        const int h = cell % H;
        const int top = std::min(class_left[static_cast<std::size_t>(i)], day_left[static_cast<std::size_t>(h)]);
        for (int v = 0; v <= top; ++v) {
            a(i, h) = v;
            class_left[static_cast<std::size_t>(i)] -= v;
            day_left[static_cast<std::size_t>(h)] -= v;
            self(self, cell + 1);
            class_left[static_cast<std::size_t>(i)] += v;
            day_left[static_cast<std::size_t>(h)] += v;
        }
        a(i, h) = 0;
    };
    recurse(recurse, 0);
    return out;
}

double stage_cost(const MdpState& state, const ActionMatrix& action, const MdpConfig& config) {
    if (!is_feasible(state, action)) throw std::invalid_argument("stage_cost: infeasible action");
    double cost = 0.0;
    for (int i = 0; i < config.classes; ++i) {
        const auto& late = config.costs.late[static_cast<std::size_t>(i)];
        for (int h = 0; h < config.horizon; ++h) cost += late[static_cast<std::size_t>(h)] * action(i, h);
        cost += config.costs.reject[static_cast<std::size_t>(i)] *
                (state.waiting[static_cast<std::size_t>(i)] - action.class_total(i));
    }
    return cost;
}

MdpState transition(const MdpState& state, const ActionMatrix& action, std::span<const int> arrivals,
                    const MdpConfig& config) {
    if (!is_feasible(state, action)) throw std::invalid_argument("transition: infeasible action");
    if (arrivals.size() != static_cast<std::size_t>(config.classes)) {
        throw std::invalid_argument("transition: arrival vector has wrong length");
    }
    MdpState next;
    next.waiting.assign(arrivals.begin(), arrivals.end());
    for (std::size_t i = 0; i < next.waiting.size(); ++i) {
        if (next.waiting[i] < 0 || next.waiting[i] > config.d_max[i]) {
            throw std::invalid_argument("transition: arrivals out of [0, D_i]");
        }
    }
    const int H = config.horizon;
    next.available.resize(static_cast<std::size_t>(H));
    for (int h = 0; h + 1 < H; ++h) {
        next.available[static_cast<std::size_t>(h)] =
            state.available[static_cast<std::size_t>(h + 1)] - action.day_total(h + 1);
    }
    next.available[static_cast<std::size_t>(H - 1)] = config.capacity;
    try {
        check_state(next, config);
    } catch (const std::invalid_argument& e) {
        throw std::logic_error(std::string("transition produced an invalid state: ") + e.what());
    }
    return next;
}

std::vector<int> sample_arrivals(const MdpConfig& config, std::mt19937_64& rng) {
    std::vector<int> x(static_cast<std::size_t>(config.classes), 0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double rate = config.arrival_rates[i];
        if (rate <= 0.0) continue;
        std::poisson_distribution<int> draw(rate);
        x[i] = std::min(draw(rng), config.d_max[i]);
    }
    return x;
}

std::vector<int> sample_arrivals(const MdpConfig& config, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_arrivals(config, rng);
}

std::vector<double> truncated_poisson_pmf(double rate, int d_max) {
    std::vector<double> p(static_cast<std::size_t>(d_max) + 1, 0.0);
    if (rate <= 0.0) {
        p[0] = 1.0;
        return p;
    }
    double term = std::exp(-rate);
    double below = 0.0;
    for (int k = 0; k < d_max; ++k) {
        p[static_cast<std::size_t>(k)] = term;
        below += term;
        term *= rate / (k + 1);
    }
    p[static_cast<std::size_t>(d_max)] = std::max(0.0, 1.0 - below);
    return p;
}

StateSpace::StateSpace(const MdpConfig& config) : config_(&config) {
    for (int d : config.d_max) demand_count_ *= static_cast<std::size_t>(d + 1);
    for (int h = 0; h + 1 < config.horizon; ++h) calendar_count_ *= static_cast<std::size_t>(config.capacity + 1);
    size_ = demand_count_ * calendar_count_;
}

std::size_t StateSpace::calendar_index(std::span<const int> available) const {
    std::size_t idx = 0;
    for (int h = config_->horizon - 2; h >= 0; --h) {
        idx = idx * static_cast<std::size_t>(config_->capacity + 1) + static_cast<std::size_t>(available[static_cast<std::size_t>(h)]);
    }
    return idx;
}

std::size_t StateSpace::index_of(const MdpState& state) const {
    std::size_t demand = 0;
    for (int i = config_->classes - 1; i >= 0; --i) {
        demand = demand * static_cast<std::size_t>(config_->d_max[static_cast<std::size_t>(i)] + 1) +
                 static_cast<std::size_t>(state.waiting[static_cast<std::size_t>(i)]);
    }
    return calendar_index(state.available) * demand_count_ + demand;
}

MdpState StateSpace::state_at(std::size_t index) const {
    MdpState s;
    std::size_t demand = index % demand_count_;
    std::size_t calendar = index / demand_count_;
    for (int i = 0; i < config_->classes; ++i) {
        const auto radix = static_cast<std::size_t>(config_->d_max[static_cast<std::size_t>(i)] + 1);
        s.waiting.push_back(static_cast<int>(demand % radix));
        demand /= radix;
    }
    for (int h = 0; h + 1 < config_->horizon; ++h) {
        const auto radix = static_cast<std::size_t>(config_->capacity + 1);
        s.available.push_back(static_cast<int>(calendar % radix));
        calendar /= radix;
    }
    s.available.push_back(config_->capacity);
    return s;
}

namespace {

// Probability of each demand vector, in StateSpace demand-index order.
std::vector<double> demand_distribution(const MdpConfig& config) {
    std::vector<double> p{1.0};
    for (int i = 0; i < config.classes; ++i) {
        const auto pmf = truncated_poisson_pmf(config.arrival_rates[static_cast<std::size_t>(i)],
                                               config.d_max[static_cast<std::size_t>(i)]);
        std::vector<double> next;
        next.reserve(p.size() * pmf.size());
        for (double pi : pmf) {
            for (double q : p) next.push_back(q * pi);
        }
        p = std::move(next);
    }
    return p;
}

std::vector<int> calendar_after(const MdpState& s, const ActionMatrix& a, const MdpConfig& config) {
    std::vector<int> y(static_cast<std::size_t>(config.horizon));
    for (int h = 0; h + 1 < config.horizon; ++h) {
        y[static_cast<std::size_t>(h)] = s.available[static_cast<std::size_t>(h + 1)] - a.day_total(h + 1);
    }
    y.back() = config.capacity;
    return y;
}

}  // namespace

ValueIterationResult value_iteration(const MdpConfig& config, const ValueIterationOptions& options) {
    config.validate();
    const StateSpace space(config);
    if (space.size() > options.max_states) {
        std::ostringstream msg;
        msg << "state space has " << space.size() << " states (limit " << options.max_states
            << "); use the fluid solver for instances of this size";
        throw SizeError(msg.str());
    }

    struct Choice {
        double cost;
        std::size_t calendar;
    };
    std::vector<std::vector<ActionMatrix>> actions(space.size());
    std::vector<std::vector<Choice>> choices(space.size());
    for (std::size_t s = 0; s < space.size(); ++s) {
        const MdpState state = space.state_at(s);
        actions[s] = enumerate_actions(state, config, options.max_actions_per_state);
        for (const auto& a : actions[s]) {
            choices[s].push_back({stage_cost(state, a, config), space.calendar_index(calendar_after(state, a, config))});
        }
    }

    const auto demand_p = demand_distribution(config);
    const std::size_t D = space.demand_count();
    std::vector<double> v(space.size(), 0.0);
    std::vector<double> expected(space.calendar_count());
    const auto expect = [&](const std::vector<double>& values) {
        for (std::size_t c = 0; c < expected.size(); ++c) {
            double e = 0.0;
            for (std::size_t d = 0; d < D; ++d) e += demand_p[d] * values[c * D + d];
            expected[c] = e;
        }
    };
    const auto best_choice = [&](std::size_t s, double& value) {
        std::size_t arg = 0;
        value = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < choices[s].size(); ++a) {
            const double q = choices[s][a].cost + config.discount * expected[choices[s][a].calendar];
            if (q < value) {
                value = q;
                arg = a;
            }
        }
        return arg;
    };

    ValueIterationResult result;
    std::vector<double> next(space.size());
    for (int it = 1; it <= options.max_iterations; ++it) {
        expect(v);
        double change = 0.0;
        for (std::size_t s = 0; s < space.size(); ++s) {
            best_choice(s, next[s]);
            change = std::max(change, std::abs(next[s] - v[s]));
        }
        v.swap(next);
        result.residuals.push_back(change);
        result.iterations = it;
        if (change < options.tolerance) break;
    }

    expect(v);
    result.policy.reserve(space.size());
    double residual = 0.0;
    for (std::size_t s = 0; s < space.size(); ++s) {
        double q = 0.0;
        const std::size_t a = best_choice(s, q);
        residual = std::max(residual, std::abs(q - v[s]));
        result.policy.push_back(actions[s][a]);
    }
    result.bellman_residual = residual;
    result.values = std::move(v);
    return result;
}

double average_cost(const MdpConfig& config, const PolicyFn& policy) {
    config.validate();
    const StateSpace space(config);
    const auto demand_p = demand_distribution(config);
    const std::size_t D = space.demand_count();

    std::vector<double> cost(space.size());
    std::vector<std::size_t> successor(space.size());
    for (std::size_t s = 0; s < space.size(); ++s) {
        const MdpState state = space.state_at(s);
        const ActionMatrix a = policy(state);
        cost[s] = stage_cost(state, a, config);
        successor[s] = space.calendar_index(calendar_after(state, a, config));
    }

    // Start from the empty calendar with fresh arrivals, then iterate the
    // lazy chain (I + P) / 2, which has the same stationary law.
    std::vector<double> pi(space.size(), 0.0);
    const std::size_t start = space.calendar_index(initial_state(config).available);
    for (std::size_t d = 0; d < D; ++d) pi[start * D + d] = demand_p[d];
    std::vector<double> mass(space.calendar_count());
    for (int it = 0; it < 1000000; ++it) {
        std::fill(mass.begin(), mass.end(), 0.0);
        for (std::size_t s = 0; s < space.size(); ++s) mass[successor[s]] += pi[s];
        double change = 0.0;
        for (std::size_t c = 0; c < mass.size(); ++c) {
            for (std::size_t d = 0; d < D; ++d) {
                const std::size_t s = c * D + d;
                const double updated = 0.5 * (pi[s] + mass[c] * demand_p[d]);
                change += std::abs(updated - pi[s]);
                pi[s] = updated;
            }
        }
        if (change < 1e-14) break;
    }
    double avg = 0.0;
    for (std::size_t s = 0; s < space.size(); ++s) avg += pi[s] * cost[s];
    return avg;
}

}  // namespace appt::mdp
