#include <doctest.h>

#include <sstream>

#include "appt/lp.hpp"
#include "random_lp.hpp"

using namespace appt::lp;

TEST_CASE("min x + y subject to x + y >= 1") {
    LinearProgram p;
    const int x = p.add_variable("x", 1.0);
    const int y = p.add_variable("y", 1.0);
    p.add_constraint("cover", {{x, 1.0}, {y, 1.0}}, Sense::greater_equal, 1.0);
    const auto s = solve(p);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.objective == doctest::Approx(1.0));
    CHECK(p.max_violation(s.x) < 1e-12);
}

TEST_CASE("objective offset is included") {
    LinearProgram p;
    const int x = p.add_variable("x", 2.0);
    p.add_constraint("lo", {{x, 1.0}}, Sense::greater_equal, 3.0);
    p.objective_offset = 10.0;
    CHECK(solve(p).objective == doctest::Approx(16.0));
}

TEST_CASE("infeasible and unbounded are reported") {
    LinearProgram inf;
    const int x = inf.add_variable("x", 1.0);
    inf.add_constraint("a", {{x, 1.0}}, Sense::greater_equal, 2.0);
    inf.add_constraint("b", {{x, 1.0}}, Sense::less_equal, 1.0);
    CHECK(solve(inf).status == Status::infeasible);

    LinearProgram unb;
    const int u = unb.add_variable("u", -1.0);
    unb.add_constraint("a", {{u, 1.0}}, Sense::greater_equal, 1.0);
    CHECK(solve(unb).status == Status::unbounded);
}

TEST_CASE("negative right-hand sides") {
    LinearProgram p;
    const int x = p.add_variable("x", 1.0);
    const int y = p.add_variable("y", 2.0);
    p.add_constraint("a", {{x, -1.0}, {y, -1.0}}, Sense::less_equal, -4.0);  // x + y >= 4
    p.add_constraint("b", {{x, 1.0}}, Sense::less_equal, 3.0);
    const auto s = solve(p);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.objective == doctest::Approx(5.0));
    CHECK(s.x[0] == doctest::Approx(3.0));
    CHECK(s.x[1] == doctest::Approx(1.0));
}

TEST_CASE("redundant equality rows are handled") {
    LinearProgram p;
    const int x = p.add_variable("x", 1.0);
    const int y = p.add_variable("y", 3.0);
    p.add_constraint("e1", {{x, 1.0}, {y, 1.0}}, Sense::equal, 1.0);
    p.add_constraint("e2", {{x, 2.0}, {y, 2.0}}, Sense::equal, 2.0);
    p.add_constraint("e3", {{x, 1.0}, {y, 1.0}}, Sense::less_equal, 1.0);
    const auto s = solve(p);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.objective == doctest::Approx(1.0));
}

TEST_CASE("Beale's cycling example terminates at the optimum") {
    LinearProgram p;
    const int x4 = p.add_variable("x4", -0.75);
    const int x5 = p.add_variable("x5", 150.0);
    const int x6 = p.add_variable("x6", -0.02);
    const int x7 = p.add_variable("x7", 6.0);
    p.add_constraint("a", {{x4, 0.25}, {x5, -60.0}, {x6, -0.04}, {x7, 9.0}}, Sense::less_equal, 0.0);
    p.add_constraint("b", {{x4, 0.5}, {x5, -90.0}, {x6, -0.02}, {x7, 3.0}}, Sense::less_equal, 0.0);
    p.add_constraint("c", {{x6, 1.0}}, Sense::less_equal, 1.0);
    SimplexOptions strict;
    strict.degenerate_limit = 2;
    for (const auto& opt : {SimplexOptions{}, strict}) {
        const auto s = solve(p, opt);
        REQUIRE(s.status == Status::optimal);
        CHECK(s.objective == doctest::Approx(-0.05).epsilon(1e-12));
    }
}

TEST_CASE("random LPs agree with vertex enumeration") {
    std::mt19937 rng(2024);
    int optimal = 0, infeasible = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto pair = random_lp::make(rng);
        const auto s = solve(pair.program);
        const auto best = oracle::vertex_enumeration(pair.dense);
        if (!best) {
            CHECK(s.status == Status::infeasible);
            ++infeasible;
            continue;
        }
        REQUIRE(s.status == Status::optimal);
        ++optimal;
        CHECK(std::abs(s.objective - *best) <= 1e-8 * std::max(1.0, std::abs(*best)));
        CHECK(pair.program.max_violation(s.x) < 1e-9);
    }
    CHECK(optimal > 100);
    CHECK(infeasible > 5);
}

TEST_CASE("solves are deterministic") {
    std::mt19937 rng(7);
    const auto pair = random_lp::make(rng);
    const auto a = solve(pair.program);
    const auto b = solve(pair.program);
    CHECK(a.x == b.x);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("LP text output") {
    LinearProgram p;
    const int x = p.add_variable("x", 1.5);
    const int y = p.add_variable("y", -2.0);
    p.add_constraint("cap", {{x, 1.0}, {y, 1.0}}, Sense::less_equal, 4.0);
    p.add_constraint("eq", {{x, 1.0}, {y, -1.0}}, Sense::equal, 0.0);
    std::ostringstream out;
    write_lp_format(out, p);
    const auto text = out.str();
    CHECK(text.find("Minimize\n obj: 1.5 x - 2 y") != std::string::npos);
    CHECK(text.find(" cap: 1 x + 1 y <= 4") != std::string::npos);
    CHECK(text.find(" eq: 1 x - 1 y = 0") != std::string::npos);
    CHECK(text.rfind("End\n") == text.size() - 4);
}

TEST_CASE("evaluate and max_violation") {
    LinearProgram p;
    const int x = p.add_variable("x", 2.0);
    p.add_constraint("r", {{x, 1.0}}, Sense::less_equal, 1.0);
    p.objective_offset = 1.0;
    CHECK(p.evaluate({3.0}) == 7.0);
    CHECK(p.max_violation({3.0}) == doctest::Approx(2.0));
    CHECK(p.max_violation({-0.5}) == doctest::Approx(0.5));
}
