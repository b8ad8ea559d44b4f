#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "sced/lp.hpp"
#include "sced/scenario.hpp"

using namespace sced;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

LPProblem tiny(std::size_t n) {
    LPProblem p(n);
    for (std::size_t j = 0; j < n; ++j) p.lower[j] = 0.0;
    return p;
}
}  // namespace

TEST_SUITE_BEGIN("lp");

TEST_CASE("min x subject to x >= 3") {
    LPProblem p = tiny(1);
    p.objective = {1.0};
    p.add_row(Vec{1.0}, Relation::GreaterEq, 3.0, RowGroup::deterministic());
    const auto sol = solve_lp(p);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(3.0));
    CHECK(sol.x[0] == doctest::Approx(3.0));
}

TEST_CASE("min -x-y on the unit simplex face") {
    LPProblem p = tiny(2);
    p.objective = {-1.0, -1.0};
    p.add_row(Vec{1.0, 1.0}, Relation::LessEq, 1.0, RowGroup::deterministic());
    const auto sol = solve_lp(p);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-1.0));
}

TEST_CASE("infeasible and unbounded statuses") {
    LPProblem p = tiny(1);
    p.objective = {1.0};
    p.add_row(Vec{1.0}, Relation::LessEq, -1.0, RowGroup::deterministic());
    CHECK(solve_lp(p).status == LPStatus::Infeasible);

    LPProblem q = tiny(1);
    q.objective = {-1.0};
    CHECK(solve_lp(q).status == LPStatus::Unbounded);
}

TEST_CASE("free variables via bound shift") {
    LPProblem p(2);
    p.objective = {1.0, 1.0};
    p.lower[1] = 0.0;  // y >= 0, x free
    p.add_row(Vec{1.0, 1.0}, Relation::GreaterEq, -3.0, RowGroup::deterministic());
    const auto sol = solve_lp(p);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-3.0));

    LPProblem q(2);
    q.objective = {1.0, 0.0};
    q.lower[1] = 0.0;
    q.upper[1] = 2.0;
    q.add_row(Vec{1.0, 1.0}, Relation::Equal, 5.0, RowGroup::deterministic());
    const auto sq = solve_lp(q);
    REQUIRE(sq.status == LPStatus::Optimal);
    CHECK(sq.x[0] == doctest::Approx(3.0));
    CHECK(sq.x[1] == doctest::Approx(2.0));
}

TEST_CASE("Bland terminates on the classic cycling example") {
    // Beale's degenerate example; optimum -1/20 at x = (1/25, 0, 1, 0).
    LPProblem p = tiny(4);
    p.objective = {-0.75, 150.0, -0.02, 6.0};
    p.add_row(Vec{0.25, -60.0, -0.04, 9.0}, Relation::LessEq, 0.0,
              RowGroup::deterministic());
    p.add_row(Vec{0.5, -90.0, -0.02, 3.0}, Relation::LessEq, 0.0,
              RowGroup::deterministic());
    p.add_row(Vec{0.0, 0.0, 1.0, 0.0}, Relation::LessEq, 1.0,
              RowGroup::deterministic());
    const auto sol = solve_lp(p);
    REQUIRE(sol.status == LPStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(-0.05).epsilon(1e-9));
}

TEST_CASE("objective matches the rational vertex-enumeration oracle") {
    SplitMix64 rng(2024);
    int solved = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + int(rng.next() % 19);  // up to 20 variables
        const int m = 2 + int(rng.next() % 4);   // few rows keeps the oracle exact

        const std::size_t un = std::size_t(n);
        oracle::RationalLP rlp;
        rlp.n = n;
        rlp.c.resize(un);
        rlp.lower.assign(un, 0.0);
        rlp.upper.assign(un, kInf);
        LPProblem p = tiny(un);
        for (std::size_t j = 0; j < un; ++j) {
            const double cj = std::round((0.5 + 4.0 * rng.next_unit()) * 16.0) / 16.0;
            rlp.c[j] = cj;
            p.objective[j] = cj;
        }
        // strictly feasible base point keeps every instance feasible
        Vec x0(un);
        for (auto& v : x0) v = std::round((1.0 + 4.0 * rng.next_unit()) * 8.0) / 8.0;
        for (int r = 0; r < m; ++r) {
            std::vector<double> a(un);
            for (auto& v : a) v = std::round((0.2 + rng.next_unit()) * 16.0) / 16.0;
            double ax0 = 0.0;
            for (std::size_t j = 0; j < un; ++j) ax0 += a[j] * x0[j];
            const bool ge = rng.next_unit() < 0.7;
            if (ge) {
                const double b = std::round(ax0 * (0.7 + 0.29 * rng.next_unit()) * 16.0) / 16.0;
                rlp.add_row(a, oracle::RationalLP::Rel::Ge, b);
                p.add_row(a, Relation::GreaterEq, b, RowGroup::deterministic());
            } else {
                const double b = std::round(ax0 * (1.1 + 0.5 * rng.next_unit()) * 16.0) / 16.0;
                rlp.add_row(a, oracle::RationalLP::Rel::Le, b);
                p.add_row(a, Relation::LessEq, b, RowGroup::deterministic());
            }
        }

        const auto expect = oracle::solve_rational_lp(rlp);
        const auto sol = solve_lp(p);
        REQUIRE(expect.feasible);
        REQUIRE(sol.status == LPStatus::Optimal);
        CHECK(sol.objective ==
              doctest::Approx(expect.objective).epsilon(1e-6));
        ++solved;
    }
    CHECK(solved == 50);
}

TEST_CASE("strong duality from the final basis") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 2 + rng.next() % 6;
        LPProblem p = tiny(n);
        for (std::size_t j = 0; j < n; ++j) p.objective[j] = 0.5 + rng.next_unit();
        Vec x0(n);
        for (auto& v : x0) v = 1.0 + rng.next_unit();
        for (int r = 0; r < 4; ++r) {
            std::vector<double> a(n);
            for (auto& v : a) v = 0.2 + rng.next_unit();
            double ax0 = dot(a, x0);
            p.add_row(a, Relation::GreaterEq, ax0 * 0.9, RowGroup::deterministic());
        }
        SolveOptions opts;
        opts.compute_duals = true;
        const auto sol = solve_lp(p, opts);
        REQUIRE(sol.status == LPStatus::Optimal);
        REQUIRE(sol.dual_objective.has_value());
        CHECK(*sol.dual_objective ==
              doctest::Approx(sol.objective).epsilon(1e-6));
    }
}

TEST_CASE("positive objective scaling keeps the optimal basis") {
    SplitMix64 rng(77);
    LPProblem p = tiny(5);
    for (std::size_t j = 0; j < 5; ++j) p.objective[j] = 0.5 + rng.next_unit();
    for (int r = 0; r < 3; ++r) {
        std::vector<double> a(5);
        for (auto& v : a) v = 0.2 + rng.next_unit();
        p.add_row(a, Relation::GreaterEq, 2.0 + rng.next_unit(),
                  RowGroup::deterministic());
    }
    const auto s1 = solve_lp(p);
    for (auto& c : p.objective) c *= 7.5;
    const auto s2 = solve_lp(p);
    REQUIRE(s1.status == LPStatus::Optimal);
    REQUIRE(s2.status == LPStatus::Optimal);
    CHECK(s1.basis == s2.basis);
}

TEST_CASE("remove_rows drops exactly one scenario group") {
    LPProblem p = tiny(1);
    p.objective = {1.0};
    for (int i = 0; i < 5; ++i)
        p.add_row(Vec{1.0}, Relation::GreaterEq, double(i), RowGroup::scenario(i));

    const LPProblem q = remove_rows(p, RowGroup::scenario(3));
    CHECK(q.num_rows() == 4);
    for (std::size_t r = 0; r < q.num_rows(); ++r)
        CHECK(q.row_group[r].index != 3);
    CHECK_THROWS_AS(remove_rows(p, RowGroup::scenario(42)), UnknownGroup);

    // removing the binding scenario then re-adding reproduces the optimum
    const auto before = solve_lp(p);
    LPProblem back = remove_rows(p, RowGroup::scenario(4));
    back.add_row(Vec{1.0}, Relation::GreaterEq, 4.0, RowGroup::scenario(4));
    const auto after = solve_lp(back);
    CHECK(before.objective == doctest::Approx(after.objective));
}

TEST_SUITE_END();
