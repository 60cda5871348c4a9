#include <doctest.h>

#include "lostpennies/dynamics.hpp"

using namespace lp;

TEST_CASE("a static solution is a fixed point of one step")
{
    auto t = static_terminal(5, 2.0);
    auto r = dabmn_step(t.m, t.n);
    auto q = finite_standard_solution(2.0, 4, 4);
    for (int i = -4; i <= 4; ++i) {
        CHECK(std::abs(r.a[i + 4] - q.a[i]) < 1e-12);
        CHECK(std::abs(r.b[i + 4] - q.b[i]) < 1e-12);
        CHECK(std::abs(r.m[i + 5] - q.m[i]) < 1e-12);
        CHECK(std::abs(r.n[i + 5] - q.n[i]) < 1e-12);
    }
    auto sh = dabmn_evolve(t, 50);
    for (int i = -4; i <= 4; ++i) CHECK(std::abs(sh.a(i, 0) - q.a[i]) < 1e-12);
    CHECK(sh.convergence[0] < 1e-12);
}

TEST_CASE("penny preset with one open vertex is Penny Forfeit each turn")
{
    auto sh = dabmn_evolve(penny_terminal(1), 3);
    CHECK(sh.a(0, 0) == doctest::Approx(0.25));
    CHECK(sh.b(0, 0) == doctest::Approx(0.25));
    CHECK(sh.m(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("boundary rows constant, residuals small, reflection symmetry")
{
    auto sh = dabmn_evolve(plateau_terminal(6), 600);
    for (int j = 0; j <= 600; j += 100) {
        CHECK(sh.m(-6, j) == 0.0);
        CHECK(sh.m(6, j) == 1.0);
        CHECK(sh.n(-6, j) == 1.0);
    }
    for (int j = 0; j < 600; ++j) CHECK(dabmn_residual(sh, j) < 1e-12);
    for (int j = 0; j < 600; j += 37)
        for (int i = -5; i <= 5; ++i) CHECK(sh.b(i, j) == doctest::Approx(sh.a(-i, j)).epsilon(1e-12));
}

TEST_CASE("plateau on [-8, 8]: two battlefields merge into one at the centre")
{
    auto sh = dabmn_evolve(plateau_terminal(8), 4200);
    CHECK(significant_peaks(sh.rows[4199].a) == 2);
    CHECK(significant_peaks(sh.rows[140].a) == 2);
    CHECK(significant_peaks(sh.rows[0].a) == 1);
    const auto& a0 = sh.rows[0].a;
    CHECK(std::max_element(a0.begin(), a0.end()) - a0.begin() == 7);
}

TEST_CASE("peak counting")
{
    CHECK(significant_peaks({0.1, 1.0, 0.1, 0.5, 0.2}) == 2);
    CHECK(significant_peaks({0.1, 1.0, 0.1, 0.005, 0.001}) == 1);
    CHECK(significant_peaks({1.0, 0.5, 0.2}) == 1);
    CHECK(significant_peaks({}) == 0);
}

TEST_CASE("errors")
{
    CHECK_THROWS_AS(dabmn_step({0.0, 0.5, 0.0}, {1.0, 0.5, 0.0}), std::domain_error);
    CHECK_THROWS_AS(dabmn_evolve(penny_terminal(2), 0), std::invalid_argument);
    CHECK_THROWS_AS(dabmn_evolve(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 0.0}, 5), std::invalid_argument);
}

TEST_CASE("A-system")
{
    for (auto L : {Lattice::integer, Lattice::half}) {
        auto s = a_system_solve(L, 1.0, 10);
        CHECK(a_system_residual(s) < 1e-12);
        for (double v : s.values.v) CHECK(v >= 0.0);
        auto t = a_system_solve(L, 0.37, 10);
        for (int k = s.values.first; k <= s.values.last(); ++k) CHECK(std::abs(t.values[k] - 0.37 * s.values[k]) < 1e-12);
    }
    auto z = a_system_solve(Lattice::integer, 1.0, 2);
    CHECK(z.values[1] == doctest::Approx((std::sqrt(33.0) - 3.0) / 4.0));
    CHECK(a_system_solve(Lattice::half, 1.0, 1).values[0] == 2.0);
    CHECK_THROWS(a_system_solve(Lattice::integer, 0.0, 3));
}

TEST_CASE("symmetric solutions solve the A-system")
{
    auto r = symmetric_crosscheck(10);
    CHECK(r.reflect3 < 1e-8);
    CHECK(r.reflect1 < 1e-8);
    CHECK(r.a_system3 < 1e-8);
    CHECK(r.a_system1 < 1e-8);
    CHECK(r.match3 < 1e-8);
    CHECK(r.match1 < 1e-8);
    CHECK(r.am3 < 1e-10);
    CHECK(r.am1 < 1e-10);
}
