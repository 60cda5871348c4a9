#include <doctest.h>

#include "lostpennies/margin.hpp"

using namespace lp;

TEST_CASE("M_{5,4}(0.58) and the infinite margin")
{
    CHECK(margin_finite(0.58, 5, 4) == doctest::Approx(0.999903203635820).epsilon(1e-13));
    auto m = margin_infinite(0.58, 1e-14);
    CHECK(m.value == doctest::Approx(0.999903203635821).epsilon(1e-13));
    CHECK(margin_series(0.58) == doctest::Approx(m.value).epsilon(1e-13));
    CHECK(margin_altstand(0.58) == doctest::Approx(m.value).epsilon(1e-12));
    CHECK_THROWS(margin_infinite(0.58, 1e-16));
}

TEST_CASE("symmetric points give margin one")
{
    for (int k = 1; k <= 5; ++k) {
        CHECK(std::abs(margin_finite(3.0, k, k) - 1.0) < 1e-12);
        CHECK(std::abs(margin_finite(1.0, k + 1, k) - 1.0) < 1e-12);
    }
    CHECK(std::abs(margin_series(3.0) - 1.0) < 1e-12);
    CHECK(std::abs(margin_series(1.0) - 1.0) < 1e-12);
}

TEST_CASE("margin is invariant along s orbits")
{
    for (double x : {0.4, 0.58, 2.0}) CHECK(margin_series(s_fn(x)) == doctest::Approx(margin_series(x)).epsilon(1e-12));
}

TEST_CASE("tail bound at (4, 5) is below 6.3e-7")
{
    CHECK(rkrell_bound(4, 5) < 6.3e-7);
    CHECK(rkrell_bound(4, 5) == doctest::Approx(6.28451e-7).epsilon(1e-5));
}

TEST_CASE("theta and its inverse")
{
    for (double z : {0.0, 0.25, 0.5, 0.99}) CHECK(theta(theta_inverse(z)) == doctest::Approx(z).epsilon(1e-12));
    CHECK(theta_inverse(1.3) == doctest::Approx(s_inverse(theta_inverse(0.3))).epsilon(1e-12));
    for (double z : {-3.5, -0.2, 0.0, 2.7, 9.0}) CHECK(big_psi(big_theta(z)) == doctest::Approx(z).epsilon(1e-12));
    CHECK_THROWS_AS(big_theta(11.0), std::range_error);
    // psi has period one
    for (double z : {0.1, 0.37, 0.8}) CHECK(psi(z + 1.0) == doctest::Approx(psi(z)).epsilon(1e-12));
}

TEST_CASE("roots of M_{3,3} = 1")
{
    auto rs = find_level_set_finite(3, 3, 1.0, 0.5, 10.0, 1e-3);
    REQUIRE(rs.roots.size() == 3);
    CHECK(rs.roots[1] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(rs.roots[0] == doctest::Approx(1.627506897).epsilon(1e-8));
    CHECK(rs.roots[2] == doctest::Approx(5.706435240684).epsilon(1e-8));
}

TEST_CASE("infinite level set at one is {1, 3}")
{
    auto rs = find_level_set_infinite(1.0, 1e-3);
    REQUIRE(rs.roots.size() == 2);
    CHECK(rs.roots[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rs.roots[1] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(find_level_set_infinite(0.9999, 1e-3).roots.empty());
}

TEST_CASE("scan_roots finds a tangential root")
{
    auto rs = scan_roots([](double x) { return (x - 0.5) * (x - 0.5); }, 0.0, 0.0, 1.0, 0.013);
    REQUIRE(rs.roots.size() + rs.suspected.size() >= 1);
}

TEST_CASE("trail equilibria")
{
    BoundaryData bd;
    auto q = trail_equilibrium(-3, 3, bd);
    REQUIRE(q);
    CHECK(max_residual(*q) < 1e-12);
    CHECK(q->m[-3] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(q->m[3] == doctest::Approx(1.0));
    CHECK(q->n[-3] == doctest::Approx(1.0).epsilon(1e-9));
    auto off = trail_equilibrium(2, 9, bd);
    REQUIRE(off);
    CHECK(off->a.first == 3);
    CHECK(max_residual(*off) < 1e-12);
    // finite trails have equilibria well outside [lambda, 1/lambda]; Maxine dominates this one
    BoundaryData tilted{0.0, 1.0, 0.5, 0.0, 0.0, 0.0};
    auto t = trail_equilibrium(-3, 3, tilted);
    REQUIRE(t);
    CHECK(t->n[-3] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(max_residual(*t) < 1e-12);
}
