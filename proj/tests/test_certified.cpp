#include <doctest.h>

#include "lostpennies/certified.hpp"

using namespace lp::cert;

TEST_CASE("lattice values parse and print")
{
    auto v = LatticeValue::parse("0.0580000000");
    CHECK(v.str() == "0.0580000000");
    CHECK(LatticeValue::parse("954911606.03").str() == "954911606.0300000000");
    CHECK(LatticeValue::parse("1").units == unit());
}

TEST_CASE("tabulated rule reproduces both tables")
{
    auto t = build_tables(LatticeValue::parse("0.58"));
    for (const auto& c : compare_tables(t)) {
        INFO(c.name << "[" << c.i << "] " << c.computed << " vs " << c.golden);
        CHECK(c.ok);
    }
}

TEST_CASE("directed rule encloses every true value")
{
    auto t = build_tables(LatticeValue::parse("0.58"), RoundingRule::directed);
    CHECK(sandwich_violations(t).empty());
    auto tab = build_tables(LatticeValue::parse("0.58"), RoundingRule::tabulated);
    CHECK(sandwich_violations(tab).size() == 10);
}

TEST_CASE("perfect squares are detected")
{
    // omega(3) = 5 exactly, so s(3) = 1/3 and c(3) = 4 on the nose
    auto c = lattice_round(Fn::c, LatticeValue::parse("3"), Dir::down, RoundingRule::directed);
    CHECK(c.str() == "4.0000000000");
    CHECK(compare_true(Fn::c, LatticeValue::parse("3"), LatticeValue::parse("4")) == 0);
}

TEST_CASE("interval and lambda certificate")
{
    auto r = certify();
    CHECK(r.interval_ok);
    CHECK(r.interval.lo.str() == "0.9999032032");
    CHECK(r.interval.hi.str() == "0.9999032038");
    CHECK(r.rigorous_interval.lo.str() == "0.9999032033");
    CHECK(r.rigorous_interval.hi.str() == "0.9999032040");
    CHECK(r.tabulated_chain.rkrell_le_63e8);
    CHECK(r.tabulated_chain.margin_bound_ok);
    CHECK(r.lambda_ok());
    CHECK(r.golden_ok());
    int pq_ok = 0;
    for (const auto& c : r.pqst_checks) pq_ok += c.ok;
    CHECK(pq_ok == 6);
}

TEST_CASE("exact tail bound")
{
    auto b = rkrell_bound_exact(4, 5);
    CHECK(b < Rat(63, 100000000));
    CHECK(b > Rat(628, 1000000000));
}
