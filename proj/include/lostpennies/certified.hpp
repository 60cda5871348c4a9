#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace lp::cert {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline const Int& unit()
{
    static const Int u = Int(10000000000LL);  // 10^10 lattice units per 1
    return u;
}

// Exact multiple of 1e-10.
struct LatticeValue {
    Int units;

    Rat value() const { return Rat(units, unit()); }
    std::string str() const
    {
        Int a = units < 0 ? Int(-units) : units;
        std::string frac = Int(a % unit()).str();
        frac.insert(0, 10 - frac.size(), '0');
        return (units < 0 ? "-" : "") + Int(a / unit()).str() + "." + frac;
    }
    static LatticeValue parse(const std::string& s)
    {
        auto dot = s.find('.');
        std::string ip = s.substr(0, dot), fp = dot == std::string::npos ? "" : s.substr(dot + 1);
        if (fp.size() > 10) throw std::invalid_argument("LatticeValue: more than 10 decimals");
        fp.append(10 - fp.size(), '0');
        bool neg = !ip.empty() && ip[0] == '-';
        if (neg) ip.erase(0, 1);
        ip.erase(0, std::min(ip.find_first_not_of('0'), ip.size()));  // boost reads a leading 0 as octal
        Int v = Int(ip.empty() ? std::string("0") : ip) * unit() + Int(std::stoll(fp));
        return {neg ? Int(-v) : v};
    }
    friend bool operator==(const LatticeValue& a, const LatticeValue& b) { return a.units == b.units; }
    friend bool operator<(const LatticeValue& a, const LatticeValue& b) { return a.units < b.units; }
    friend bool operator<=(const LatticeValue& a, const LatticeValue& b) { return a.units <= b.units; }
};

inline Int floor_div(const Int& num, const Int& den)
{
    Int q = num / den;
    if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
    return q;
}

inline Int floor_rat(const Rat& r) { return floor_div(numerator(r), denominator(r)); }

inline LatticeValue lattice_floor(const Rat& r) { return {floor_rat(r * unit())}; }
inline LatticeValue lattice_up(const Rat& r) { return {floor_rat(r * unit()) + 1}; }  // ceil = floor + 1e-10

enum class Dir { up, down };
enum class Fn { s, c, d, s_inv };

// directed: down = floor, up = floor + 1e-10, a true enclosure.
// tabulated: down = nearest, up = nearest + 1e-10; this is the rule that reproduces
// the published tables, and it is not an enclosure.
enum class RoundingRule { directed, tabulated };

inline Rat eval_at_omega(Fn f, const Rat& w)
{
    switch (f) {
    case Fn::s: return (w - 1) * (w - 1) / (4 * (w + 7));
    case Fn::c: return (w + 3) * (w + 3) / 16;
    case Fn::d: return (w + 3) * (w + 3) / (8 * (w + 1));
    case Fn::s_inv: return 4 * (w + 7) / ((w - 1) * (w - 1));
    }
    return 0;
}

inline Int round_key(const Rat& v, RoundingRule rule)
{
    Rat scaled = v * unit();
    if (rule == RoundingRule::tabulated) scaled += Rat(1, 2);
    return floor_rat(scaled);
}

// Certified lattice rounding of f(y) for lattice y. omega (or omega' = sqrt(1 + 8/y)
// for s_inv) is bracketed between consecutive multiples of 1/E via integer square
// roots; E grows until both ends of the bracket round to the same lattice point.
inline LatticeValue lattice_round(Fn f, const LatticeValue& y, Dir dir, RoundingRule rule = RoundingRule::directed)
{
    if (y.units <= 0) throw std::domain_error("lattice_round: argument must be positive");
    if (y.units > unit() * unit()) throw std::domain_error("lattice_round: argument exceeds 1e10");
    Int num, den;
    if (f == Fn::s_inv) {
        num = y.units + 8 * unit();
        den = y.units;
    } else {
        num = 8 * y.units + unit();
        den = unit();
    }
    Int E = Int(10);
    E = boost::multiprecision::pow(E, 20);
    for (int attempt = 0; attempt < 40; ++attempt, E *= Int(10000000000LL)) {
        Int scaled = num * E * E;
        Int wl = boost::multiprecision::sqrt(Int(scaled / den));
        Int key;
        if (scaled % den == 0 && wl * wl == scaled / den) {
            key = round_key(eval_at_omega(f, Rat(wl, E)), rule);
        } else {
            Int k1 = round_key(eval_at_omega(f, Rat(wl, E)), rule);
            Int k2 = round_key(eval_at_omega(f, Rat(wl + 1, E)), rule);
            if (k1 != k2) continue;
            key = k1;
        }
        return {dir == Dir::down ? key : Int(key + 1)};
    }
    throw std::runtime_error("lattice_round: bracket did not separate");
}

// Exact comparison of the true f(y) against a lattice value: -1, 0, +1.
inline int compare_true(Fn f, const LatticeValue& y, const LatticeValue& v)
{
    Int num = f == Fn::s_inv ? Int(y.units + 8 * unit()) : Int(8 * y.units + unit());
    Int den = f == Fn::s_inv ? y.units : unit();
    Int E = boost::multiprecision::pow(Int(10), 20);
    for (int attempt = 0; attempt < 40; ++attempt, E *= Int(10000000000LL)) {
        Int scaled = num * E * E;
        Int wl = boost::multiprecision::sqrt(Int(scaled / den));
        Rat lo = eval_at_omega(f, Rat(wl, E)), hi = eval_at_omega(f, Rat(wl + 1, E));
        if (lo > hi) std::swap(lo, hi);
        if (scaled % den == 0 && wl * wl == scaled / den) hi = lo;
        Rat t = v.value();
        if (hi < t) return -1;
        if (lo > t) return 1;
        if (lo == hi) return 0;
    }
    throw std::runtime_error("compare_true: not separated");
}

struct CertTables {
    RoundingRule rule = RoundingRule::tabulated;
    std::map<int, LatticeValue> s_up, s_down, c_up, c_down, d_up, d_down;
};

inline constexpr int kTableLo = -4, kTableHi = 3;

inline CertTables build_tables(const LatticeValue& z, RoundingRule rule = RoundingRule::tabulated)
{
    CertTables t;
    t.rule = rule;
    t.s_up[0] = t.s_down[0] = z;
    for (int i = 1; i <= kTableHi; ++i) {
        t.s_up[i] = lattice_round(Fn::s, t.s_up[i - 1], Dir::up, rule);
        t.s_down[i] = lattice_round(Fn::s, t.s_down[i - 1], Dir::down, rule);
    }
    for (int i = 1; i <= -kTableLo; ++i) {
        t.s_up[-i] = lattice_round(Fn::s_inv, t.s_up[-i + 1], Dir::up, rule);
        t.s_down[-i] = lattice_round(Fn::s_inv, t.s_down[-i + 1], Dir::down, rule);
    }
    for (int i = kTableLo; i <= kTableHi; ++i) {
        t.c_up[i] = lattice_round(Fn::c, t.s_up[i], Dir::up, rule);
        t.c_down[i] = lattice_round(Fn::c, t.s_down[i], Dir::down, rule);
        t.d_up[i] = lattice_round(Fn::d, t.s_up[i], Dir::up, rule);
        t.d_down[i] = lattice_round(Fn::d, t.s_down[i], Dir::down, rule);
    }
    return t;
}

struct CertInterval {
    LatticeValue lo, hi;
};

struct PQSTBounds {
    CertInterval P4, Q5, S4, T5;
};

// 1 + sum_{r=0}^{3} prod_{i=0}^{r} (e_i - 1)
inline Rat forward_sum(const std::map<int, LatticeValue>& e)
{
    Rat acc = 1, prod = 1;
    for (int i = 0; i <= 3; ++i) {
        prod *= e.at(i).value() - 1;
        acc += prod;
    }
    return acc;
}

// sum_{r=1}^{4} prod_{i=1}^{r} (e_{-i} - 1)^{-1}
inline Rat backward_sum(const std::map<int, LatticeValue>& e)
{
    Rat acc = 0, prod = 1;
    for (int i = 1; i <= 4; ++i) {
        Rat g = e.at(-i).value() - 1;
        if (g <= 0) throw std::domain_error("pqst_bounds: table entry at index " + std::to_string(-i) + " is not above 1");
        prod /= g;
        acc += prod;
    }
    return acc;
}

// P and S increase in their inputs, Q and T decrease, so Q and T take their upper
// bound from the down tables. Outer rounding is directed.
inline PQSTBounds pqst_bounds(const CertTables& t)
{
    PQSTBounds b;
    b.P4 = {lattice_floor(forward_sum(t.c_down)), lattice_up(forward_sum(t.c_up))};
    b.S4 = {lattice_floor(forward_sum(t.d_down)), lattice_up(forward_sum(t.d_up))};
    b.Q5 = {lattice_floor(backward_sum(t.c_up)), lattice_up(backward_sum(t.c_down))};
    b.T5 = {lattice_floor(backward_sum(t.d_up)), lattice_up(backward_sum(t.d_down))};
    return b;
}

inline CertInterval margin54_interval(const LatticeValue& z, const PQSTBounds& b)
{
    Rat x = z.value();
    Rat hi = x * (b.S4.hi.value() + b.T5.hi.value()) / (b.P4.lo.value() + b.Q5.lo.value());
    Rat lo = x * (b.S4.lo.value() + b.T5.lo.value()) / (b.P4.hi.value() + b.Q5.hi.value());
    return {lattice_floor(lo), lattice_up(hi)};
}

// 3^5 2^{2k-2} 6^{1-2^k} + 3^3 2^{l-2} 6^{l-2^{l-1}}, exactly.
inline Rat rkrell_bound_exact(int k, int ell)
{
    auto pw = [](long base, long e) {
        Rat r = 1;
        for (long i = 0; i < (e < 0 ? -e : e); ++i) r *= base;
        return e < 0 ? Rat(1) / r : r;
    };
    return pw(3, 5) * pw(2, 2L * k - 2) * pw(6, 1L - (1L << k)) + pw(3, 3) * pw(2, ell - 2L) * pw(6, ell - (1L << (ell - 1)));
}

struct LambdaCertificate {
    CertInterval interval;
    Rat rkrell;                 // exact tail bound at (k, l) = (4, 5)
    bool rkrell_le_63e8 = false;
    Rat margin_bound;           // interval.hi + 6.3e-7
    bool margin_bound_ok = false;  // <= 0.9999038338
    bool lambda_ok = false;        // <= 0.999904
    Rat tight_bound;            // interval.hi + exact tail bound
    bool tight_ok = false;
};

inline LambdaCertificate lambda_upper_certificate(const CertInterval& iv)
{
    LambdaCertificate c;
    c.interval = iv;
    c.rkrell = rkrell_bound_exact(4, 5);
    Rat slack(63, 100000000);
    c.rkrell_le_63e8 = c.rkrell <= slack;
    c.margin_bound = iv.hi.value() + slack;
    c.margin_bound_ok = c.margin_bound <= LatticeValue::parse("0.9999038338").value();
    c.tight_bound = iv.hi.value() + c.rkrell;
    c.tight_ok = c.tight_bound <= LatticeValue::parse("0.9999038338").value();
    c.lambda_ok = c.rkrell_le_63e8 && c.tight_bound <= Rat(999904, 1000000) && c.margin_bound <= Rat(999904, 1000000);
    return c;
}

// Published table values. Two entries at i = -4 are printed to two decimals.
struct GoldenRow {
    int i;
    const char *s_up, *s_down, *c_up, *c_down, *d_up, *d_down;
};

inline const std::array<GoldenRow, 8>& golden_tables()
{
    static const std::array<GoldenRow, 8> rows{{
        {-4, "954911606.03", "954911605.92", "477488579.78", "477488579.73", "10926.0060411432", "10926.0060404948"},
        {-3, "21848.5122538904", "21848.5122525938", "11081.6603248978", "11081.6603242447", "52.8859257466", "52.8859257450"},
        {-2, "102.3071054647", "102.3071054616", "62.5133614707", "62.5133614689", "4.2201465577", "4.2201465576"},
        {-1, "5.3556473847", "5.3556473846", "5.7859121540", "5.7859121538", "1.5182994418", "1.5182994417"},
        {0, "0.5800000000", "0.5800000000", "1.8055756566", "1.8055756565", "1.0700124766", "1.0700124765"},
        {1, "0.0504077253", "0.0504077252", "1.0944264319", "1.0944264316", "1.0019497202", "1.0019497201"},
        {2, "0.0010408205", "0.0010408204", "1.0020784046", "1.0020784043", "1.0000010767", "1.0000010766"},
        {3, "0.0000005392", "0.0000005391", "1.0000010785", "1.0000010782", "1.0000000001", "1.0000000000"},
    }};
    return rows;
}

struct GoldenPQST {
    const char *name, *value;
};

inline const std::array<GoldenPQST, 8>& golden_pqst()
{
    static const std::array<GoldenPQST, 8> v{{{"S4_up", "1.0701489815"},
                                              {"S4_down", "1.0701489813"},
                                              {"T5_up", "2.5400964392"},
                                              {"T5_down", "2.5400964386"},
                                              {"P4_up", "1.8818013910"},
                                              {"P4_down", "1.8818013906"},
                                              {"Q5_up", "0.2123436589"},
                                              {"Q5_down", "0.2123436587"}}};
    return v;
}

inline constexpr const char* kGoldenIntervalLo = "0.9999032032";
inline constexpr const char* kGoldenIntervalHi = "0.9999032038";

// Lattice equality at the golden's printed precision; shorter goldens are compared
// after rounding the computed value to nearest at that many decimals.
inline bool matches_golden(const LatticeValue& v, const std::string& golden)
{
    auto dot = golden.find('.');
    int dec = dot == std::string::npos ? 0 : static_cast<int>(golden.size() - dot - 1);
    if (dec == 10) return v == LatticeValue::parse(golden);
    Int step = boost::multiprecision::pow(Int(10), 10 - dec);
    Int rounded = floor_div(v.units + step / 2, step) * step;
    return rounded == LatticeValue::parse(golden).units;
}

struct CellCheck {
    std::string name;
    int i = 0;
    std::string computed, golden;
    bool ok = false;
};

inline std::vector<CellCheck> compare_tables(const CertTables& t)
{
    std::vector<CellCheck> out;
    for (const auto& row : golden_tables()) {
        const std::pair<const char*, std::pair<const std::map<int, LatticeValue>*, const char*>> cells[] = {
            {"s_up", {&t.s_up, row.s_up}},     {"s_down", {&t.s_down, row.s_down}}, {"c_up", {&t.c_up, row.c_up}},
            {"c_down", {&t.c_down, row.c_down}}, {"d_up", {&t.d_up, row.d_up}},     {"d_down", {&t.d_down, row.d_down}}};
        for (const auto& [name, src] : cells) {
            const auto& v = src.first->at(row.i);
            out.push_back({name, row.i, v.str(), src.second, matches_golden(v, src.second)});
        }
    }
    return out;
}

inline std::vector<CellCheck> compare_pqst(const PQSTBounds& b)
{
    const LatticeValue* vals[] = {&b.S4.hi, &b.S4.lo, &b.T5.hi, &b.T5.lo, &b.P4.hi, &b.P4.lo, &b.Q5.hi, &b.Q5.lo};
    std::vector<CellCheck> out;
    for (size_t k = 0; k < golden_pqst().size(); ++k) {
        const auto& g = golden_pqst()[k];
        out.push_back({g.name, 0, vals[k]->str(), g.value, matches_golden(*vals[k], g.value)});
    }
    return out;
}

// Entries whose lattice value fails to bound the true value on its side.
inline std::vector<CellCheck> sandwich_violations(const CertTables& t)
{
    std::vector<CellCheck> out;
    auto check = [&](const char* name, int i, Fn f, const LatticeValue& arg, const LatticeValue& v, bool upper) {
        int cmp = compare_true(f, arg, v);
        if (upper ? cmp > 0 : cmp < 0) out.push_back({name, i, v.str(), "", false});
    };
    for (int i = 1; i <= kTableHi; ++i) {
        check("s_up", i, Fn::s, t.s_up.at(i - 1), t.s_up.at(i), true);
        check("s_down", i, Fn::s, t.s_down.at(i - 1), t.s_down.at(i), false);
    }
    for (int i = 1; i <= -kTableLo; ++i) {
        check("s_up", -i, Fn::s_inv, t.s_up.at(-i + 1), t.s_up.at(-i), true);
        check("s_down", -i, Fn::s_inv, t.s_down.at(-i + 1), t.s_down.at(-i), false);
    }
    for (int i = kTableLo; i <= kTableHi; ++i) {
        check("c_up", i, Fn::c, t.s_up.at(i), t.c_up.at(i), true);
        check("c_down", i, Fn::c, t.s_down.at(i), t.c_down.at(i), false);
        check("d_up", i, Fn::d, t.s_up.at(i), t.d_up.at(i), true);
        check("d_down", i, Fn::d, t.s_down.at(i), t.d_down.at(i), false);
    }
    return out;
}

struct CertifyReport {
    CertTables tables;          // tabulated rule
    std::vector<CellCheck> table_checks;
    PQSTBounds pqst;
    std::vector<CellCheck> pqst_checks;
    CertInterval interval;
    bool interval_ok = false;
    std::vector<CellCheck> sandwich;  // violations under the tabulated rule
    CertTables rigorous_tables;       // directed rule
    CertInterval rigorous_interval;
    LambdaCertificate tabulated_chain;    // from the tabulated interval
    LambdaCertificate rigorous_chain; // from the directed interval

    bool tables_ok() const
    {
        for (const auto& c : table_checks)
            if (!c.ok) return false;
        return true;
    }
    bool lambda_ok() const { return rigorous_chain.lambda_ok && rigorous_chain.tight_ok && tabulated_chain.margin_bound_ok && tabulated_chain.lambda_ok; }
    bool golden_ok() const { return tables_ok() && interval_ok && lambda_ok(); }
};

inline CertifyReport certify(const LatticeValue& z = LatticeValue::parse("0.58"))
{
    CertifyReport r;
    r.tables = build_tables(z, RoundingRule::tabulated);
    r.table_checks = compare_tables(r.tables);
    r.pqst = pqst_bounds(r.tables);
    r.pqst_checks = compare_pqst(r.pqst);
    r.interval = margin54_interval(z, r.pqst);
    r.interval_ok = r.interval.lo == LatticeValue::parse(kGoldenIntervalLo) && r.interval.hi == LatticeValue::parse(kGoldenIntervalHi);
    r.sandwich = sandwich_violations(r.tables);
    r.rigorous_tables = build_tables(z, RoundingRule::directed);
    r.rigorous_interval = margin54_interval(z, pqst_bounds(r.rigorous_tables));
    r.tabulated_chain = lambda_upper_certificate(r.interval);
    r.rigorous_chain = lambda_upper_certificate(r.rigorous_interval);
    return r;
}

} // namespace lp::cert
