#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "elementary.hpp"

namespace lp {

// Integer-indexed sequence stored on a contiguous range.
struct Seq {
    int first = 0;
    std::vector<double> v;

    Seq() = default;
    Seq(int first_, int last_, double fill = 0.0) : first(first_), v(std::max(0, last_ - first_ + 1), fill) {}

    int last() const { return first + static_cast<int>(v.size()) - 1; }
    bool has(int i) const { return i >= first && i <= last(); }
    double operator[](int i) const { return v.at(static_cast<size_t>(i - first)); }
    double& operator[](int i) { return v.at(static_cast<size_t>(i - first)); }
};

struct BoundaryData {
    double m_minus_inf = 0.0;
    double m_plus_inf = 1.0;
    double n_minus_inf = 1.0;
    double n_plus_inf = 0.0;
    double m_star = 0.0;
    double n_star = 0.0;

    double margin() const { return (n_minus_inf - n_plus_inf) / (m_plus_inf - m_minus_inf); }
};

inline void validate(const BoundaryData& bd)
{
    if (!(bd.m_minus_inf < bd.m_plus_inf)) throw std::domain_error("boundary: need m_minus_inf < m_plus_inf");
    if (!(bd.n_plus_inf < bd.n_minus_inf)) throw std::domain_error("boundary: need n_plus_inf < n_minus_inf");
    if (!(bd.m_star <= bd.m_minus_inf)) throw std::domain_error("boundary: need m_star <= m_minus_inf");
    if (!(bd.n_star <= bd.n_plus_inf)) throw std::domain_error("boundary: need n_star <= n_plus_inf");
}

// Windowed ABMN solution. a, b live on [lo, hi]; m, n, dm, dn on [lo-1, hi+1] with
// dm_i = m_i - m_{i-1} and dn_i = n_{i-1} - n_i kept explicitly so phi and stakes
// never come from differences of nearly equal numbers.
struct Quadruple {
    int lo = 0, hi = 0;
    Seq a, b, m, n, dm, dn;
    BoundaryData boundary;
    bool finite = false;
    double cen_ratio = kNaN;
    bool underflow = false;

    double mina_margin() const { return boundary.margin(); }
};

struct PennyStakes {
    double a, b;
};

// Stakes from M = m_{i+1}-m_{i-1}, N = n_{i-1}-n_{i+1}; zero if either gap underflowed.
inline PennyStakes penny_stakes(double M, double N)
{
    if (!(M > 0.0) || !(N > 0.0)) return {0.0, 0.0};
    double p = M / (M + N), q = N / (M + N);
    return {M * p * q, N * p * q};
}

inline PennyStakes penny_forfeit(double M, double N)
{
    if (!(M > 0.0) || !(N > 0.0)) throw std::domain_error("penny_forfeit: M and N must be positive");
    return penny_stakes(M, N);
}

// Two-sided product series t_{-1} = 1, t_k = t_{k-1} e(s_k x) for k >= 0,
// t_k = t_{k+1} / e(s_{k+1} x) for k <= -2. The ratio of consecutive terms is
// monotone in each direction, so once it drops below one the remaining tail is
// bounded by t r / (1 - r).
struct ProductSeries {
    Seq t;
    double sum = 0.0;
    double tail_bound = 0.0;

    double at(int k) const { return t.has(k) ? t[k] : 0.0; }
};

inline ProductSeries product_series(double x, double (*em1)(double), int need_lo, int need_hi, double abs_tol,
                                    double rel_tol, int max_steps = 4096)
{
    require_positive(x, "product_series");
    std::vector<double> fwd{1.0};  // t_{-1}, t_0, ...
    std::vector<double> bwd;       // t_{-2}, t_{-3}, ...
    double sum = 1.0, fwd_bound = 0.0, bwd_bound = 0.0;

    double y = x;  // s_k(x) for the next forward factor
    for (int k = 0;; ++k) {
        if (k > max_steps) throw std::runtime_error("product_series: forward tail not converged");
        double r = em1(y);
        double last = fwd.back();
        if (k > need_hi) {
            if (last == 0.0 || r == 0.0) { fwd_bound = 0.0; break; }
            if (r < 1.0) {
                double bnd = last * r / (1.0 - r);
                if (bnd <= std::max(abs_tol, rel_tol * sum)) { fwd_bound = bnd; break; }
            }
        }
        double tk = last * r;
        if (std::isinf(tk)) throw std::range_error("product_series: forward terms overflow");
        fwd.push_back(tk);
        sum += tk;
        y = s_step(y, +1);
    }

    y = x;
    for (int k = -2;; --k) {
        if (-k > max_steps) throw std::runtime_error("product_series: backward tail not converged");
        y = s_step(y, -1);  // s_{k+1}(x)
        double e = em1(y);
        double r = std::isinf(e) ? 0.0 : 1.0 / e;
        double last = bwd.empty() ? 1.0 : bwd.back();
        if (k < need_lo) {
            if (last == 0.0 || r == 0.0) { bwd_bound = 0.0; break; }
            if (r < 1.0) {
                double bnd = last * r / (1.0 - r);
                if (bnd <= std::max(abs_tol, rel_tol * sum)) { bwd_bound = bnd; break; }
            }
        }
        double tk = last * r;
        if (std::isinf(tk)) throw std::range_error("product_series: backward terms overflow");
        bwd.push_back(tk);
        sum += tk;
    }

    ProductSeries ps;
    int kmin = -1 - static_cast<int>(bwd.size());
    ps.t = Seq(kmin, static_cast<int>(fwd.size()) - 2);
    for (size_t i = 0; i < bwd.size(); ++i) ps.t[-2 - static_cast<int>(i)] = bwd[i];
    for (size_t i = 0; i < fwd.size(); ++i) ps.t[-1 + static_cast<int>(i)] = fwd[i];
    // resum smallest-first
    std::vector<double> terms = ps.t.v;
    std::sort(terms.begin(), terms.end());
    ps.sum = 0.0;
    for (double v : terms) ps.sum += v;
    ps.tail_bound = fwd_bound + bwd_bound;
    return ps;
}

inline double Z(double x, double tol)
{
    require_positive(x, "Z");
    if (!(tol > 0.0)) throw std::domain_error("Z: tol must be positive");
    auto ps = product_series(x, c_minus_one, 0, -1, tol / 2.0, 0.0);
    return ps.sum;
}

// log Z(y) by log-sum-exp, usable where Z itself overflows; +inf for y in {0, inf}.
inline double log_Z(double y)
{
    if (std::isinf(y) || y == 0.0) return kInf;
    std::vector<double> L{0.0};
    double lk = 0.0, yk = y, top = 0.0;
    for (int k = 0; k < 4096; ++k) {
        double e = c_minus_one(yk);
        if (e == 0.0) break;
        lk += std::log(e);
        L.push_back(lk);
        top = std::max(top, lk);
        if (lk < top - 60.0 && e < 0.5) break;
        yk = s_step(yk, +1);
    }
    lk = 0.0;
    yk = y;
    for (int k = 0; k < 4096; ++k) {
        yk = s_step(yk, -1);
        double e = c_minus_one(yk);
        if (std::isinf(e)) break;
        lk -= std::log(e);
        L.push_back(lk);
        top = std::max(top, lk);
        if (lk < top - 60.0 && e > 2.0) break;
    }
    double acc = 0.0;
    for (double l : L) acc += std::exp(l - top);
    return top + std::log(acc);
}

inline void require_window(int lo, int hi)
{
    if (hi - lo + 1 < 3) throw std::invalid_argument("window must hold at least 3 open-play points");
    if (lo > 0 || hi < 0) throw std::invalid_argument("window must contain 0");
}

inline void fill_stakes(Quadruple& q)
{
    q.a = Seq(q.lo, q.hi);
    q.b = Seq(q.lo, q.hi);
    for (int i = q.lo; i <= q.hi; ++i) {
        auto st = penny_stakes(q.dm[i] + q.dm[i + 1], q.dn[i] + q.dn[i + 1]);
        q.a[i] = st.a;
        q.b[i] = st.b;
        if (st.a == 0.0 || st.b == 0.0) q.underflow = true;
    }
}

inline Quadruple default_solution(double x, int lo, int hi)
{
    require_positive(x, "default_solution");
    require_window(lo, hi);
    const double rel = 1e-18;
    auto tc = product_series(x, c_minus_one, lo - 2, hi, 0.0, rel);
    auto td = product_series(x, d_minus_one, lo - 2, hi, 0.0, rel);

    Quadruple q;
    q.lo = lo;
    q.hi = hi;
    q.dm = Seq(lo - 1, hi + 1);
    q.dn = Seq(lo - 1, hi + 1);
    for (int i = lo - 1; i <= hi + 1; ++i) {
        q.dm[i] = tc.at(i - 1);
        q.dn[i] = x * td.at(i - 1);
        if (q.dm[i] == 0.0 || q.dn[i] == 0.0) q.underflow = true;
    }

    double left = 0.0;
    for (int k = tc.t.first; k <= lo - 2; ++k) left += tc.t[k];
    double right = 0.0;
    for (int k = td.t.last(); k >= hi + 1; --k) right += td.t[k];
    right *= x;

    q.m = Seq(lo - 1, hi + 1);
    q.n = Seq(lo - 1, hi + 1);
    q.m[lo - 1] = left;
    for (int i = lo; i <= hi + 1; ++i) q.m[i] = q.m[i - 1] + q.dm[i];
    q.n[hi + 1] = right;
    for (int i = hi + 1; i >= lo; --i) q.n[i - 1] = q.n[i] + q.dn[i];

    fill_stakes(q);
    q.boundary = {0.0, tc.sum, x * td.sum, 0.0, 0.0, 0.0};
    q.cen_ratio = x;
    return q;
}

inline Quadruple dilate(Quadruple q, double u)
{
    require_positive(u, "dilate");
    for (Seq* s : {&q.a, &q.b, &q.m, &q.n, &q.dm, &q.dn})
        for (double& v : s->v) v *= u;
    auto& bd = q.boundary;
    for (double* v : {&bd.m_minus_inf, &bd.m_plus_inf, &bd.n_minus_inf, &bd.n_plus_inf, &bd.m_star, &bd.n_star}) *v *= u;
    return q;
}

inline Quadruple translate(Quadruple q, double v1, double v2)
{
    for (double& v : q.m.v) v += v1;
    for (double& v : q.n.v) v += v2;
    q.boundary.m_minus_inf += v1;
    q.boundary.m_plus_inf += v1;
    q.boundary.m_star += v1;
    q.boundary.n_minus_inf += v2;
    q.boundary.n_plus_inf += v2;
    q.boundary.n_star += v2;
    return q;
}

// Left shift by k: new index i holds old index i + k.
inline Quadruple shift(Quadruple q, int k)
{
    for (Seq* s : {&q.a, &q.b, &q.m, &q.n, &q.dm, &q.dn}) s->first -= k;
    q.lo -= k;
    q.hi -= k;
    q.cen_ratio = q.dm.has(0) && q.dm[0] > 0.0 ? q.dn[0] / q.dm[0] : kNaN;
    return q;
}

// (a, b, m, n)_i -> (b, a, n, m)_{-i}
inline Quadruple role_reverse(const Quadruple& q)
{
    Quadruple r;
    r.lo = -q.hi;
    r.hi = -q.lo;
    r.finite = q.finite;
    r.underflow = q.underflow;
    r.a = Seq(r.lo, r.hi);
    r.b = Seq(r.lo, r.hi);
    for (int i = r.lo; i <= r.hi; ++i) {
        r.a[i] = q.b[-i];
        r.b[i] = q.a[-i];
    }
    r.m = Seq(r.lo - 1, r.hi + 1);
    r.n = Seq(r.lo - 1, r.hi + 1);
    r.dm = Seq(r.lo - 1, r.hi + 1, kNaN);
    r.dn = Seq(r.lo - 1, r.hi + 1, kNaN);
    for (int i = r.lo - 1; i <= r.hi + 1; ++i) {
        r.m[i] = q.n[-i];
        r.n[i] = q.m[-i];
        if (q.dn.has(1 - i)) r.dm[i] = q.dn[1 - i];
        if (q.dm.has(1 - i)) r.dn[i] = q.dm[1 - i];
    }
    const auto& bd = q.boundary;
    r.boundary = {bd.n_plus_inf, bd.n_minus_inf, bd.m_plus_inf, bd.m_minus_inf, bd.n_star, bd.m_star};
    r.cen_ratio = r.dm.has(0) ? r.dn[0] / r.dm[0] : kNaN;
    return r;
}

inline Quadruple standard_solution(double x, int lo, int hi)
{
    auto q = default_solution(x, lo, hi);
    q = dilate(std::move(q), 1.0 / q.boundary.m_plus_inf);
    q.boundary.m_plus_inf = 1.0;
    return q;
}

// Standard solution restricted to the trail [-j-1, k+1]: m runs 0 -> 1 across it,
// n_{k+1} = 0 and n_{-j-1} equals M_{j+1,k+1}(x).
inline Seq slice(const Seq& s, int first, int last)
{
    Seq r(first, last);
    for (int i = first; i <= last; ++i) r[i] = s[i];
    return r;
}

inline Quadruple finite_standard_solution(double x, int j, int k)
{
    if (j < 0 || k < 0) throw std::invalid_argument("finite trail needs an open-play vertex");
    auto q = default_solution(x, std::min(-j, -1), std::max(k, 1));
    q.lo = -j;
    q.hi = k;
    q.a = slice(q.a, -j, k);
    q.b = slice(q.b, -j, k);
    for (Seq* s : {&q.m, &q.n, &q.dm, &q.dn}) *s = slice(*s, -j - 1, k + 1);
    double D = 0.0;
    for (int i = -j; i <= k + 1; ++i) D += q.dm[i];
    q.dm[-j - 1] = kNaN;
    q.dn[-j - 1] = kNaN;
    for (int i = -j; i <= k + 1; ++i) {
        q.dm[i] /= D;
        q.dn[i] /= D;
    }
    q.m[-j - 1] = 0.0;
    for (int i = -j; i <= k + 1; ++i) q.m[i] = q.m[i - 1] + q.dm[i];
    q.m[k + 1] = 1.0;
    q.n[k + 1] = 0.0;
    for (int i = k + 1; i >= -j; --i) q.n[i - 1] = q.n[i] + q.dn[i];
    for (int i = -j; i <= k; ++i) {
        q.a[i] /= D;
        q.b[i] /= D;
    }
    q.finite = true;
    q.boundary = {0.0, 1.0, q.n[-j - 1], 0.0, 0.0, 0.0};
    return q;
}

// Affine image of a finite solution carrying the requested endpoint payoffs; only
// consistent when the solution's Mina margin matches the boundary's.
inline Quadruple fit_boundary(const Quadruple& q, const BoundaryData& bd)
{
    double u = (bd.m_plus_inf - bd.m_minus_inf) / (q.boundary.m_plus_inf - q.boundary.m_minus_inf);
    auto r = dilate(q, u);
    r = translate(std::move(r), bd.m_minus_inf - r.boundary.m_minus_inf, bd.n_plus_inf - r.boundary.n_plus_inf);
    r.boundary.m_star = bd.m_star;
    r.boundary.n_star = bd.n_star;
    return r;
}

struct PhiView {
    Seq phi;
    int battlefield = 0;
    bool underflow = false;
};

inline constexpr double kReportFloor = 1e-300;

inline PhiView phi_view(const Quadruple& q)
{
    PhiView pv;
    pv.phi = Seq(q.dm.first, q.dm.last(), kNaN);
    bool found = false;
    for (int i = q.dm.first; i <= q.dm.last(); ++i) {
        double dm = q.dm[i], dn = q.dn[i];
        if (std::isnan(dm) || std::isnan(dn)) continue;
        if (dm < kReportFloor || dn < kReportFloor) {
            pv.underflow = true;
            continue;
        }
        double p = dn / dm;
        pv.phi[i] = p;
        if (p > 1.0 / 3.0 && p <= 3.0) {
            pv.battlefield = i;
            found = true;
        }
    }
    if (!found) throw std::range_error("phi_view: battlefield outside window");
    return pv;
}

// Per-index max |ABMN(1-4)| residual on [lo, hi].
inline Seq residuals(const Quadruple& q)
{
    Seq r(q.lo, q.hi);
    for (int i = q.lo; i <= q.hi; ++i) {
        double a = q.a[i], b = q.b[i];
        double s = a + b;
        double e1 = s * (q.m[i] + a) - (a * q.m[i + 1] + b * q.m[i - 1]);
        double e2 = s * (q.n[i] + b) - (a * q.n[i + 1] + b * q.n[i - 1]);
        double e3 = s * s - b * (q.m[i + 1] - q.m[i - 1]);
        double e4 = s * s - a * (q.n[i - 1] - q.n[i + 1]);
        r[i] = std::max({std::abs(e1), std::abs(e2), std::abs(e3), std::abs(e4)});
    }
    return r;
}

inline double max_residual(const Quadruple& q)
{
    auto r = residuals(q);
    return r.v.empty() ? 0.0 : *std::max_element(r.v.begin(), r.v.end());
}

struct StandardTerms {
    double a, b, dm, dn;
};

// Standard-solution entries at index k from y = s_k(x) alone:
// f = y c d/(c + y d)^2, a = c f/Z(y), b = y d f/Z(y), dm = 1/Z(y), dn = y/Z(y).
inline StandardTerms standard_closed_form(double y)
{
    double lz = log_Z(y);
    if (std::isinf(lz)) return {0.0, 0.0, 0.0, 0.0};
    double lc = std::log1p(c_minus_one(y)), ld = std::log1p(d_minus_one(y)), ly = std::log(y);
    double lyd = ly + ld;
    double lden = lyd + std::log1p(std::exp(lc - lyd));
    double lf = ly + lc + ld - 2.0 * lden;
    return {std::exp(lc + lf - lz), std::exp(ly + ld + lf - lz), std::exp(-lz), std::exp(ly - lz)};
}

} // namespace lp
