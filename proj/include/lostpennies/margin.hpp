#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "abmn.hpp"
#include "elementary.hpp"

namespace lp {

struct SeriesPQST {
    int k = 0, ell = 1;
    double P = 1.0, Q = 0.0, S = 1.0, T = 0.0;
};

// Partial sums at x itself, no orbit normalization.
inline SeriesPQST pqst(double x, int ell, int k)
{
    require_positive(x, "pqst");
    if (ell < 1) throw std::invalid_argument("pqst: ell must be >= 1");
    if (k < 0) throw std::invalid_argument("pqst: k must be >= 0");
    SeriesPQST r;
    r.k = k;
    r.ell = ell;
    double pc = 1.0, pd = 1.0, y = x;
    for (int i = 0; i < k; ++i) {
        pc *= c_minus_one(y);
        pd *= d_minus_one(y);
        r.P += pc;
        r.S += pd;
        y = s_step(y, +1);
    }
    pc = pd = 1.0;
    y = x;
    for (int i = 1; i < ell; ++i) {
        y = s_step(y, -1);
        pc /= c_minus_one(y);
        pd /= d_minus_one(y);
        r.Q += pc;
        r.T += pd;
    }
    return r;
}

// M_{l,k}(x) = x(S_k + T_l)/(P_k + Q_l). Uses M_{l,k}(x) = M_{l+1,k-1}(s(x)) to pull x
// toward (1/3, 3] first so the products stay in range.
inline double margin_finite(double x, int ell, int k)
{
    require_positive(x, "margin_finite");
    if (ell < 1) throw std::invalid_argument("margin_finite: ell must be >= 1");
    if (k < 0) throw std::invalid_argument("margin_finite: k must be >= 0");
    while (x > 3.0 && k > 0) {
        x = s_fn(x);
        ++ell;
        --k;
    }
    while (x <= 1.0 / 3.0 && ell > 1) {
        x = s_inverse(x);
        --ell;
        ++k;
    }
    auto r = pqst(x, ell, k);
    return x * (r.S + r.T) / (r.P + r.Q);
}

// Cauchy bound on |M(x) - M_{l,k}(x)| for x in [1/3, 3].
inline double rkrell_forward(int k) { return std::exp(5 * std::log(3.0) + (2.0 * k - 2) * std::log(2.0) + (1.0 - std::ldexp(1.0, k)) * std::log(6.0)); }
inline double rkrell_backward(int ell) { return std::exp(3 * std::log(3.0) + (ell - 2.0) * std::log(2.0) + (ell - std::ldexp(1.0, ell - 1)) * std::log(6.0)); }
inline double rkrell_bound(int k, int ell) { return rkrell_forward(k) + rkrell_backward(ell); }

// Representative of x's s-orbit in (1/3, 3] and the number of forward steps taken to reach it.
inline double reduce_to_fundamental(double x, int* steps = nullptr)
{
    require_positive(x, "reduce_to_fundamental");
    int k = 0;
    while (x > 3.0) {
        x = s_fn(x);
        ++k;
    }
    while (x <= 1.0 / 3.0) {
        x = s_inverse(x);
        --k;
    }
    if (steps) *steps = k;
    return x;
}

struct MarginEstimate {
    double value;
    double bound;
    int k, ell;
};

inline MarginEstimate margin_infinite(double x, double tol)
{
    require_positive(x, "margin_infinite");
    if (!(tol >= 1e-15)) throw std::domain_error("margin_infinite: tol below double resolution");
    double y = reduce_to_fundamental(x);
    int k = 0, ell = 1;
    while (rkrell_forward(k) > tol / 2) ++k;
    while (rkrell_backward(ell) > tol / 2) ++ell;
    return {margin_finite(y, ell, k), rkrell_bound(k, ell), k, ell};
}

// x * sum(d-products) / sum(c-products), both series to full double precision.
inline double margin_series(double x)
{
    double y = reduce_to_fundamental(x);
    auto tc = product_series(y, c_minus_one, 0, -1, 0.0, 1e-18);
    auto td = product_series(y, d_minus_one, 0, -1, 0.0, 1e-18);
    return y * td.sum / tc.sum;
}

// Sum over i of s_i(x)/Z(s_i(x)).
inline double margin_altstand(double x)
{
    double y = reduce_to_fundamental(x);
    double acc = 0.0;
    for (int dir : {+1, -1}) {
        double u = dir > 0 ? y : s_step(y, -1);
        for (int i = 0; i < 64; ++i) {
            double term = standard_closed_form(u).dn;
            acc += term;
            if (term == 0.0 || (i > 2 && term < 1e-20 * acc)) break;
            u = s_step(u, dir);
        }
    }
    return acc;
}

inline double q_affine(double y) { return 3.0 * (y - 1.0 / 3.0) / 8.0; }

inline double theta(double x)
{
    require_positive(x, "theta");
    int k = 0;
    double y = x;
    if (y >= 3.0) {
        while (y >= 3.0) {
            y = s_fn(y);
            ++k;
        }
    } else {
        while (y < 1.0 / 3.0) {
            y = s_inverse(y);
            --k;
        }
    }
    return k + std::clamp(q_affine(y), 0.0, 1.0);
}

// q is affine, so q^{-1} is exact and no bisection is needed.
inline double theta_inverse(double z)
{
    double k = std::floor(z);
    double y = 1.0 / 3.0 + 8.0 * (z - k) / 3.0;
    return s_orbit(y, -static_cast<int>(k));
}

inline double big_theta(double z)
{
    if (std::abs(z) > 10.0) throw std::range_error("big_theta: |z| > 10 overflows");
    double sgn = z >= 0.0 ? 1.0 : -1.0;
    return std::exp2(sgn * (std::exp2(std::abs(z)) - 1.0));
}

inline double big_psi(double x)
{
    require_positive(x, "big_psi");
    double l = std::log2(x);
    return l >= 0.0 ? std::log2(l + 1.0) : -std::log2(1.0 - l);
}

inline double psi(double z) { return margin_series(theta_inverse(z)); }

struct RootSet {
    double target = 0.0;
    double lo = 0.0, hi = 0.0;
    double mesh = 0.0;
    std::vector<double> roots;
    std::vector<double> residuals;
    std::vector<double> suspected;  // tangential candidates, no sign change seen
    std::vector<double> suspected_residuals;
};

// Mesh scan for sign changes of f - target, each bracket bisected to xtol. Local minima
// of |f - target| without a sign change are refined and reported as suspected roots.
inline RootSet scan_roots(const std::function<double(double)>& f, double target, double lo, double hi, double mesh,
                          double xtol = 1e-13)
{
    if (!(mesh > 0.0)) throw std::domain_error("scan_roots: mesh must be positive");
    if (!(hi > lo)) throw std::domain_error("scan_roots: empty interval");
    RootSet rs;
    rs.target = target;
    rs.lo = lo;
    rs.hi = hi;
    rs.mesh = mesh;
    int npts = static_cast<int>(std::floor((hi - lo) / mesh + 1e-9)) + 1;
    std::vector<double> xs(npts), vs(npts);
    for (int i = 0; i < npts; ++i) {
        xs[i] = i == npts - 1 ? hi : lo + i * mesh;
        vs[i] = f(xs[i]) - target;
    }
    auto g = [&](double x) { return f(x) - target; };
    for (int i = 0; i < npts; ++i) {
        if (vs[i] == 0.0) {
            rs.roots.push_back(xs[i]);
            continue;
        }
        if (i + 1 < npts && vs[i + 1] != 0.0 && (vs[i] < 0.0) != (vs[i + 1] < 0.0)) {
            double a = xs[i], b = xs[i + 1], fa = vs[i];
            for (int it = 0; it < 200 && b - a > xtol * std::max(1.0, std::abs(a)); ++it) {
                double mid = 0.5 * (a + b), fm = g(mid);
                if (fm == 0.0) { a = b = mid; break; }
                if ((fm < 0.0) == (fa < 0.0)) { a = mid; fa = fm; }
                else b = mid;
            }
            rs.roots.push_back(0.5 * (a + b));
        }
        if (i > 0 && i + 1 < npts) {
            double l = std::abs(vs[i - 1]), c = std::abs(vs[i]), r = std::abs(vs[i + 1]);
            bool same = (vs[i - 1] < 0.0) == (vs[i] < 0.0) && (vs[i] < 0.0) == (vs[i + 1] < 0.0);
            double slope = std::max(std::abs(vs[i + 1] - vs[i]), std::abs(vs[i] - vs[i - 1]));
            if (same && c < l && c < r && c < 4.0 * slope) {
                double a = xs[i - 1], b = xs[i + 1];
                for (int it = 0; it < 100; ++it) {
                    double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
                    if (std::abs(g(m1)) < std::abs(g(m2))) b = m2;
                    else a = m1;
                }
                double xm = 0.5 * (a + b);
                rs.suspected.push_back(xm);
                rs.suspected_residuals.push_back(std::abs(g(xm)));
            }
        }
    }
    std::sort(rs.roots.begin(), rs.roots.end());
    std::vector<double> uniq;
    for (double r : rs.roots)
        if (uniq.empty() || r - uniq.back() > mesh) uniq.push_back(r);
    rs.roots = uniq;
    for (double r : rs.roots) rs.residuals.push_back(std::abs(g(r)));
    return rs;
}

// Roots of M_{l,k}(x) = target on [lo, hi] in x.
inline RootSet find_level_set_finite(int ell, int k, double target, double lo, double hi, double mesh)
{
    return scan_roots([=](double x) { return margin_finite(x, ell, k); }, target, lo, hi, mesh);
}

// Same, scanning z with x = Theta(z); roots are returned as z values.
inline RootSet find_level_set_finite_theta(int ell, int k, double target, double zlo, double zhi, double mesh)
{
    return scan_roots([=](double z) { return margin_finite(big_theta(z), ell, k); }, target, zlo, zhi, mesh);
}

// Roots of the infinite map in the fundamental domain (1/3, 3]. The scan runs over
// theta in [-2 mesh, 1 + 2 mesh] so a root sitting on x = 3 is not lost between the two
// ends of the period; duplicates are folded back into (0, 1].
inline RootSet find_level_set_infinite(double target, double mesh = 1e-4)
{
    double zm = 3.0 * mesh / 8.0;
    auto rs = scan_roots([](double z) { return psi(z); }, target, -2 * zm, 1.0 + 2 * zm, zm);
    std::vector<double> z;
    for (double r : rs.roots) {
        double w = r - std::floor(r);
        if (w < 1e-12) w += 1.0;
        if (w > 1.0 - 1e-12) w = 1.0;
        z.push_back(w);
    }
    std::sort(z.begin(), z.end());
    RootSet out = rs;
    out.lo = 1.0 / 3.0;
    out.hi = 3.0;
    out.mesh = mesh;
    out.roots.clear();
    out.residuals.clear();
    for (double w : z) {
        double x = theta_inverse(w == 1.0 ? 0.0 : w);
        if (w == 1.0) x = 3.0;
        if (!out.roots.empty() && std::abs(x - out.roots.back()) <= mesh) continue;
        out.roots.push_back(x);
        out.residuals.push_back(std::abs(margin_series(x) - target));
    }
    out.suspected.clear();
    out.suspected_residuals.clear();
    for (double s : rs.suspected) {
        out.suspected.push_back(theta_inverse(s - std::floor(s)));
        out.suspected_residuals.push_back(std::abs(psi(s) - target));
    }
    return out;
}

// Expand fundamental-domain roots through their s-orbits into [lo, hi].
inline std::vector<double> expand_orbits(const std::vector<double>& fundamental, double lo, double hi)
{
    std::vector<double> out;
    for (double r : fundamental) {
        for (double y = r; y >= lo; y = s_fn(y)) {
            if (y <= hi) out.push_back(y);
            if (y == 0.0) break;
        }
        for (double y = s_inverse(r); y <= hi && std::isfinite(y); y = s_inverse(y))
            if (y >= lo) out.push_back(y);
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<Quadruple> enumerate_equilibria(double mina_margin, int lo, int hi, double mesh = 1e-4)
{
    require_positive(mina_margin, "enumerate_equilibria");
    auto rs = find_level_set_infinite(mina_margin, mesh);
    std::vector<Quadruple> out;
    for (double x : rs.roots) out.push_back(standard_solution(x, lo, hi));
    return out;
}

// Equilibria of the finite trail [-j-1, k+1] carrying boundary bd: roots of
// M_{j+1,k+1}(Theta(z)) = margin, each mapped onto the boundary.
inline std::vector<Quadruple> finite_equilibria(int j, int k, const BoundaryData& bd, double zmesh = 1e-3)
{
    validate(bd);
    if (j < 0 || k < 0) throw std::invalid_argument("finite_equilibria: trail needs an open-play vertex");
    double target = bd.margin();
    double zlo = std::max(-9.5, -(j + 4.0)), zhi = std::min(9.5, k + 4.0);
    auto rs = find_level_set_finite_theta(j + 1, k + 1, target, zlo, zhi, zmesh);
    std::vector<Quadruple> out;
    for (double z : rs.roots) out.push_back(fit_boundary(finite_standard_solution(big_theta(z), j, k), bd));
    return out;
}

// Equilibrium on the trail [lo, hi] (any position) with battlefield nearest the trail's middle.
inline std::optional<Quadruple> trail_equilibrium(int lo, int hi, const BoundaryData& bd)
{
    int open = hi - lo - 1;
    if (open < 1) throw std::invalid_argument("trail_equilibrium: trail needs an open-play vertex");
    int j = std::clamp(-lo - 1, 0, open - 1), k = open - 1 - j;
    int off = lo + 1 + j;  // vertex v is index v - off of the solution
    std::optional<Quadruple> best;
    double best_d = 0.0, mid = 0.5 * (lo + hi);
    for (auto& q : finite_equilibria(j, k, bd)) {
        int bf = 0;
        try {
            bf = phi_view(q).battlefield;
        } catch (const std::range_error&) {
            continue;
        }
        double d = std::abs(bf + off - mid);
        if (!best || d < best_d) {
            best = shift(q, -off);
            best_d = d;
        }
    }
    return best;
}

} // namespace lp
