#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "abmn.hpp"

namespace lp {

struct DabmnRow {
    std::vector<double> a, b;  // open play [-K, K]
    std::vector<double> m, n;  // trail [-K-1, K+1]
};

// One backward step from payoff rows at time j+1 (trail [-K-1, K+1]) to time j.
inline DabmnRow dabmn_step(const std::vector<double>& m_next, const std::vector<double>& n_next)
{
    if (m_next.size() != n_next.size() || m_next.size() < 3) throw std::invalid_argument("dabmn_step: rows must share a trail of >= 3 vertices");
    int V = static_cast<int>(m_next.size()), K = (V - 3) / 2;
    DabmnRow r;
    r.m = m_next;
    r.n = n_next;
    for (int k = 1; k + 1 < V; ++k) {
        double M = m_next[k + 1] - m_next[k - 1], N = n_next[k - 1] - n_next[k + 1];
        if (!(M > 0.0) || !(N > 0.0))
            throw std::domain_error("dabmn_step: payoff gaps not positive at vertex " + std::to_string(k - K - 1));
        double p = M / (M + N), q = N / (M + N);
        r.a.push_back(M * p * q);
        r.b.push_back(N * p * q);
        r.m[k] = m_next[k - 1] + M * p * p;
        r.n[k] = n_next[k + 1] + N * q * q;
    }
    return r;
}

struct DynamicSheet {
    int K = 0, T = 0;
    BoundaryData boundary;
    std::vector<double> m_ter, n_ter;
    std::vector<DabmnRow> rows;      // rows[j], j in [0, T]; row T holds only m, n
    std::vector<double> convergence; // sup |(m,n)(j) - (m,n)(j+1)| for j in [0, T-1]

    double a(int i, int j) const { return rows[j].a[i + K]; }
    double b(int i, int j) const { return rows[j].b[i + K]; }
    double m(int i, int j) const { return rows[j].m[i + K + 1]; }
    double n(int i, int j) const { return rows[j].n[i + K + 1]; }
};

// Terminal payoffs on [-K-1, K+1]. The one-step increments dm_k = m_{k+1} - m_k and
// dn_k = n_k - n_{k+1} are kept separately in long double so presets can supply gaps far
// below the rounding of the absolute values.
struct Terminal2 {
    std::vector<double> m, n;
    std::vector<long double> dm, dn;
};

inline Terminal2 make_terminal(std::vector<double> m, std::vector<double> n)
{
    if (m.size() != n.size() || m.size() < 3 || m.size() % 2 == 0)
        throw std::invalid_argument("terminal rows must cover a symmetric trail [-K-1, K+1]");
    Terminal2 t;
    for (size_t k = 0; k + 1 < m.size(); ++k) {
        t.dm.push_back(static_cast<long double>(m[k + 1]) - m[k]);
        t.dn.push_back(static_cast<long double>(n[k]) - n[k + 1]);
    }
    t.m = std::move(m);
    t.n = std::move(n);
    return t;
}

// Backward induction over T turns. The recursion is carried on the two-step gaps
// M_i = m_{i+1} - m_{i-1}, N_i = n_{i-1} - n_{i+1} (plus the four edge gaps) in long
// double: these stay positive for ever, whereas absolute payoffs lose the tiny plateau
// gaps to rounding within a few hundred steps. With p = M/(M+N), q = N/(M+N):
//   m_i(j) = m_{i-1}(j+1) + M p^2 = m_{i+1}(j+1) - M q (1+p)
//   n_i(j) = n_{i+1}(j+1) + N q^2 = n_{i-1}(j+1) - N p (1+q)
inline DynamicSheet dabmn_evolve(const Terminal2& ter, int T)
{
    using R = long double;
    const auto& m_ter = ter.m;
    const auto& n_ter = ter.n;
    if (m_ter.size() != n_ter.size() || m_ter.size() < 3 || m_ter.size() % 2 == 0 || ter.dm.size() + 1 != m_ter.size() ||
        ter.dn.size() + 1 != m_ter.size())
        throw std::invalid_argument("dabmn_evolve: terminal rows must cover a symmetric trail [-K-1, K+1]");
    if (T <= 0) throw std::invalid_argument("dabmn_evolve: horizon must be positive");
    int V = static_cast<int>(m_ter.size()), K = (V - 3) / 2, W = 2 * K + 1;

    std::vector<R> M(W), N(W), m(m_ter.begin(), m_ter.end()), n(n_ter.begin(), n_ter.end());
    for (int k = 0; k < W; ++k) {
        M[k] = ter.dm[k] + ter.dm[k + 1];
        N[k] = ter.dn[k] + ter.dn[k + 1];
        if (!(M[k] > 0) || !(N[k] > 0))
            throw std::domain_error("dabmn_evolve: terminal gaps not positive at vertex " + std::to_string(k - K));
    }
    R uL = ter.dm[0], uR = ter.dm[V - 2], vL = ter.dn[0], vR = ter.dn[V - 2];

    DynamicSheet sh;
    sh.K = K;
    sh.T = T;
    sh.m_ter = m_ter;
    sh.n_ter = n_ter;
    sh.boundary = {m_ter.front(), m_ter.back(), n_ter.front(), n_ter.back(), m_ter.front(), n_ter.back()};
    sh.rows.resize(static_cast<size_t>(T) + 1);
    sh.rows[T].m = m_ter;
    sh.rows[T].n = n_ter;
    sh.convergence.assign(static_cast<size_t>(T), 0.0);

    std::vector<R> A(W), B(W), An(W), Bn(W), Mn(W), Nn(W), mn(V), nn(V);
    for (int j = T - 1; j >= 0; --j) {
        auto& row = sh.rows[j];
        row.a.resize(W);
        row.b.resize(W);
        for (int k = 0; k < W; ++k) {
            R s = M[k] + N[k], p = M[k] / s, q = N[k] / s;
            row.a[k] = static_cast<double>(M[k] * p * q);
            row.b[k] = static_cast<double>(N[k] * p * q);
            A[k] = M[k] * p * p;
            B[k] = M[k] * q * (1 + p);
            An[k] = N[k] * q * q;
            Bn[k] = N[k] * p * (1 + q);
        }
        mn[0] = m[0];
        mn[V - 1] = m[V - 1];
        nn[0] = n[0];
        nn[V - 1] = n[V - 1];
        for (int k = 0; k < W; ++k) {
            mn[k + 1] = m[k] + A[k];
            nn[k + 1] = n[k + 2] + An[k];
        }
        if (K == 0) {
            Mn[0] = M[0];
            Nn[0] = N[0];
        } else {
            for (int k = 1; k + 1 < W; ++k) {
                Mn[k] = A[k + 1] + B[k - 1];
                Nn[k] = An[k - 1] + Bn[k + 1];
            }
            Mn[0] = uL + A[1];
            Nn[0] = vL + Bn[1];
            Mn[W - 1] = uR + B[W - 2];
            Nn[W - 1] = vR + An[W - 2];
            uL = A[0];
            uR = B[W - 1];
            vL = Bn[0];
            vR = An[W - 1];
        }
        R diff = 0;
        for (int k = 0; k < V; ++k) diff = std::max({diff, std::abs(mn[k] - m[k]), std::abs(nn[k] - n[k])});
        sh.convergence[j] = static_cast<double>(diff);
        M.swap(Mn);
        N.swap(Nn);
        m = mn;
        n = nn;
        row.m.assign(m.begin(), m.end());
        row.n.assign(n.begin(), n.end());
    }
    return sh;
}

inline DynamicSheet dabmn_evolve(const std::vector<double>& m_ter, const std::vector<double>& n_ter, int T)
{
    return dabmn_evolve(make_terminal(m_ter, n_ter), T);
}

// Max |dABMN(1-4)| residual linking rows j and j+1.
inline double dabmn_residual(const DynamicSheet& sh, int j)
{
    double worst = 0.0;
    for (int i = -sh.K; i <= sh.K; ++i) {
        double a = sh.a(i, j), b = sh.b(i, j), s = a + b;
        double e1 = s * (sh.m(i, j) + a) - (a * sh.m(i + 1, j + 1) + b * sh.m(i - 1, j + 1));
        double e2 = s * (sh.n(i, j) + b) - (a * sh.n(i + 1, j + 1) + b * sh.n(i - 1, j + 1));
        double e3 = s * s - b * (sh.m(i + 1, j + 1) - sh.m(i - 1, j + 1));
        double e4 = s * s - a * (sh.n(i - 1, j + 1) - sh.n(i + 1, j + 1));
        worst = std::max({worst, std::abs(e1), std::abs(e2), std::abs(e3), std::abs(e4)});
    }
    return worst;
}

// Local maxima of a row that reach `frac` of the row maximum; ends count against their one neighbour.
inline int significant_peaks(const std::vector<double>& a, double frac = 0.01)
{
    if (a.empty()) return 0;
    double mx = *std::max_element(a.begin(), a.end());
    int c = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        bool left = i == 0 || a[i] > a[i - 1];
        bool right = i + 1 == a.size() || a[i] > a[i + 1];
        c += left && right && a[i] >= frac * mx;
    }
    return c;
}

// Two-battlefield terminal on [-H, H]: m climbs to a plateau at 1/2 near -rise and again
// to 1 near +rise, n is its mirror image. Endpoints pinned to (0, 1) and (1, 0).
inline Terminal2 plateau_terminal(int H, double steepness = 6.0, int rise = -1)
{
    using R = long double;
    if (H < 2) throw std::invalid_argument("plateau_terminal: need H >= 2");
    if (rise < 0) rise = H - 1;
    R w = steepness;
    auto sig = [](R t) { return 1 / (1 + std::exp(-t)); };
    // sig(u) - sig(v) without cancellation
    auto dsig = [](R u, R v) { return std::sinh((u - v) / 2) / (2 * std::cosh(u / 2) * std::cosh(v / 2)); };
    auto val = [&](int i) { return R(0.5) * sig(w * (i + rise)) + R(0.5) * sig(w * (i - rise)); };
    Terminal2 t;
    t.m.push_back(0.0);
    for (int i = -H + 1; i < H; ++i) t.m.push_back(static_cast<double>(val(i)));
    t.m.push_back(1.0);
    t.dm.push_back(val(-H + 1));
    for (int i = -H + 1; i < H - 1; ++i)
        t.dm.push_back(R(0.5) * dsig(w * (i + 1 + rise), w * (i + rise)) + R(0.5) * dsig(w * (i + 1 - rise), w * (i - rise)));
    t.dm.push_back(R(0.5) * sig(-w * (H - 1 + rise)) + R(0.5) * sig(-w * (H - 1 - rise)));
    t.n.assign(t.m.rbegin(), t.m.rend());
    t.dn.assign(t.dm.rbegin(), t.dm.rend());
    return t;
}

// Linear terminal on [-H, H]; for H = 1 this is Penny Forfeit with boundary (0, 1, 1, 0).
inline Terminal2 penny_terminal(int H)
{
    if (H < 1) throw std::invalid_argument("penny_terminal: need H >= 1");
    std::vector<double> m, n;
    for (int i = -H; i <= H; ++i) {
        m.push_back((i + H) / (2.0 * H));
        n.push_back((H - i) / (2.0 * H));
    }
    return make_terminal(m, n);
}

// Finite standard solution with central ratio x on [-H, H].
inline Terminal2 static_terminal(int H, double x)
{
    if (H < 1) throw std::invalid_argument("static_terminal: need H >= 1");
    auto q = finite_standard_solution(x, H - 1, H - 1);
    Terminal2 t;
    for (int i = -H; i <= H; ++i) {
        t.m.push_back(q.m[i]);
        t.n.push_back(q.n[i]);
    }
    for (int i = -H; i < H; ++i) {
        t.dm.push_back(q.dm[i + 1]);
        t.dn.push_back(q.dn[i + 1]);
    }
    return t;
}

// A-system A_{-i-1}(2A_i + A_{-i}) = A_{i+1}^2 on Z (key i is A_i) or Z + 1/2 (key i is A_{i+1/2}).
enum class Lattice { integer, half };

struct ASystemSolution {
    Lattice lattice = Lattice::integer;
    double scale = 1.0;
    Seq values;

    // value at lattice point t (t integer, or t = key + 1/2)
    double at_key(int key) const { return values[key]; }
};

// Paired outward step. From I+(2 O- + O+) = I-^2 and O-(2 I+ + I-) = O+^2, with
// beta = (2 I+ + I-)/2 and R = I-^2/I+: O+^2 + beta O+ - beta R = 0 and O- = O+^2/(2 beta).
inline std::pair<double, double> a_system_outward(double i_plus, double i_minus)
{
    if (!(i_plus >= 0.0) || !(i_minus >= 0.0)) throw std::domain_error("a_system: inputs must be non-negative");
    if (i_plus == 0.0 || i_minus == 0.0) return {0.0, 0.0};  // tail already underflowed
    double beta = 0.5 * (2.0 * i_plus + i_minus);
    double R = i_minus / i_plus * i_minus;
    double gamma = beta * R;
    double o_plus = 2.0 * gamma / (beta + std::sqrt(beta * beta + 4.0 * gamma));
    double o_minus = o_plus / (2.0 * beta) * o_plus;
    return {o_plus, o_minus};
}

inline ASystemSolution a_system_solve(Lattice lattice, double lam, int half_width)
{
    require_positive(lam, "a_system_solve");
    if (half_width < 1) throw std::invalid_argument("a_system_solve: half_width must be >= 1");
    ASystemSolution s;
    s.lattice = lattice;
    s.scale = lam;
    if (lattice == Lattice::integer) {
        s.values = Seq(-half_width, half_width);
        // 3 a_{-1} = a_1^2 / lam and 2 a_{-1} + a_1 = lam
        double a1 = lam * (std::sqrt(33.0) - 3.0) / 4.0;
        s.values[0] = lam;
        s.values[1] = a1;
        s.values[-1] = (lam - a1) / 2.0;
        for (int k = 1; k < half_width; ++k) {
            auto [op, om] = a_system_outward(s.values[k], s.values[-k]);
            s.values[k + 1] = op;
            s.values[-k - 1] = om;
        }
    } else {
        // keys -half_width-1 .. half_width cover |t| <= half_width + 1/2
        s.values = Seq(-half_width - 1, half_width);
        s.values[-1] = lam;          // A_{-1/2}
        s.values[0] = 2.0 * lam;     // A_{1/2} from 2 + A = A^2 at lam = 1
        for (int k = 1; k <= half_width; ++k) {
            auto [op, om] = a_system_outward(s.values[k - 1], s.values[-k]);
            s.values[k] = op;        // A_{k+1/2}
            s.values[-k - 1] = om;   // A_{-k-1/2}
        }
    }
    return s;
}

// Residual of the A-system at each equation whose indices all lie in the window.
inline double a_system_residual(const ASystemSolution& s)
{
    double worst = 0.0;
    const Seq& v = s.values;
    auto A = [&](int key) { return v[key]; };
    if (s.lattice == Lattice::integer) {
        for (int i = v.first; i <= v.last(); ++i) {
            if (!v.has(-i - 1) || !v.has(-i) || !v.has(i + 1)) continue;
            worst = std::max(worst, std::abs(A(-i - 1) * (2.0 * A(i) + A(-i)) - A(i + 1) * A(i + 1)));
        }
    } else {
        // equation at t = key + 1/2: A_{-t-1} = key -key-2, A_{-t} = key -key-1, A_{t+1} = key key+1
        for (int key = v.first; key <= v.last(); ++key) {
            if (!v.has(-key - 2) || !v.has(-key - 1) || !v.has(key + 1)) continue;
            worst = std::max(worst, std::abs(A(-key - 2) * (2.0 * A(key) + A(-key - 1)) - A(key + 1) * A(key + 1)));
        }
    }
    return worst;
}

struct SymmetricReport {
    double reflect3 = 0.0;      // max |a_i - b_{-i}| at x = 3
    double reflect1 = 0.0;      // max |a_i - b_{-1-i}| at x = 1
    double a_system3 = 0.0;     // A-system residual of a(3) on Z
    double a_system1 = 0.0;     // and of a(1) on Z + 1/2
    double match3 = 0.0;        // vs a_system_solve with lam = a_0(3)
    double match1 = 0.0;        // vs a_system_solve with lam = a_{-1}(1)
    double am3 = 0.0, am1 = 0.0;  // m_i - m_{i-1} = a_i^2 / a_{Q-i}
    double lam3 = 0.0, lam1 = 0.0;
};

inline SymmetricReport symmetric_crosscheck(int W)
{
    SymmetricReport r;
    auto q3 = standard_solution(3.0, -W - 2, W + 2);
    auto q1 = standard_solution(1.0, -W - 2, W + 2);
    for (int i = -W; i <= W; ++i) {
        r.reflect3 = std::max(r.reflect3, std::abs(q3.a[i] - q3.b[-i]));
        r.reflect1 = std::max(r.reflect1, std::abs(q1.a[i] - q1.b[-1 - i]));
    }
    ASystemSolution s3{Lattice::integer, q3.a[0], Seq(-W, W)};
    ASystemSolution s1{Lattice::half, q1.a[-1], Seq(-W - 1, W)};
    for (int i = -W; i <= W; ++i) s3.values[i] = q3.a[i];
    for (int k = -W - 1; k <= W; ++k) s1.values[k] = q1.a[k];
    r.a_system3 = a_system_residual(s3);
    r.a_system1 = a_system_residual(s1);
    r.lam3 = q3.a[0];
    r.lam1 = q1.a[-1];
    auto z3 = a_system_solve(Lattice::integer, r.lam3, W);
    auto z1 = a_system_solve(Lattice::half, r.lam1, W);
    for (int i = -W; i <= W; ++i) r.match3 = std::max(r.match3, std::abs(z3.values[i] - q3.a[i]));
    for (int k = -W - 1; k <= W; ++k) r.match1 = std::max(r.match1, std::abs(z1.values[k] - q1.a[k]));
    for (int i = -W + 1; i <= W - 1; ++i) {
        if (q3.a[-i] > 0.0) r.am3 = std::max(r.am3, std::abs(q3.dm[i] - q3.a[i] * q3.a[i] / q3.a[-i]));
        if (q1.a[-1 - i] > 0.0) r.am1 = std::max(r.am1, std::abs(q1.dm[i] - q1.a[i] * q1.a[i] / q1.a[-1 - i]));
    }
    return r;
}

} // namespace lp
