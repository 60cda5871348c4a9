// Acceptance suite: one PASS/FAIL line per criterion, details indented below it.
// Exit status counts unexpected outcomes: a FAIL not listed in kKnownFailures, or a
// listed criterion that unexpectedly passes.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "lostpennies/certified.hpp"
#include "lostpennies/dynamics.hpp"
#include "lostpennies/engine.hpp"
#include "lostpennies/margin.hpp"

using namespace lp;

namespace {

// Criteria whose published targets this implementation does not reproduce; the
// analysis is in the decisions ledger and the README.
const std::set<std::string> kKnownFailures = {"roots"};

int unexpected = 0;
std::vector<std::string> detail;

void note(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void note(const char* fmt, ...)
{
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    detail.emplace_back(buf);
}

void report(const std::string& name, bool ok)
{
    bool known = kKnownFailures.count(name) > 0;
    std::printf("%s %s%s\n", ok ? "PASS" : "FAIL", name.c_str(), !ok && known ? " (known, see ledger)" : "");
    for (const auto& d : detail) std::printf("    %s\n", d.c_str());
    detail.clear();
    if (ok == known) ++unexpected;
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> log_spaced(double lo, double hi, int n)
{
    std::vector<double> xs;
    for (int t = 0; t < n; ++t) xs.push_back(std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * t / (n - 1)));
    return xs;
}

void certified_tables()
{
    auto t0 = std::chrono::steady_clock::now();
    auto r = cert::certify();
    double secs = seconds_since(t0);
    long bad = 0;
    for (const auto& c : r.table_checks) bad += !c.ok;
    note("table cells: %zu checked, %ld mismatched", r.table_checks.size(), bad);
    note("interval [%s, %s], runtime %.3f s", r.interval.lo.str().c_str(), r.interval.hi.str().c_str(), secs);
    note("directed-rounding interval [%s, %s]", r.rigorous_interval.lo.str().c_str(), r.rigorous_interval.hi.str().c_str());
    report("certified-tables", r.table_checks.size() == 48 && bad == 0 && r.interval_ok && secs < 1.0);
}

void lambda_bound()
{
    auto r = cert::certify();
    const auto& p = r.tabulated_chain;
    const auto& q = r.rigorous_chain;
    note("tail bound (4,5) <= 6.3e-7: %s; hi + 6.3e-7 <= 0.9999038338: %s; lambda <= 0.999904: %s", p.rkrell_le_63e8 ? "yes" : "no",
         p.margin_bound_ok ? "yes" : "no", p.lambda_ok ? "yes" : "no");
    note("same chain from the directed interval: %s", q.lambda_ok && q.margin_bound_ok ? "holds" : "fails");
    report("lambda-bound", r.lambda_ok());
}

void symmetry_identities()
{
    auto t0 = std::chrono::steady_clock::now();
    double e_fix = 0.0, e_kk = 0.0, e_k1 = 0.0;
    for (int k = 1; k <= 5; ++k) {
        e_fix = std::max(e_fix, std::abs(margin_finite(3.0, k, k) - 1.0));
        e_fix = std::max(e_fix, std::abs(margin_finite(1.0, k + 1, k) - 1.0));
        for (long t = 0;; ++t) {
            double x = 1.0 / 3.0 + t * 1e-3;
            if (x > 3.0) break;
            e_kk = std::max(e_kk, std::abs(margin_finite(x, k, k) * margin_finite(1.0 / s_fn(x), k, k) - 1.0));
            e_k1 = std::max(e_k1, std::abs(margin_finite(x, k + 1, k) * margin_finite(1.0 / x, k + 1, k) - 1.0));
        }
    }
    double secs = seconds_since(t0);
    note("fixed points %.3g, M_kk product %.3g, M_k+1,k product %.3g, runtime %.2f s", e_fix, e_kk, e_k1, secs);
    report("symmetry-identities", e_fix <= 1e-10 && e_kk <= 1e-9 && e_k1 <= 1e-9 && secs < 10.0);
}

void roots()
{
    auto r33 = find_level_set_finite(3, 3, 1.0, 0.5, 10.0, 1e-3);
    bool ok33 = r33.roots.size() == 3;
    std::string list;
    for (double r : r33.roots) list += " " + std::to_string(r);
    note("M_3,3 = 1 roots:%s", list.c_str());
    if (ok33) {
        double d1 = std::abs(r33.roots[0] - 1.63), d2 = std::abs(r33.roots[1] - 3.0), d3 = std::abs(r33.roots[2] - 5.64);
        note("|r1 - 1.63| = %.3g, |r2 - 3| = %.3g, |r3 - 5.64| = %.3g", d1, d2, d3);
        ok33 = d1 <= 0.01 && d2 <= 1e-9 && d3 <= 0.01;
    }
    // x spans many orders of magnitude here, so scan z with x = Theta(z)
    auto r66 = find_level_set_finite_theta(6, 6, 1.0 + 1e-4, 0.0, 8.0, 1e-3);
    bool ok66 = r66.roots.size() == 1 && std::abs(r66.roots[0] - 4.04493) <= 1e-4;
    list.clear();
    for (double r : r66.roots) list += " " + std::to_string(r);
    note("M_6,6(Theta(z)) = 1 + 1e-4 roots in z:%s", list.c_str());
    if (!r66.roots.empty()) note("Theta(root) = %.6g; M_6,5(Theta(4.04493)) = %.9f", big_theta(r66.roots[0]), margin_finite(big_theta(4.04493), 6, 5));
    report("roots", ok33 && ok66);
}

void solution_residuals()
{
    double res = 0.0, cf = 0.0, zsum = 0.0;
    for (double x : log_spaced(0.01, 100.0, 50)) {
        auto d = default_solution(x, -20, 20);
        auto s = standard_solution(x, -20, 20);
        res = std::max({res, max_residual(d), max_residual(s)});
        for (int i = -20; i <= 20; ++i) {
            double y = s_orbit(x, 0);
            for (int t = 0; t < i && y > 0.0; ++t) y = s_step(y, +1);
            for (int t = 0; t > i && !std::isinf(y); --t) y = s_step(y, -1);
            if (y == 0.0 || std::isinf(y)) continue;
            auto c = standard_closed_form(y);
            cf = std::max({cf, std::abs(c.a - s.a[i]), std::abs(c.b - s.b[i]), std::abs(c.dm - s.dm[i]), std::abs(c.dn - s.dn[i])});
        }
        // sum over the whole orbit; terms vanish once the orbit reaches 0 or infinity
        double sum = 0.0, y = x;
        for (int t = 0; t < 200 && y > 0.0; ++t, y = s_step(y, +1)) sum += std::exp(-log_Z(y));
        y = s_step(x, -1);
        for (int t = 0; t < 200 && !std::isinf(y); ++t, y = s_step(y, -1)) sum += std::exp(-log_Z(y));
        zsum = std::max(zsum, std::abs(sum - 1.0));
    }
    note("max ABMN residual %.3g, closed form vs product %.3g, |sum 1/Z - 1| %.3g", res, cf, zsum);
    report("solution-residuals", res <= 1e-9 && cf <= 1e-9 && zsum <= 1e-8);
}

void decay_battlefield()
{
    double lo = kInf, hi = -kInf;
    int missing = 0;
    for (double x : log_spaced(0.01, 100.0, 50)) {
        for (const auto& q : {default_solution(x, -20, 20), standard_solution(x, -20, 20)}) {
            auto pv = phi_view(q);
            int k = pv.battlefield;
            auto g = [&](int i) -> double {
                if (!pv.phi.has(k + i) || std::isnan(pv.phi[k + i])) return kNaN;
                return std::log2(-std::log(pv.phi[k + i] / 2.0));
            };
            for (int i = 2; i <= 5; ++i) {
                double inc = g(i + 1) - g(i);
                if (std::isnan(inc)) {
                    ++missing;
                    continue;
                }
                lo = std::min(lo, inc);
                hi = std::max(hi, inc);
            }
        }
    }
    note("increments of log2(-log(phi_{k+i}/2)), 2 <= i <= 6: [%.4f, %.4f], %d unavailable", lo, hi, missing);
    bool ok = missing == 0 && lo >= 0.9 && hi <= 1.1;

    auto rs = find_level_set_infinite(1.0, 1e-3);
    for (double x : rs.roots) {
        auto q = standard_solution(x, -20, 20);
        int k = phi_view(q).battlefield;
        note("M(x) = 1 at x = %.9f: battlefield %d, a_k = %.6f, b_k = %.6f", x, k, q.a[k], q.b[k]);
        ok = ok && q.a[k] >= 0.12 && q.a[k] <= 0.20 && q.b[k] >= 0.025 && q.b[k] <= 0.18;
    }
    ok = ok && rs.roots.size() == 2;
    report("decay-battlefield", ok);
}

void oracle_equivalence()
{
    bool ok = true;
    double e_exact = 0.0;
    for (double x : {0.2, 0.58, 1.0, 3.0, 4.04493, 25.0})
        for (int j = 1; j <= 6; ++j)
            for (int k = 1; k <= 6; ++k) {
                auto q = finite_standard_solution(x, j, k);
                auto r = exact_payoffs(q.lo - 1, q.hi + 1, q.a, q.b, q.boundary);
                for (int i = q.lo; i <= q.hi; ++i) e_exact = std::max({e_exact, std::abs(r.m[i] - q.m[i]), std::abs(r.n[i] - q.n[i])});
            }
    note("tridiagonal solve vs closed-form m, n: %.3g", e_exact);
    ok = ok && e_exact <= 1e-9;

    auto q = finite_standard_solution(3.0, 3, 3);
    GameConfig cfg;
    cfg.lo = q.lo - 1;
    cfg.hi = q.hi + 1;
    cfg.boundary = q.boundary;
    cfg.seed = 20240;
    const long runs = 100000;
    auto games = simulate_batch(cfg, nash_strategy(q, Side::mina), nash_strategy(q, Side::maxine), runs);
    auto exact = exact_payoffs(cfg.lo, cfg.hi, q.a, q.b, q.boundary);
    for (bool plus : {true, false}) {
        double s1 = 0.0, s2 = 0.0;
        for (const auto& g : games) {
            double v = plus ? g.payoff_plus : g.payoff_minus;
            s1 += v;
            s2 += v * v;
        }
        double mean = s1 / runs, sd = std::sqrt(std::max(0.0, s2 / runs - mean * mean)), se = sd / std::sqrt(double(runs));
        double target = plus ? exact.m[0] : exact.n[0];
        note("Monte Carlo %s payoff %.6f vs exact %.6f: %.2f sigma", plus ? "Maxine" : "Mina", mean, target, std::abs(mean - target) / se);
        ok = ok && std::abs(mean - target) <= 3.0 * se;
    }

    // Penny Forfeit: payoffs a M/(a+b) - a and b N/(a+b) - b on a 200 x 200 stake grid
    double worst = 0.0, fixed = 0.0;
    for (auto [M, N] : std::vector<std::pair<double, double>>{{1.0, 1.0}, {1.0, 3.0}, {0.2, 5.0}, {7.0, 0.5}}) {
        auto st = penny_forfeit(M, N);
        const int G = 200;
        double ha = 2.0 * st.a / (G - 1), hb = 2.0 * st.b / (G - 1);
        auto up = [&](double a, double b) { return a + b > 0.0 ? a * M / (a + b) - a : 0.5 * M; };
        auto um = [&](double a, double b) { return a + b > 0.0 ? b * N / (a + b) - b : 0.5 * N; };
        for (int j = 0; j < G; ++j) {
            double b = j * hb, best = -kInf;
            int arg = 0;
            for (int i = 0; i < G; ++i)
                if (double v = up(i * ha, b); v > best) best = v, arg = i;
            double br = std::max(0.0, std::sqrt(b * M) - b);  // closed-form best reply, clipped to the grid
            worst = std::max(worst, std::abs(arg * ha - std::min(br, 2.0 * st.a)) / ha);
        }
        for (int i = 0; i < G; ++i) {
            double a = i * ha, best = -kInf;
            int arg = 0;
            for (int j = 0; j < G; ++j)
                if (double v = um(a, j * hb); v > best) best = v, arg = j;
            double br = std::max(0.0, std::sqrt(a * N) - a);
            worst = std::max(worst, std::abs(arg * hb - std::min(br, 2.0 * st.b)) / hb);
        }
        fixed = std::max({fixed, std::abs(std::sqrt(st.b * M) - st.b - st.a), std::abs(std::sqrt(st.a * N) - st.a - st.b)});
    }
    note("Penny Forfeit: grid argmax vs closed-form reply within %.3f grid steps, fixed-point error %.3g", worst, fixed);
    ok = ok && worst <= 1.0 && fixed <= 1e-12;
    report("oracle-equivalence", ok);
}

void nash_deviation()
{
    double min_margin = kInf, max_gain = -kInf;
    long checked = 0, skipped = 0;
    for (double x : {0.2, 0.58, 1.0, 3.0, 4.04493, 25.0})
        for (int j = 1; j <= 10; ++j)
            for (int k = 1; j + k + 2 <= 13; ++k) {
                auto q = finite_standard_solution(x, j, k);
                for (Side s : {Side::mina, Side::maxine})
                    for (int v = q.lo; v <= q.hi; ++v)
                        for (const auto& d : deviation_check(q, v, s, {0.5, 0.9, 1.1, 2.0})) {
                            for (int i = d.delta.first; i <= d.delta.last(); ++i) max_gain = std::max(max_gain, d.delta[i]);
                            // stakes below 1e-5 move payoffs by less than 1e-10 under any rescale
                            if ((s == Side::maxine ? q.a[v] : q.b[v]) < 1e-5) {
                                ++skipped;
                                continue;
                            }
                            ++checked;
                            min_margin = std::min(min_margin, -d.delta[v]);
                        }
            }
    note("%ld deviations checked at the deviation vertex, min payoff loss %.3g; %ld at stakes < 1e-5", checked, min_margin, skipped);
    note("largest payoff change anywhere %.3g", max_gain);
    report("nash-deviation", checked > 0 && min_margin >= 1e-10 && max_gain <= 1e-15);
}

void a_system()
{
    double res = 0.0, scale = 0.0;
    for (auto L : {Lattice::integer, Lattice::half}) {
        auto s = a_system_solve(L, 1.0, 10);
        res = std::max(res, a_system_residual(s));
        for (double lam : {0.01, 0.37, 5.0}) {
            auto t = a_system_solve(L, lam, 10);
            res = std::max(res, a_system_residual(t) / lam);
            for (int k = s.values.first; k <= s.values.last(); ++k) scale = std::max(scale, std::abs(t.values[k] - lam * s.values[k]) / lam);
        }
    }
    auto c = symmetric_crosscheck(10);
    double refl = std::max({c.reflect3, c.reflect1, c.match3, c.match1});
    note("residual %.3g, scaling %.3g, vs standard_solution(3), (1): %.3g", res, scale, refl);
    report("a-system", res <= 1e-12 && scale <= 1e-12 && refl <= 1e-8);
}

void dabmn()
{
    auto t = static_terminal(5, 2.0);
    auto q = finite_standard_solution(2.0, 4, 4);
    auto sh = dabmn_evolve(t, 50);
    double fix = 0.0;
    for (int j = 0; j < 50; ++j)
        for (int i = -4; i <= 4; ++i) fix = std::max({fix, std::abs(sh.a(i, j) - q.a[i]), std::abs(sh.b(i, j) - q.b[i])});

    auto t0 = std::chrono::steady_clock::now();
    auto run = dabmn_evolve(plateau_terminal(8), 4200);
    double secs = seconds_since(t0);
    int first_one = -1, before = -1;
    for (int j = 4199; j >= 0; --j) {
        int p = significant_peaks(run.rows[j].a);
        if (p == 1 && first_one < 0) first_one = j, before = significant_peaks(run.rows[j + 1].a);
    }
    int start = significant_peaks(run.rows[4199].a), end = significant_peaks(run.rows[0].a);
    note("static fixed point %.3g; plateau K=8 T=4200: peaks %d at j=4199, first single peak at j=%d (after %d), %d at j=0; %.2f s", fix,
         start, first_one, before, end, secs);
    report("dabmn", fix <= 1e-12 && start == 2 && before == 2 && first_one > 0 && end == 1 && secs < 30.0);
}

} // namespace

int main()
{
    certified_tables();
    lambda_bound();
    symmetry_identities();
    roots();
    solution_residuals();
    decay_battlefield();
    oracle_equivalence();
    nash_deviation();
    a_system();
    dabmn();
    std::printf("%d unexpected outcome(s)\n", unexpected);
    return unexpected == 0 ? 0 : 1;
}
