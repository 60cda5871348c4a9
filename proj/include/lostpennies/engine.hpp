#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "abmn.hpp"

namespace lp {

// splitmix64 finalizer; the game draw for (seed, turn) is a pure function of both.
inline uint64_t mix64(uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed) {}
    uint64_t next() { return mix64(state++ * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL); }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    Rng split(uint64_t index) const { return Rng(mix64(state ^ mix64(index + 0x2545f4914f6cdd1dULL))); }
};

inline uint64_t derive_seed(uint64_t master, uint64_t index) { return Rng(master).split(index).state; }

// One draw for turn t of the game seeded with `seed`.
inline double turn_draw(uint64_t seed, long turn)
{
    Rng r = Rng(seed).split(static_cast<uint64_t>(turn));
    return r.uniform();
}

enum class Side { mina, maxine };

inline const char* to_string(Side s) { return s == Side::mina ? "mina" : "maxine"; }

// Maxine wins with probability a/(a+b), 0/0 read as 1/2.
inline bool maxine_wins(double a, double b, double u)
{
    if (a < 0.0 || b < 0.0) throw std::domain_error("resolve_turn: negative stake");
    double p = a + b > 0.0 ? a / (a + b) : 0.5;
    return u < p;
}

inline Side resolve_turn(double a, double b, Rng& rng) { return maxine_wins(a, b, rng.uniform()) ? Side::maxine : Side::mina; }

enum class StrategyKind { table, nash, zero, bully, tit_for_tat };

// What a strategy may see before staking at a turn: the opponent's stakes so far.
struct TurnContext {
    long turn = 1;
    double opponent_last = 0.0;
    bool has_last = false;
};

struct Strategy {
    StrategyKind kind = StrategyKind::zero;
    std::map<int, double> table;  // vertex -> stake, absent vertices stake 0
    double cen_ratio = kNaN;      // nash descriptor
    int shift = 0;
    double epsilon = 0.0;         // bully
    double multiplier = 2.0;
    double threshold = 0.0;       // tit_for_tat: provoked when the opponent's last-game total exceeded this
    bool provoked = false;

    double stake(int vertex, const TurnContext& ctx) const
    {
        switch (kind) {
        case StrategyKind::zero: return 0.0;
        case StrategyKind::bully:
            return ctx.has_last && ctx.opponent_last > epsilon ? multiplier * ctx.opponent_last : epsilon;
        case StrategyKind::tit_for_tat:
            if (!provoked) return 0.0;
            [[fallthrough]];
        case StrategyKind::table:
        case StrategyKind::nash: {
            auto it = table.find(vertex);
            return it == table.end() ? 0.0 : it->second;
        }
        }
        return 0.0;
    }

    bool time_invariant() const { return kind != StrategyKind::bully; }

    static Strategy zero() { return {}; }
    static Strategy bully(double eps, double mult = 2.0)
    {
        if (eps < 0.0 || mult < 0.0) throw std::domain_error("bully: parameters must be non-negative");
        Strategy s;
        s.kind = StrategyKind::bully;
        s.epsilon = eps;
        s.multiplier = mult;
        return s;
    }
    static Strategy from_table(std::map<int, double> t)
    {
        Strategy s;
        s.kind = StrategyKind::table;
        s.table = std::move(t);
        for (auto& [v, st] : s.table)
            if (st < 0.0) throw std::domain_error("table strategy: negative stake");
        return s;
    }
};

// Side's stakes from an ABMN solution; Maxine stakes a, Mina stakes b.
inline Strategy nash_strategy(const Quadruple& q, Side side, int shift = 0)
{
    Strategy s;
    s.kind = StrategyKind::nash;
    s.cen_ratio = q.cen_ratio;
    s.shift = shift;
    const Seq& src = side == Side::maxine ? q.a : q.b;
    for (int i = src.first; i <= src.last(); ++i) s.table[i + shift] = src[i];
    return s;
}

inline Strategy tit_for_tat(const Strategy& nash, double threshold, bool provoked)
{
    Strategy s = nash;
    s.kind = StrategyKind::tit_for_tat;
    s.threshold = threshold;
    s.provoked = provoked;
    return s;
}

struct GameConfig {
    bool finite = true;
    int lo = -1, hi = 1;  // trail endpoints when finite
    BoundaryData boundary;
    int start = 0;
    uint64_t seed = 0;
    long max_turns = 100000;
    int escape_margin = 12;
    int battlefield = 0;  // centre of the escape window on infinite trails
};

inline void validate(const GameConfig& c)
{
    if (c.max_turns <= 0) throw std::invalid_argument("max_turns must be positive");
    if (c.finite && !(c.start > c.lo && c.start < c.hi)) throw std::invalid_argument("start must be strictly inside the trail");
    if (!c.finite && c.escape_margin <= 0) throw std::invalid_argument("escape_margin must be positive");
}

enum class Terminal { mina_win, maxine_win, cutoff };

inline const char* to_string(Terminal t)
{
    switch (t) {
    case Terminal::mina_win: return "mina_win";
    case Terminal::maxine_win: return "maxine_win";
    default: return "cutoff";
    }
}

struct GameRecord {
    std::vector<int> path;
    std::vector<std::pair<double, double>> stakes;  // (a, b) = (Maxine, Mina)
    double cost_plus = 0.0, cost_minus = 0.0;
    Terminal terminal = Terminal::cutoff;
    double receipt_plus = 0.0, receipt_minus = 0.0;
    double payoff_plus = 0.0, payoff_minus = 0.0;
};

inline GameRecord simulate(const GameConfig& cfg, const Strategy& s_minus, const Strategy& s_plus)
{
    validate(cfg);
    GameRecord g;
    int x = cfg.start;
    g.path.push_back(x);
    TurnContext cm, cp;
    const auto& bd = cfg.boundary;
    for (long t = 1;; ++t) {
        cm.turn = cp.turn = t;
        double a = s_plus.stake(x, cp), b = s_minus.stake(x, cm);
        if (a < 0.0 || b < 0.0) throw std::domain_error("strategy produced a negative stake");
        bool up = maxine_wins(a, b, turn_draw(cfg.seed, t));
        x += up ? 1 : -1;
        g.path.push_back(x);
        g.stakes.emplace_back(a, b);
        g.cost_plus += a;
        g.cost_minus += b;
        cp.opponent_last = b;
        cm.opponent_last = a;
        cp.has_last = cm.has_last = true;

        bool done = false;
        if (cfg.finite) {
            if (x == cfg.lo) { g.terminal = Terminal::mina_win; done = true; }
            else if (x == cfg.hi) { g.terminal = Terminal::maxine_win; done = true; }
        } else {
            if (x < cfg.battlefield - cfg.escape_margin) { g.terminal = Terminal::mina_win; done = true; }
            else if (x > cfg.battlefield + cfg.escape_margin) { g.terminal = Terminal::maxine_win; done = true; }
        }
        if (!done && t >= cfg.max_turns) { g.terminal = Terminal::cutoff; done = true; }
        if (done) break;
    }
    switch (g.terminal) {
    case Terminal::mina_win: g.receipt_plus = bd.m_minus_inf; g.receipt_minus = bd.n_minus_inf; break;
    case Terminal::maxine_win: g.receipt_plus = bd.m_plus_inf; g.receipt_minus = bd.n_plus_inf; break;
    case Terminal::cutoff: g.receipt_plus = bd.m_star; g.receipt_minus = bd.n_star; break;
    }
    g.payoff_plus = g.receipt_plus - g.cost_plus;
    g.payoff_minus = g.receipt_minus - g.cost_minus;
    return g;
}

// Game g of a batch uses seed derive_seed(master, g); results do not depend on thread count.
inline std::vector<GameRecord> simulate_batch(GameConfig cfg, const Strategy& s_minus, const Strategy& s_plus, long runs,
                                              unsigned threads = 0)
{
    if (runs <= 0) throw std::invalid_argument("runs must be positive");
    validate(cfg);
    std::vector<GameRecord> out(static_cast<size_t>(runs));
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<long>(threads, runs));
    uint64_t master = cfg.seed;
    auto work = [&](unsigned w) {
        GameConfig c = cfg;
        for (long g = w; g < runs; g += threads) {
            c.seed = derive_seed(master, static_cast<uint64_t>(g));
            out[static_cast<size_t>(g)] = simulate(c, s_minus, s_plus);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < threads; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& t : pool) t.join();
    return out;
}

struct ExactPayoffs {
    Seq m, n;  // on [lo, hi] including endpoints
};

// Mean payoffs of time-invariant stakes on the trail [lo, hi]:
// m_i = p_i m_{i+1} + q_i m_{i-1} - a_i, likewise n with -b_i, p_i = a_i/(a_i+b_i), q_i = b_i/(a_i+b_i)
// (both 1/2 if the stakes vanish).
inline ExactPayoffs exact_payoffs(int lo, int hi, const Seq& a, const Seq& b, const BoundaryData& bd)
{
    if (hi - lo < 2) throw std::invalid_argument("exact_payoffs: trail needs an open-play vertex");
    int n = hi - lo - 1;
    std::vector<double> p(n), q(n), ca(n), cb(n);
    for (int k = 0; k < n; ++k) {
        int i = lo + 1 + k;
        double ai = a[i], bi = b[i];
        if (ai < 0.0 || bi < 0.0) throw std::domain_error("exact_payoffs: negative stake");
        p[k] = ai + bi > 0.0 ? ai / (ai + bi) : 0.5;
        q[k] = ai + bi > 0.0 ? bi / (ai + bi) : 0.5;
        ca[k] = ai;
        cb[k] = bi;
    }
    // Forward sweep u_k = alpha_k u_{k+1} + beta_k, carrying g_k = 1 - alpha_k separately so
    // the pivot p_k + q_k g_{k-1} is a sum of non-negative terms even when a stake dwarfs the other.
    auto solve = [&](const std::vector<double>& cost, double left, double right) {
        std::vector<double> alpha(n), beta(n), u(n);
        double g = 1.0, bprev = left;
        for (int k = 0; k < n; ++k) {
            double D = p[k] + q[k] * g;
            if (!(D > 0.0)) throw std::runtime_error("exact_payoffs: singular system at vertex " + std::to_string(lo + 1 + k));
            alpha[k] = p[k] / D;
            beta[k] = (q[k] * bprev - cost[k]) / D;
            g = q[k] * g / D;
            bprev = beta[k];
        }
        double next = right;
        for (int k = n - 1; k >= 0; --k) next = u[k] = alpha[k] * next + beta[k];
        return u;
    };
    auto um = solve(ca, bd.m_minus_inf, bd.m_plus_inf);
    auto un = solve(cb, bd.n_minus_inf, bd.n_plus_inf);
    ExactPayoffs r{Seq(lo, hi), Seq(lo, hi)};
    r.m[lo] = bd.m_minus_inf;
    r.m[hi] = bd.m_plus_inf;
    r.n[lo] = bd.n_minus_inf;
    r.n[hi] = bd.n_plus_inf;
    for (int k = 0; k < n; ++k) {
        r.m[lo + 1 + k] = um[k];
        r.n[lo + 1 + k] = un[k];
    }
    return r;
}

inline ExactPayoffs exact_payoffs(int lo, int hi, const Strategy& s_minus, const Strategy& s_plus, const BoundaryData& bd)
{
    if (!s_minus.time_invariant() || !s_plus.time_invariant()) throw std::invalid_argument("exact_payoffs: strategies must be time-invariant");
    Seq a(lo + 1, hi - 1), b(lo + 1, hi - 1);
    TurnContext ctx;
    for (int i = lo + 1; i < hi; ++i) {
        a[i] = s_plus.stake(i, ctx);
        b[i] = s_minus.stake(i, ctx);
    }
    return exact_payoffs(lo, hi, a, b, bd);
}

// Payoff change for the deviator at every start vertex when its stake at `vertex` is scaled by f.
struct Deviation {
    double factor;
    Seq delta;  // on the open-play vertices
};

inline std::vector<Deviation> deviation_check(const Quadruple& base, int vertex, Side player, const std::vector<double>& factors)
{
    if (!base.finite) throw std::invalid_argument("deviation_check: needs a finite-trail solution");
    int lo = base.lo - 1, hi = base.hi + 1;
    if (vertex <= lo || vertex >= hi) throw std::invalid_argument("deviation_check: vertex outside open play");
    auto ref = exact_payoffs(lo, hi, base.a, base.b, base.boundary);
    std::vector<Deviation> out;
    for (double f : factors) {
        if (!(f > 0.0)) throw std::domain_error("deviation_check: factor must be positive");
        Seq a = base.a, b = base.b;
        (player == Side::maxine ? a : b)[vertex] *= f;
        auto dev = exact_payoffs(lo, hi, a, b, base.boundary);
        Deviation d{f, Seq(lo + 1, hi - 1)};
        for (int i = lo + 1; i < hi; ++i)
            d.delta[i] = player == Side::maxine ? dev.m[i] - ref.m[i] : dev.n[i] - ref.n[i];
        out.push_back(std::move(d));
    }
    return out;
}

struct Proportion {
    double p, lo, hi;  // Wilson 95% interval
};

inline Proportion wilson(long hits, long n, double z = 1.959963984540054)
{
    if (n <= 0) return {kNaN, kNaN, kNaN};
    double p = static_cast<double>(hits) / n, z2 = z * z;
    double den = 1.0 + z2 / n;
    double centre = (p + z2 / (2.0 * n)) / den;
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / den;
    return {p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct UnanimityStats {
    Proportion unanimous, wrong_side, maxine_win;
    double mean_returns_to_battlefield = 0.0;
    long runs = 0;
};

// Unanimity proxy: the last max_turns/2 increments of the path (all of it if shorter) share one sign.
// Wrong side: the game is won by the player the start vertex disfavours relative to the battlefield.
inline UnanimityStats unanimity_stats(const GameConfig& cfg, const Strategy& s_minus, const Strategy& s_plus, long runs)
{
    if (runs <= 0) throw std::invalid_argument("unanimity_stats: runs must be positive");
    auto games = simulate_batch(cfg, s_minus, s_plus, runs);
    long una = 0, wrong = 0, maxw = 0, returns = 0;
    size_t window = static_cast<size_t>(std::max<long>(1, cfg.max_turns / 2));
    for (const auto& g : games) {
        size_t steps = g.path.size() - 1;
        size_t from = steps > window ? steps - window : 0;
        bool same = true;
        int sign = 0;
        for (size_t t = from; t < steps; ++t) {
            int d = g.path[t + 1] - g.path[t];
            if (sign == 0) sign = d;
            else if (d != sign) { same = false; break; }
        }
        una += same;
        if (g.terminal == Terminal::maxine_win) ++maxw;
        if (cfg.start > cfg.battlefield && g.terminal == Terminal::mina_win) ++wrong;
        if (cfg.start < cfg.battlefield && g.terminal == Terminal::maxine_win) ++wrong;
        for (size_t t = 1; t < g.path.size(); ++t) returns += g.path[t] == cfg.battlefield;
    }
    UnanimityStats s;
    s.runs = runs;
    s.unanimous = wilson(una, runs);
    s.wrong_side = wilson(wrong, runs);
    s.maxine_win = wilson(maxw, runs);
    s.mean_returns_to_battlefield = static_cast<double>(returns) / runs;
    return s;
}

// Chicken on the symmetric trail [-H, H] with boundary (0, 1, 1, 0), built from the x = 3
// standard solution (a_i = b_{-i}). Soft/tough are its right shifts by -k/+k for Mina and
// +k/-k for Maxine; each cell holds (Mina, Maxine) mean payoffs from the origin.
struct ChickenTable {
    double soft_soft[2], soft_tough[2], tough_soft[2], tough_tough[2];
};

inline ChickenTable chicken_payoffs(int H, int k)
{
    if (H < 2 || k < 0) throw std::invalid_argument("chicken_payoffs: need H >= 2, k >= 0");
    auto q = standard_solution(3.0, -H - k - 1, H + k + 1);
    BoundaryData bd{0.0, 1.0, 1.0, 0.0, 0.0, 0.0};
    auto mina = [&](int sh) { return nash_strategy(q, Side::mina, sh); };
    auto maxi = [&](int sh) { return nash_strategy(q, Side::maxine, sh); };
    auto cell = [&](const Strategy& sm, const Strategy& sp, double out[2]) {
        auto r = exact_payoffs(-H, H, sm, sp, bd);
        out[0] = r.n[0];
        out[1] = r.m[0];
    };
    ChickenTable t{};
    cell(mina(-k), maxi(k), t.soft_soft);
    cell(mina(-k), maxi(-k), t.soft_tough);
    cell(mina(k), maxi(k), t.tough_soft);
    cell(mina(k), maxi(-k), t.tough_tough);
    return t;
}

} // namespace lp
