#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "abmn.hpp"
#include "dynamics.hpp"
#include "engine.hpp"

namespace lp::io {

using json = nlohmann::json;

// Shortest decimal that parses back to the same double; locale independent.
inline std::string num(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline double parse_num(std::string_view s)
{
    if (s == "nan") return kNaN;
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

// "-8:8" -> {-8, 8}
inline std::pair<int, int> parse_range_int(const std::string& s)
{
    auto p = split(s, ':');
    if (p.size() != 2) throw std::invalid_argument("expected lo:hi, got '" + s + "'");
    int lo = std::stoi(p[0]), hi = std::stoi(p[1]);
    if (lo > hi) throw std::invalid_argument("range '" + s + "' is empty");
    return {lo, hi};
}

inline std::pair<double, double> parse_range(const std::string& s)
{
    auto p = split(s, ':');
    if (p.size() != 2) throw std::invalid_argument("expected lo:hi, got '" + s + "'");
    double lo = parse_num(p[0]), hi = parse_num(p[1]);
    if (!(lo < hi)) throw std::invalid_argument("range '" + s + "' is empty");
    return {lo, hi};
}

inline json to_json(const BoundaryData& b)
{
    return {{"m_minus_inf", b.m_minus_inf}, {"m_plus_inf", b.m_plus_inf}, {"n_minus_inf", b.n_minus_inf},
            {"n_plus_inf", b.n_plus_inf},   {"m_star", b.m_star},         {"n_star", b.n_star}};
}

inline BoundaryData boundary_from_json(const json& j)
{
    BoundaryData b;
    b.m_minus_inf = j.value("m_minus_inf", 0.0);
    b.m_plus_inf = j.value("m_plus_inf", 1.0);
    b.n_minus_inf = j.value("n_minus_inf", 1.0);
    b.n_plus_inf = j.value("n_plus_inf", 0.0);
    b.m_star = j.value("m_star", 0.0);
    b.n_star = j.value("n_star", 0.0);
    return b;
}

// phi_view throws when the window misses the battlefield; report that as an empty view instead
inline std::optional<PhiView> try_phi(const Quadruple& q)
{
    try {
        return phi_view(q);
    } catch (const std::range_error&) {
        return std::nullopt;
    }
}

// Quadruple as CSV rows i,a,b,m,n,phi over [lo, hi].
inline std::string quadruple_csv(const Quadruple& q)
{
    auto pv = try_phi(q);
    std::ostringstream os;
    os << "i,a,b,m,n,phi\n";
    for (int i = q.lo; i <= q.hi; ++i)
        os << i << ',' << num(q.a[i]) << ',' << num(q.b[i]) << ',' << num(q.m[i]) << ',' << num(q.n[i]) << ','
           << num(pv && pv->phi.has(i) ? pv->phi[i] : kNaN) << '\n';
    return os.str();
}

inline json quadruple_header(const Quadruple& q)
{
    auto pv = try_phi(q);
    json h;
    h["lo"] = q.lo;
    h["hi"] = q.hi;
    h["finite"] = q.finite;
    h["cen_ratio"] = num(q.cen_ratio);
    h["battlefield"] = pv ? json(pv->battlefield) : json(nullptr);
    h["mina_margin"] = num(q.mina_margin());
    h["residual_max"] = num(max_residual(q));
    h["boundary"] = to_json(q.boundary);
    h["underflow"] = q.underflow || (pv && pv->underflow);
    return h;
}

// One CSV row per game; path and stakes are ';'-joined so records parse back losslessly.
inline const char* kRecordHeader = "game,terminal,cost_minus,cost_plus,receipt_minus,receipt_plus,payoff_minus,payoff_plus,path,stake_minus,stake_plus";

template <class T, class F>
std::string join(const std::vector<T>& v, F f)
{
    std::string s;
    for (size_t k = 0; k < v.size(); ++k) {
        if (k) s += ';';
        s += f(v[k]);
    }
    return s;
}

inline std::string record_row(long game, const GameRecord& g)
{
    std::ostringstream os;
    os << game << ',' << to_string(g.terminal) << ',' << num(g.cost_minus) << ',' << num(g.cost_plus) << ','
       << num(g.receipt_minus) << ',' << num(g.receipt_plus) << ',' << num(g.payoff_minus) << ',' << num(g.payoff_plus)
       << ',' << join(g.path, [](int v) { return std::to_string(v); }) << ','
       << join(g.stakes, [](const auto& s) { return num(s.second); }) << ','
       << join(g.stakes, [](const auto& s) { return num(s.first); });
    return os.str();
}

inline Terminal terminal_from_string(const std::string& s)
{
    if (s == "mina_win") return Terminal::mina_win;
    if (s == "maxine_win") return Terminal::maxine_win;
    if (s == "cutoff") return Terminal::cutoff;
    throw std::invalid_argument("unknown terminal '" + s + "'");
}

inline GameRecord record_from_row(const std::string& row)
{
    auto f = split(row, ',');
    if (f.size() != 11) throw std::invalid_argument("record row needs 11 fields, got " + std::to_string(f.size()));
    GameRecord g;
    g.terminal = terminal_from_string(f[1]);
    g.cost_minus = parse_num(f[2]);
    g.cost_plus = parse_num(f[3]);
    g.receipt_minus = parse_num(f[4]);
    g.receipt_plus = parse_num(f[5]);
    g.payoff_minus = parse_num(f[6]);
    g.payoff_plus = parse_num(f[7]);
    for (auto& p : split(f[8], ';')) g.path.push_back(std::stoi(p));
    auto sm = split(f[9], ';'), sp = split(f[10], ';');
    if (sm.size() != sp.size()) throw std::invalid_argument("stake columns differ in length");
    if (!f[9].empty())
        for (size_t k = 0; k < sm.size(); ++k) g.stakes.emplace_back(parse_num(sp[k]), parse_num(sm[k]));
    return g;
}

inline bool same_record(const GameRecord& x, const GameRecord& y)
{
    return x.path == y.path && x.stakes == y.stakes && x.cost_plus == y.cost_plus && x.cost_minus == y.cost_minus &&
           x.terminal == y.terminal && x.receipt_plus == y.receipt_plus && x.receipt_minus == y.receipt_minus &&
           x.payoff_plus == y.payoff_plus && x.payoff_minus == y.payoff_minus;
}

// Sheet rows at j = T - stride, T - 2 stride, ..., down to 0 when stride divides T.
inline std::string sheet_csv(const DynamicSheet& sh, int stride)
{
    std::ostringstream os;
    os << "j,i,a,b,m,n\n";
    for (int j = sh.T - stride; j >= 0; j -= stride)
        for (int i = -sh.K - 1; i <= sh.K + 1; ++i) {
            bool open = i >= -sh.K && i <= sh.K;
            os << j << ',' << i << ',' << num(open ? sh.a(i, j) : kNaN) << ',' << num(open ? sh.b(i, j) : kNaN) << ','
               << num(sh.m(i, j)) << ',' << num(sh.n(i, j)) << '\n';
        }
    return os.str();
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& data)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << data;
}

} // namespace lp::io
