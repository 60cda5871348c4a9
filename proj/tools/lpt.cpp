// lpt: command-line front end. Exit codes: 0 ok, 1 golden mismatch or failed replay, 2 usage.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <openssl/evp.h>

#include "lostpennies/certified.hpp"
#include "lostpennies/dynamics.hpp"
#include "lostpennies/engine.hpp"
#include "lostpennies/io.hpp"
#include "lostpennies/margin.hpp"
#include "lostpennies/service.hpp"

#ifndef LPT_VERSION
#define LPT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using lp::io::json;
using lp::io::num;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Output {
    std::vector<std::pair<std::string, std::string>> files;  // suffix -> content
    std::string console;                                     // human-readable summary, not digested
    int code = 0;
    std::optional<uint64_t> seed;
};

std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::string hex;
    char buf[3];
    for (unsigned i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

std::string digest(const Output& o)
{
    std::string all;
    for (const auto& [name, content] : o.files) {
        all += name;
        all += '\0';
        all += content;
        all += '\0';
    }
    return sha256_hex(all);
}

// ---- solve ----
struct SolveOpts {
    double x = 0.0;
    std::optional<double> z;  // x = Theta(z)
    std::string window = "-10:10", form = "standard", trail;
};

Output cmd_solve(SolveOpts o)
{
    if (o.z) {
        if (o.x != 0.0) throw UsageError("give --x or --z, not both");
        o.x = lp::big_theta(*o.z);
    }
    if (!(o.x > 0.0)) throw UsageError("--x must be positive");
    lp::Quadruple q;
    if (!o.trail.empty()) {
        auto [lo, hi] = lp::io::parse_range_int(o.trail);
        if (lo > -1 || hi < 1) throw UsageError("--trail must contain -1:1");
        q = lp::finite_standard_solution(o.x, -lo - 1, hi - 1);
    } else {
        auto [lo, hi] = lp::io::parse_range_int(o.window);
        if (o.form == "default") q = lp::default_solution(o.x, lo, hi);
        else if (o.form == "standard") q = lp::standard_solution(o.x, lo, hi);
        else throw UsageError("--form must be default or standard");
    }
    Output out;
    auto h = lp::io::quadruple_header(q);
    h["x"] = num(o.x);
    h["form"] = o.trail.empty() ? o.form : "finite_standard";
    out.files.push_back({".json", h.dump(2) + "\n"});
    out.files.push_back({".csv", lp::io::quadruple_csv(q)});
    out.console = "battlefield " + (h["battlefield"].is_null() ? std::string("outside window") : h["battlefield"].dump()) +
                  ", mina_margin " + h["mina_margin"].get<std::string>() + ", residual " + h["residual_max"].get<std::string>() + "\n";
    return out;
}

// ---- margin ----
struct MarginOpts {
    std::string finite, range, transform;
    bool infinite = false, psi = false;
    double mesh = 1e-3, tol = 1e-14;
    std::optional<double> roots;
};

Output cmd_margin(const MarginOpts& o)
{
    int modes = !o.finite.empty() + o.infinite + o.psi;
    if (modes != 1) throw UsageError("choose exactly one of --finite l,k / --infinite / --psi");
    if (!(o.mesh > 0.0)) throw UsageError("--mesh must be positive");
    if (!o.transform.empty() && o.transform != "theta") throw UsageError("--transform accepts only theta");
    int ell = 0, k = 0;
    if (!o.finite.empty()) {
        auto p = lp::io::split(o.finite, ',');
        if (p.size() != 2) throw UsageError("--finite expects l,k");
        ell = std::stoi(p[0]);
        k = std::stoi(p[1]);
        if (ell < 1 || k < 1) throw UsageError("--finite needs l, k >= 1");
    }
    bool on_z = o.psi || !o.transform.empty();
    std::string def_range = on_z ? "0:3" : (o.infinite ? "0.34:3" : "0.5:10");
    auto [lo, hi] = lp::io::parse_range(o.range.empty() ? def_range : o.range);
    if (!on_z && lo <= 0.0) throw UsageError("--range must be positive for x");

    std::function<double(double)> f;
    if (o.psi) f = [](double z) { return lp::psi(z); };
    else if (o.infinite && on_z) f = [&](double z) { return lp::margin_infinite(lp::big_theta(z), o.tol).value; };
    else if (o.infinite) f = [&](double x) { return lp::margin_infinite(x, o.tol).value; };
    else if (on_z) f = [=](double z) { return lp::margin_finite(lp::big_theta(z), ell, k); };
    else f = [=](double x) { return lp::margin_finite(x, ell, k); };

    Output out;
    std::ostringstream csv;
    csv << (on_z ? "z" : "x") << ",value\n";
    long n = static_cast<long>(std::floor((hi - lo) / o.mesh + 1e-9));
    double vmin = lp::kInf, vmax = -lp::kInf, amin = lo;
    std::vector<double> zs, vs;
    for (long t = 0; t <= n; ++t) {
        double x = lo + t * o.mesh;
        double v = f(x);
        zs.push_back(x);
        vs.push_back(v);
        csv << num(x) << ',' << num(v) << '\n';
        if (v < vmin) vmin = v, amin = x;
        vmax = std::max(vmax, v);
    }
    json s{{"samples", n + 1}, {"min", num(vmin)}, {"argmin", num(amin)}, {"max", num(vmax)}};
    if (o.psi) {
        long per = std::lround(1.0 / o.mesh);
        double defect = 0.0;
        for (size_t t = 0; t + per < vs.size(); ++t) defect = std::max(defect, std::abs(vs[t + per] - vs[t]));
        s["period_defect"] = num(defect);
    }
    if (o.roots) {
        lp::RootSet rs = lp::scan_roots(f, *o.roots, lo, hi, o.mesh);
        json r = json::array(), res = json::array(), sus = json::array();
        for (size_t t = 0; t < rs.roots.size(); ++t) {
            r.push_back(num(rs.roots[t]));
            res.push_back(num(rs.residuals[t]));
        }
        for (double v : rs.suspected) sus.push_back(num(v));
        s["target"] = num(*o.roots);
        s["roots"] = r;
        s["residuals"] = res;
        s["suspected"] = sus;
        out.console = "roots:";
        for (double v : rs.roots) out.console += " " + num(v);
        out.console += "\n";
    }
    out.files.push_back({".json", s.dump(2) + "\n"});
    out.files.push_back({".csv", csv.str()});
    out.console += "min " + num(vmin) + " at " + num(amin) + "\n";
    return out;
}

// ---- certify ----
Output cmd_certify()
{
    auto t0 = std::chrono::steady_clock::now();
    auto r = lp::cert::certify();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Output out;
    std::ostringstream tx;
    tx << "   i            s_up          s_down            c_up          c_down            d_up          d_down\n";
    for (int i = lp::cert::kTableLo; i <= lp::cert::kTableHi; ++i)
        tx << std::setw(4) << i << ' ' << std::setw(15) << r.tables.s_up.at(i).str() << ' ' << std::setw(15) << r.tables.s_down.at(i).str()
           << ' ' << std::setw(15) << r.tables.c_up.at(i).str() << ' ' << std::setw(15) << r.tables.c_down.at(i).str() << ' '
           << std::setw(15) << r.tables.d_up.at(i).str() << ' ' << std::setw(15) << r.tables.d_down.at(i).str() << '\n';
    auto iv = [](const lp::cert::CertInterval& c) { return "[" + c.lo.str() + ", " + c.hi.str() + "]"; };
    tx << "P4 " << iv(r.pqst.P4) << "  Q5 " << iv(r.pqst.Q5) << "  S4 " << iv(r.pqst.S4) << "  T5 " << iv(r.pqst.T5) << '\n';
    tx << "M_{5,4}(0.58) in " << iv(r.interval) << " (directed rounding: " << iv(r.rigorous_interval) << ")\n";
    tx << "M(0.58) <= 0.9999038338: " << (r.tabulated_chain.margin_bound_ok ? "yes" : "no")
       << "; lambda <= 0.999904: " << (r.lambda_ok() ? "yes" : "no") << '\n';

    json j;
    json cells = json::array();
    for (const auto& c : r.table_checks) cells.push_back({{"cell", c.name}, {"i", c.i}, {"computed", c.computed}, {"golden", c.golden}, {"ok", c.ok}});
    j["tables"] = cells;
    json pq = json::array();
    for (const auto& c : r.pqst_checks) pq.push_back({{"cell", c.name}, {"computed", c.computed}, {"golden", c.golden}, {"ok", c.ok}});
    j["pqst"] = pq;
    j["interval"] = {r.interval.lo.str(), r.interval.hi.str()};
    j["interval_ok"] = r.interval_ok;
    j["rigorous_interval"] = {r.rigorous_interval.lo.str(), r.rigorous_interval.hi.str()};
    j["sandwich_violations_tabulated"] = r.sandwich.size();
    j["lambda_ok"] = r.lambda_ok();
    j["golden_ok"] = r.golden_ok();
    out.files.push_back({".json", j.dump(2) + "\n"});
    out.files.push_back({".txt", tx.str()});

    std::ostringstream con;
    con << tx.str();
    for (const auto& c : r.pqst_checks)
        if (!c.ok) con << "note: " << c.name << " computed " << c.computed << ", printed " << c.golden << " (intermediate, not gated)\n";
    con << "runtime " << secs << " s\n";
    if (!r.golden_ok()) {
        out.code = 1;
        for (const auto& c : r.table_checks)
            if (!c.ok) {
                con << "MISMATCH " << c.name << "[" << c.i << "]: computed " << c.computed << ", golden " << c.golden << '\n';
                break;
            }
        if (r.tables_ok() && !r.interval_ok) con << "MISMATCH interval " << iv(r.interval) << '\n';
        if (r.tables_ok() && r.interval_ok) con << "MISMATCH lambda certificate\n";
    }
    out.console = con.str();
    return out;
}

// ---- play-batch ----
struct BatchOpts {
    std::string config, trail = "-4:4", strategies = "zero:zero";
    long runs = 10000;
    uint64_t seed = 1;
    unsigned threads = 0;
    long max_turns = 100000;
    std::optional<int> start;
};

lp::Strategy batch_strategy(const json& spec, lp::Side side, const std::optional<lp::Quadruple>& eq)
{
    std::string kind = spec.is_string() ? spec.get<std::string>() : spec.value("kind", std::string());
    if (kind == "zero") return lp::Strategy::zero();
    if (kind == "bully") {
        double eps = spec.is_object() ? spec.value("epsilon", 1e-3) : 1e-3;
        double mult = spec.is_object() ? spec.value("multiplier", 2.0) : 2.0;
        return lp::Strategy::bully(eps, mult);
    }
    if (kind == "nash" || kind == "tit_for_tat") {
        if (!eq) throw UsageError("no Nash equilibrium for this trail and boundary");
        auto s = lp::nash_strategy(*eq, side);
        if (kind == "tit_for_tat") s = lp::tit_for_tat(s, 0.0, spec.is_object() && spec.value("provoked", false));
        return s;
    }
    throw UsageError("unknown strategy '" + kind + "'");
}

Output cmd_play_batch(const BatchOpts& o)
{
    json cfg;
    if (!o.config.empty()) {
        try {
            cfg = json::parse(lp::io::read_file(o.config));
        } catch (const json::exception& e) {
            throw UsageError(std::string("malformed config: ") + e.what());
        }
    } else {
        auto st = lp::io::split(o.strategies, ':');
        if (st.size() != 2) throw UsageError("--strategies expects mina:maxine");
        auto [lo, hi] = lp::io::parse_range_int(o.trail);
        cfg = {{"trail", {{"lo", lo}, {"hi", hi}}}, {"mina", st[0]}, {"maxine", st[1]}, {"runs", o.runs}, {"seed", o.seed}, {"max_turns", o.max_turns}};
        if (o.start) cfg["start"] = *o.start;
    }
    lp::GameConfig gc;
    try {
        gc.finite = true;
        gc.lo = cfg.at("trail").at("lo");
        gc.hi = cfg.at("trail").at("hi");
        gc.start = cfg.value("start", (gc.lo + gc.hi) / 2);
        gc.boundary = lp::io::boundary_from_json(cfg.value("boundary", json::object()));
        gc.seed = cfg.value("seed", uint64_t{1});
        gc.max_turns = cfg.value("max_turns", 100000L);
    } catch (const json::exception& e) {
        throw UsageError(std::string("malformed config: ") + e.what());
    }
    long runs = cfg.value("runs", 10000L);
    if (runs <= 0) throw UsageError("runs must be positive");
    try {
        lp::validate(gc.boundary);
        lp::validate(gc);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    std::optional<lp::Quadruple> eq;
    auto needs_eq = [](const json& s) {
        std::string k = s.is_string() ? s.get<std::string>() : s.value("kind", std::string());
        return k == "nash" || k == "tit_for_tat";
    };
    if (needs_eq(cfg.at("mina")) || needs_eq(cfg.at("maxine"))) eq = lp::trail_equilibrium(gc.lo, gc.hi, gc.boundary);
    auto sm = batch_strategy(cfg.at("mina"), lp::Side::mina, eq);
    auto sp = batch_strategy(cfg.at("maxine"), lp::Side::maxine, eq);
    auto games = lp::simulate_batch(gc, sm, sp, runs, o.threads);

    std::ostringstream csv;
    csv << lp::io::kRecordHeader << '\n';
    double s1m = 0, s2m = 0, s1p = 0, s2p = 0;
    for (size_t g = 0; g < games.size(); ++g) {
        csv << lp::io::record_row(static_cast<long>(g), games[g]) << '\n';
        s1m += games[g].payoff_minus;
        s2m += games[g].payoff_minus * games[g].payoff_minus;
        s1p += games[g].payoff_plus;
        s2p += games[g].payoff_plus * games[g].payoff_plus;
    }
    double N = static_cast<double>(runs);
    auto sd = [N](double s1, double s2) { return std::sqrt(std::max(0.0, (s2 - s1 * s1 / N) / (N - 1))); };
    json sum{{"runs", runs},
             {"seed", gc.seed},
             {"mean_payoff_mina", num(s1m / N)},
             {"mean_payoff_maxine", num(s1p / N)},
             {"sd_payoff_mina", num(sd(s1m, s2m))},
             {"sd_payoff_maxine", num(sd(s1p, s2p))}};
    if (sm.time_invariant() && sp.time_invariant()) {
        auto ex = lp::exact_payoffs(gc.lo, gc.hi, sm, sp, gc.boundary);
        double em = ex.n[gc.start], ep = ex.m[gc.start];
        sum["exact_payoff_mina"] = num(em);
        sum["exact_payoff_maxine"] = num(ep);
        sum["z_mina"] = num((s1m / N - em) / (sd(s1m, s2m) / std::sqrt(N)));
        sum["z_maxine"] = num((s1p / N - ep) / (sd(s1p, s2p) / std::sqrt(N)));
    }
    Output out;
    out.seed = gc.seed;
    out.files.push_back({".json", sum.dump(2) + "\n"});
    out.files.push_back({".csv", csv.str()});
    out.console = "mean payoffs: mina " + sum["mean_payoff_mina"].get<std::string>() + ", maxine " + sum["mean_payoff_maxine"].get<std::string>() + "\n";
    return out;
}

// ---- dabmn ----
struct DabmnOpts {
    std::string preset = "plateau";
    int K = 8, T = 4200, stride = 140;
    double x = 3.0, steepness = 6.0;
};

Output cmd_dabmn(const DabmnOpts& o)
{
    if (o.K < 1 || o.T < 1 || o.stride < 1) throw UsageError("--K, --T and --stride must be positive");
    lp::Terminal2 ter;
    if (o.preset == "plateau") {
        if (o.K < 2) throw UsageError("plateau needs --K >= 2");
        ter = lp::plateau_terminal(o.K, o.steepness);
    } else if (o.preset == "static") {
        if (!(o.x > 0.0)) throw UsageError("--x must be positive");
        ter = lp::static_terminal(o.K, o.x);
    } else if (o.preset == "penny") {
        ter = lp::penny_terminal(o.K);
    } else {
        throw UsageError("--preset must be plateau, static or penny");
    }
    auto sh = lp::dabmn_evolve(ter, o.T);
    json rows = json::array();
    std::vector<int> counts;
    for (int j = sh.T - o.stride; j >= 0; j -= o.stride) {
        int c = lp::significant_peaks(sh.rows[j].a);
        counts.push_back(c);
        rows.push_back({{"j", j}, {"peaks", c}});
    }
    // last time (backwards) at which the peak count changes, over every step
    int last = lp::significant_peaks(sh.rows[sh.T - 1].a), change_j = -1, from = last;
    for (int j = sh.T - 2; j >= 0; --j) {
        int c = lp::significant_peaks(sh.rows[j].a);
        if (c != last) {
            change_j = j;
            from = last;
        }
        last = c;
    }
    double res = 0.0;
    for (int j = 0; j < sh.T; ++j) res = std::max(res, lp::dabmn_residual(sh, j));
    const auto& a0 = sh.rows[0].a;
    int argmax = static_cast<int>(std::max_element(a0.begin(), a0.end()) - a0.begin()) - sh.K;
    json s{{"preset", o.preset},
           {"trail", {-sh.K - 1, sh.K + 1}},
           {"T", o.T},
           {"stride", o.stride},
           {"rows", rows.size()},
           {"strided_peaks", rows},
           {"initial_peaks", lp::significant_peaks(sh.rows[sh.T - 1].a)},
           {"final_peaks", lp::significant_peaks(a0)},
           {"last_change", change_j < 0 ? json(nullptr) : json{{"j", change_j}, {"from", from}, {"to", lp::significant_peaks(sh.rows[change_j].a)}}},
           {"final_argmax", argmax},
           {"max_residual", num(res)},
           {"final_convergence", num(sh.convergence[0])}};
    Output out;
    out.files.push_back({".json", s.dump(2) + "\n"});
    out.files.push_back({".csv", lp::io::sheet_csv(sh, o.stride)});
    std::string seq;
    for (int c : counts) seq += std::to_string(c);
    out.console = "peaks per strided row (backwards in time): " + seq + "\nfinal argmax " + std::to_string(argmax) + "\n";
    return out;
}

// ---- driver ----
struct App {
    CLI::App app{"Trail of Lost Pennies toolkit", "lpt"};
    std::string out_prefix;
    SolveOpts solve;
    MarginOpts margin;
    double roots_target = 0.0, z_value = 0.0;
    BatchOpts batch;
    DabmnOpts dab;
    std::string manifest_path;
    int port = 0;
    std::string host = "127.0.0.1", persist, origin = "*";
    double stake_cap = 1e6;
    CLI::App *s_solve, *s_margin, *s_certify, *s_batch, *s_dabmn, *s_serve, *s_replay;

    App()
    {
        app.require_subcommand(1);
        app.set_version_flag("--version", LPT_VERSION);
        s_solve = app.add_subcommand("solve", "ABMN solution on a window or finite trail");
        auto* ox = s_solve->add_option("--x", solve.x, "central ratio");
        auto* oz = s_solve->add_option("--z", z_value, "central ratio Theta(z)");
        ox->excludes(oz);
        s_solve->add_option("--window", solve.window, "index window lo:hi");
        s_solve->add_option("--form", solve.form, "default | standard");
        s_solve->add_option("--trail", solve.trail, "finite trail lo:hi (finite standard solution)");

        s_margin = app.add_subcommand("margin", "Mina margin maps and level sets");
        s_margin->add_option("--finite", margin.finite, "l,k for M_{l,k}");
        s_margin->add_flag("--infinite", margin.infinite, "infinite-trail margin M");
        s_margin->add_flag("--psi", margin.psi, "psi(z) = M(theta^{-1}(z))");
        s_margin->add_option("--range", margin.range, "lo:hi");
        s_margin->add_option("--mesh", margin.mesh, "sample spacing");
        s_margin->add_option("--tol", margin.tol, "tail tolerance for --infinite");
        s_margin->add_option("--roots", roots_target, "report solutions of value = target");
        s_margin->add_option("--transform", margin.transform, "theta: sample over z with x = Theta(z)");

        s_certify = app.add_subcommand("certify", "exact lattice tables and the lambda certificate");

        s_batch = app.add_subcommand("play-batch", "seeded Monte Carlo games");
        s_batch->add_option("--config", batch.config, "JSON config file");
        s_batch->add_option("--trail", batch.trail, "lo:hi");
        s_batch->add_option("--strategies", batch.strategies, "mina:maxine from nash, zero, bully, tit_for_tat");
        s_batch->add_option("--runs", batch.runs);
        s_batch->add_option("--seed", batch.seed);
        s_batch->add_option("--threads", batch.threads, "0 = hardware concurrency; output does not depend on it");
        s_batch->add_option("--max-turns", batch.max_turns);
        s_batch->add_option("--start", batch.start);

        s_dabmn = app.add_subcommand("dabmn", "backward induction for the dynamic system");
        s_dabmn->add_option("--preset", dab.preset, "plateau | static | penny");
        s_dabmn->add_option("--K", dab.K, "trail [-K, K]");
        s_dabmn->add_option("--T", dab.T, "horizon");
        s_dabmn->add_option("--stride", dab.stride, "row spacing in the output");
        s_dabmn->add_option("--x", dab.x, "central ratio for --preset static");
        s_dabmn->add_option("--steepness", dab.steepness, "plateau rise steepness");

        s_serve = app.add_subcommand("serve", "HTTP play service");
        s_serve->add_option("--port", port, "default $LPT_PORT or 8080");
        s_serve->add_option("--host", host);
        s_serve->add_option("--persist", persist, "directory for session files");
        s_serve->add_option("--origin", origin, "CORS origin");
        s_serve->add_option("--stake-cap", stake_cap);

        s_replay = app.add_subcommand("replay", "re-run a manifest and compare the output digest");
        s_replay->add_option("manifest", manifest_path)->required();

        for (auto* s : {s_solve, s_margin, s_certify, s_batch, s_dabmn})
            s->add_option("--out", out_prefix, "output prefix; relative paths resolve against $LPT_OUT_DIR");
    }

    Output run_selected()
    {
        if (s_solve->parsed()) {
            if (s_solve->count("--z")) solve.z = z_value;
            else if (!s_solve->count("--x")) throw UsageError("solve needs --x or --z");
            return cmd_solve(solve);
        }
        if (s_margin->parsed()) {
            if (s_margin->count("--roots")) margin.roots = roots_target;
            return cmd_margin(margin);
        }
        if (s_certify->parsed()) return cmd_certify();
        if (s_batch->parsed()) return cmd_play_batch(batch);
        if (s_dabmn->parsed()) return cmd_dabmn(dab);
        throw UsageError("no subcommand");
    }
};

int serve(App& a)
{
    int port = a.port;
    if (port == 0) {
        const char* env = std::getenv("LPT_PORT");
        port = env ? std::atoi(env) : 8080;
    }
    lp::svc::SessionStore store(a.persist.empty() ? std::nullopt : std::optional<std::string>(a.persist), a.stake_cap);
    httplib::Server srv;
    lp::svc::install_routes(srv, store, a.origin);
    std::cerr << "listening on " << a.host << ":" << port << std::endl;
    return srv.listen(a.host, port) ? 0 : 2;
}

fs::path resolve_prefix(const std::string& prefix, const std::string& sub)
{
    const char* env = std::getenv("LPT_OUT_DIR");
    if (prefix.empty()) return env ? fs::path(env) / sub : fs::path();
    fs::path p(prefix);
    if (p.is_relative() && env) p = fs::path(env) / p;
    return p;
}

json manifest_for(const std::string& sub, const std::vector<std::string>& args, const Output& o)
{
    return {{"subcommand", sub},
            {"parameters", args},
            {"seed", o.seed ? json(*o.seed) : json(nullptr)},
            {"tool_version", LPT_VERSION},
            {"output_digest", digest(o)}};
}

// Parses `args` (subcommand first) and runs it; the replay path reuses this.
int run(const std::vector<std::string>& args, bool emit, std::string* digest_out)
{
    App a;
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        a.app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return a.app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return a.app.exit(e);
    } catch (const CLI::ParseError& e) {
        a.app.exit(e);
        return 2;
    }
    if (a.s_serve->parsed()) return serve(a);
    if (a.s_replay->parsed()) {
        json m;
        try {
            m = json::parse(lp::io::read_file(a.manifest_path));
        } catch (const std::exception& e) {
            std::cerr << "bad manifest: " << e.what() << '\n';
            return 2;
        }
        auto params = m.at("parameters").get<std::vector<std::string>>();
        params.insert(params.begin(), m.at("subcommand").get<std::string>());
        std::string d;
        int code = run(params, false, &d);
        bool same = d == m.at("output_digest").get<std::string>();
        std::cout << (same ? "replay identical " : "replay DIFFERS ") << d << '\n';
        return same ? code : 1;
    }
    std::string sub = args.front();
    Output o;
    try {
        o = a.run_selected();
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }
    if (digest_out) *digest_out = digest(o);
    if (!emit) return o.code;
    auto man = manifest_for(sub, std::vector<std::string>(args.begin() + 1, args.end()), o);
    fs::path prefix = resolve_prefix(a.out_prefix, sub);
    if (prefix.empty()) {
        for (const auto& [name, content] : o.files) std::cout << content;
        std::cerr << o.console << man.dump() << '\n';
    } else {
        if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
        for (const auto& [name, content] : o.files) lp::io::write_file(prefix.string() + name, content);
        lp::io::write_file(prefix.string() + ".manifest.json", man.dump(2) + "\n");
        std::cout << o.console;
    }
    return o.code;
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) args.push_back("--help");
    try {
        return run(args, true, nullptr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
