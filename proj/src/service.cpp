#include "lostpennies/service.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <httplib.h>

#include "lostpennies/io.hpp"
#include "lostpennies/margin.hpp"

namespace lp::svc {

namespace fs = std::filesystem;

namespace {

constexpr int kMaxHalfWidth = 40;
constexpr long kDefaultMaxTurns = 10000;

Side parse_side(const json& j)
{
    auto s = j.get<std::string>();
    if (s == "mina") return Side::mina;
    if (s == "maxine") return Side::maxine;
    throw ApiError(400, "human_side must be \"mina\" or \"maxine\"");
}

OpponentSpec parse_opponent(const json& j)
{
    OpponentSpec o;
    if (j.is_string()) {
        o.kind = j.get<std::string>();
    } else if (j.is_object()) {
        o.kind = j.value("kind", std::string("nash"));
        o.epsilon = j.value("epsilon", o.epsilon);
        o.multiplier = j.value("multiplier", o.multiplier);
        o.threshold = j.value("threshold", o.threshold);
        o.series = j.value("series", std::string());
    } else if (!j.is_null()) {
        throw ApiError(400, "opponent must be a name or an object");
    }
    if (o.kind != "nash" && o.kind != "zero" && o.kind != "bully" && o.kind != "tit_for_tat")
        throw ApiError(400, "unknown opponent \"" + o.kind + "\"");
    if (!(o.epsilon >= 0.0) || !(o.multiplier >= 0.0) || !(o.threshold >= 0.0))
        throw ApiError(400, "opponent parameters must be non-negative");
    return o;
}

json opponent_json(const OpponentSpec& o)
{
    json j{{"kind", o.kind}};
    if (o.kind == "bully") {
        j["epsilon"] = o.epsilon;
        j["multiplier"] = o.multiplier;
    }
    if (o.kind == "tit_for_tat") {
        j["threshold"] = o.threshold;
        j["series"] = o.series;
    }
    return j;
}

const char* status_text(bool finished) { return finished ? "finished" : "awaiting_stake"; }

} // namespace

double Session::pending_bot_stake() const
{
    TurnContext ctx;
    ctx.turn = turn();
    if (!history.empty()) {
        ctx.has_last = true;
        ctx.opponent_last = history.back().human_stake;
    }
    return bot.stake(vertex, ctx);
}

json public_view(const Session& s)
{
    json v;
    v["id"] = s.id;
    v["status"] = status_text(s.finished);
    v["trail"] = {{"lo", s.config.lo}, {"hi", s.config.hi}};
    v["start"] = s.config.start;
    v["boundary"] = io::to_json(s.config.boundary);
    v["seed"] = s.config.seed;
    v["max_turns"] = s.config.max_turns;
    v["human_side"] = to_string(s.human);
    v["opponent"] = opponent_json(s.opponent);
    if (s.opponent.kind == "tit_for_tat") v["opponent"]["provoked"] = s.provoked;
    v["turn"] = s.turn();
    v["vertex"] = s.vertex;
    v["costs"] = {{"mina", s.cost_mina}, {"maxine", s.cost_maxine}};
    json h = json::array();
    for (const auto& e : s.history)
        h.push_back({{"turn", e.turn},
                     {"human_stake", e.human_stake},
                     {"bot_stake", e.bot_stake},
                     {"winner", to_string(e.winner)},
                     {"vertex", e.vertex}});
    v["history"] = std::move(h);
    if (s.finished) {
        v["result"] = {{"terminal", to_string(s.terminal)},
                       {"receipts", {{"mina", s.receipt_mina}, {"maxine", s.receipt_maxine}}},
                       {"payoffs", {{"mina", s.payoff_mina}, {"maxine", s.payoff_maxine}}}};
    } else {
        v["result"] = nullptr;
    }
    return v;
}

SessionStore::SessionStore(std::optional<std::string> persist_dir, double stake_cap) : dir_(std::move(persist_dir)), cap_(stake_cap)
{
    if (!(cap_ > 0.0)) throw std::invalid_argument("stake cap must be positive");
    id_salt_ = std::random_device{}();
    id_salt_ = (id_salt_ << 32) ^ std::random_device{}();
    if (dir_) {
        fs::create_directories(*dir_);
        load_all();
    }
}

std::string SessionStore::fresh_id()
{
    std::lock_guard lk(map_mu_);
    for (;;) {
        uint64_t v = mix64(id_salt_ + 0x9e3779b97f4a7c15ULL * ++id_counter_);
        std::ostringstream os;
        os << std::hex << v;
        if (!sessions_.count(os.str())) return os.str();
    }
}

Session SessionStore::build(const json& body, const std::string& id, bool replaying)
{
    if (!body.is_object()) throw ApiError(400, "body must be a JSON object");
    Session s;
    s.id = id;
    const json& tr = body.contains("trail") ? body["trail"] : json();
    if (tr.is_string() && tr.get<std::string>() == "infinite")
        throw ApiError(422, "interactive play needs a finite trail; the infinite trail has no terminal vertex to finish on");
    if (body.value("infinite", false)) throw ApiError(422, "interactive play needs a finite trail");
    GameConfig& c = s.config;
    c.finite = true;
    if (tr.is_object()) {
        c.lo = tr.value("lo", -3);
        c.hi = tr.value("hi", 3);
    } else if (tr.is_null()) {
        c.lo = -3;
        c.hi = 3;
    } else {
        throw ApiError(400, "trail must be {\"lo\":int,\"hi\":int} or \"infinite\"");
    }
    if (c.hi - c.lo < 2) throw ApiError(422, "trail needs an open-play vertex");
    if (c.hi - c.lo > 2 * kMaxHalfWidth) throw ApiError(422, "trail longer than " + std::to_string(2 * kMaxHalfWidth) + " steps");
    c.start = body.value("start", (c.lo + c.hi) / 2);
    if (!(c.start > c.lo && c.start < c.hi)) throw ApiError(422, "start must be strictly inside the trail");
    c.boundary = io::boundary_from_json(body.value("boundary", json::object()));
    try {
        validate(c.boundary);
    } catch (const std::exception& e) {
        throw ApiError(422, std::string("invalid boundary: ") + e.what());
    }
    c.max_turns = body.value("max_turns", kDefaultMaxTurns);
    if (c.max_turns <= 0) throw ApiError(400, "max_turns must be positive");
    c.seed = body.at("seed").get<uint64_t>();
    s.human = parse_side(body.value("human_side", json("mina")));
    s.opponent = parse_opponent(body.value("opponent", json("nash")));
    s.vertex = c.start;

    Side bot_side = s.human == Side::mina ? Side::maxine : Side::mina;
    const auto& kind = s.opponent.kind;
    if (kind == "nash" || kind == "tit_for_tat") {
        s.equilibrium = trail_equilibrium(c.lo, c.hi, c.boundary);
        if (!s.equilibrium)
            throw ApiError(422, "no Nash equilibrium on this trail for boundary margin " + io::num(c.boundary.margin()));
        s.bot = nash_strategy(*s.equilibrium, bot_side);
        if (kind == "tit_for_tat") {
            if (replaying) {
                s.provoked = body.value("provoked", false);
            } else {
                std::lock_guard lk(series_mu_);
                auto it = series_.find(s.opponent.series);
                s.provoked = !s.opponent.series.empty() && it != series_.end() && it->second > s.opponent.threshold;
            }
            s.bot = tit_for_tat(s.bot, s.opponent.threshold, s.provoked);
        }
    } else if (kind == "bully") {
        s.bot = Strategy::bully(s.opponent.epsilon, s.opponent.multiplier);
    } else {
        s.bot = Strategy::zero();
    }
    return s;
}

void SessionStore::apply_turn(Session& s, double human_stake)
{
    double bot = s.pending_bot_stake();  // fixed before the human stake is used
    long t = s.turn();
    double a = s.human == Side::maxine ? human_stake : bot;
    double b = s.human == Side::mina ? human_stake : bot;
    bool up = maxine_wins(a, b, turn_draw(s.config.seed, t));
    s.vertex += up ? 1 : -1;
    s.cost_maxine += a;
    s.cost_mina += b;
    s.history.push_back({t, human_stake, bot, up ? Side::maxine : Side::mina, s.vertex});
    const auto& bd = s.config.boundary;
    bool done = true;
    if (s.vertex == s.config.lo) {
        s.terminal = Terminal::mina_win;
        s.receipt_maxine = bd.m_minus_inf;
        s.receipt_mina = bd.n_minus_inf;
    } else if (s.vertex == s.config.hi) {
        s.terminal = Terminal::maxine_win;
        s.receipt_maxine = bd.m_plus_inf;
        s.receipt_mina = bd.n_plus_inf;
    } else if (t >= s.config.max_turns) {
        s.terminal = Terminal::cutoff;
        s.receipt_maxine = bd.m_star;
        s.receipt_mina = bd.n_star;
    } else {
        done = false;
    }
    if (done) {
        s.finished = true;
        s.payoff_maxine = s.receipt_maxine - s.cost_maxine;
        s.payoff_mina = s.receipt_mina - s.cost_mina;
        if (s.opponent.kind == "tit_for_tat" && !s.opponent.series.empty()) {
            std::lock_guard lk(series_mu_);
            series_[s.opponent.series] = s.human == Side::mina ? s.cost_mina : s.cost_maxine;
        }
    }
}

void SessionStore::publish(Entry& e) { std::atomic_store(&e.snapshot, std::make_shared<const json>(public_view(e.session))); }

json SessionStore::create(const json& body_in)
{
    json body = body_in;
    if (!body.is_object()) throw ApiError(400, "body must be a JSON object");
    if (!body.contains("seed")) {
        std::random_device rd;
        body["seed"] = (static_cast<uint64_t>(rd()) << 32) | rd();
    } else if (!body["seed"].is_number_unsigned()) {
        throw ApiError(400, "seed must be a non-negative integer");
    }
    auto id = fresh_id();
    auto e = std::make_shared<Entry>();
    try {
        e->session = build(body, id, false);
    } catch (const ApiError&) {
        throw;
    } catch (const json::exception& ex) {
        throw ApiError(400, std::string("malformed field: ") + ex.what());
    }
    if (e->session.opponent.kind == "tit_for_tat") body["provoked"] = e->session.provoked;
    publish(*e);
    {
        std::lock_guard lk(map_mu_);
        sessions_[id] = e;
        bodies_[id] = body;
    }
    persist(e->session, body);
    return *std::atomic_load(&e->snapshot);
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(const std::string& id) const
{
    std::lock_guard lk(map_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError(404, "no session " + id);
    return it->second;
}

json SessionStore::stake(const std::string& id, const json& body)
{
    auto e = find(id);
    if (!body.is_object() || !body.contains("amount") || !body["amount"].is_number())
        throw ApiError(400, "body must be {\"amount\": number}");
    double amount = body["amount"].get<double>();
    if (!(amount >= 0.0)) throw ApiError(400, "stake must be non-negative");
    if (amount > cap_) throw ApiError(400, "stake exceeds the cap " + io::num(cap_));
    json saved;
    {
        std::lock_guard lk(e->write);
        if (e->session.finished) throw ApiError(409, "session " + id + " is finished");
        apply_turn(e->session, amount);
        publish(*e);
        {
            std::lock_guard ml(map_mu_);
            saved = bodies_[id];
        }
        persist(e->session, saved);
    }
    auto snap = std::atomic_load(&e->snapshot);
    json out = *snap;
    out["last_turn"] = snap->at("history").back();
    return out;
}

json SessionStore::get(const std::string& id) const
{
    auto e = find(id);
    return *std::atomic_load(&e->snapshot);
}

json SessionStore::hint(const std::string& id)
{
    auto e = find(id);
    std::lock_guard lk(e->write);
    Session& s = e->session;
    if (s.finished) throw ApiError(409, "session " + id + " is finished");
    if (!s.equilibrium) s.equilibrium = trail_equilibrium(s.config.lo, s.config.hi, s.config.boundary);
    if (!s.equilibrium) throw ApiError(422, "no Nash equilibrium on this trail");
    const Quadruple& q = *s.equilibrium;
    double st = s.human == Side::maxine ? q.a[s.vertex] : q.b[s.vertex];
    return {{"vertex", s.vertex}, {"stake", st}, {"cen_ratio", q.cen_ratio}};
}

json SessionStore::opponents()
{
    return json::array({
        {{"kind", "nash"}, {"description", "Stakes the equilibrium amount at each vertex; battlefield nearest the trail's middle."}, {"params", json::object()}},
        {{"kind", "zero"}, {"description", "Never stakes."}, {"params", json::object()}},
        {{"kind", "tit_for_tat"},
         {"description", "Stakes zero unless you staked more than the threshold in the previous game of the series, then plays Nash for one game."},
         {"params", {{"threshold", 0.0}, {"series", ""}}}},
        {{"kind", "bully"},
         {"description", "Stakes epsilon against a zero stake and answers a positive stake s with multiplier * s at the next turn."},
         {"params", {{"epsilon", 1e-3}, {"multiplier", 2.0}}}},
    });
}

void SessionStore::persist(const Session& s, const json& body)
{
    if (!dir_) return;
    json doc{{"id", s.id}, {"body", body}, {"stakes", json::array()}};
    for (const auto& e : s.history) doc["stakes"].push_back(e.human_stake);
    auto tmp = fs::path(*dir_) / (s.id + ".json.tmp");
    io::write_file(tmp.string(), doc.dump());
    fs::rename(tmp, fs::path(*dir_) / (s.id + ".json"));
    if (s.finished && s.opponent.kind == "tit_for_tat") {
        json ser;
        {
            std::lock_guard lk(series_mu_);
            ser = series_;
        }
        io::write_file((fs::path(*dir_) / "series.json.tmp").string(), ser.dump());
        fs::rename(fs::path(*dir_) / "series.json.tmp", fs::path(*dir_) / "series.json");
    }
}

// Sessions are stored as their creation body plus the human stakes and rebuilt by replay.
void SessionStore::load_all()
{
    auto series_path = fs::path(*dir_) / "series.json";
    if (fs::exists(series_path)) series_ = json::parse(io::read_file(series_path.string())).get<std::map<std::string, double>>();
    for (const auto& f : fs::directory_iterator(*dir_)) {
        if (f.path().extension() != ".json" || f.path().filename() == "series.json") continue;
        json doc = json::parse(io::read_file(f.path().string()));
        auto e = std::make_shared<Entry>();
        std::string id = doc.at("id");
        e->session = build(doc.at("body"), id, true);
        for (const auto& st : doc.at("stakes")) apply_turn(e->session, st.get<double>());
        publish(*e);
        sessions_[id] = e;
        bodies_[id] = doc.at("body");
    }
}

void install_routes(httplib::Server& server, SessionStore& store, const std::string& origin)
{
    server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    auto reply = [](httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    };
    auto guarded = [reply](auto fn) {
        return [fn, reply](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const ApiError& e) {
                reply(res, e.status, {{"error", e.what()}});
            } catch (const json::exception& e) {
                reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
            } catch (const std::exception& e) {
                reply(res, 500, {{"error", e.what()}});
            }
        };
    };
    auto parse = [](const httplib::Request& req) {
        if (req.body.empty()) return json::object();
        return json::parse(req.body);
    };
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/opponents", guarded([reply](const httplib::Request&, httplib::Response& res) { reply(res, 200, SessionStore::opponents()); }));
    server.Post("/sessions", guarded([&store, reply, parse](const httplib::Request& req, httplib::Response& res) {
        reply(res, 201, store.create(parse(req)));
    }));
    server.Post(R"(/sessions/([0-9a-f]+)/stake)", guarded([&store, reply, parse](const httplib::Request& req, httplib::Response& res) {
        reply(res, 200, store.stake(req.matches[1], parse(req)));
    }));
    server.Get(R"(/sessions/([0-9a-f]+)/hint)", guarded([&store, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, 200, store.hint(req.matches[1]));
    }));
    server.Get(R"(/sessions/([0-9a-f]+))", guarded([&store, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, 200, store.get(req.matches[1]));
    }));
}

} // namespace lp::svc
