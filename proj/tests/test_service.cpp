#include <doctest.h>

#include <filesystem>
#include <thread>

#include <httplib.h>

#include "lostpennies/service.hpp"

using namespace lp::svc;
using json = nlohmann::json;

namespace {

json base(const std::string& opponent = "nash", uint64_t seed = 17)
{
    return {{"trail", {{"lo", -3}, {"hi", 3}}}, {"human_side", "mina"}, {"opponent", opponent}, {"seed", seed}};
}

int status_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const ApiError& e) {
        return e.status;
    }
    return 200;
}

} // namespace

TEST_CASE("create, stake, finish")
{
    SessionStore store;
    auto s = store.create(base());
    CHECK(s["status"] == "awaiting_stake");
    CHECK(s["turn"] == 1);
    std::string id = s["id"];
    json st = json::object();
    for (int t = 0; t < 200 && st.value("status", std::string()) != "finished"; ++t) st = store.stake(id, {{"amount", 0.01}});
    REQUIRE(st["status"] == "finished");
    // accounting identity against the transcript
    double mina = 0.0, maxine = 0.0;
    for (const auto& h : st["history"]) {
        mina += h["human_stake"].get<double>();
        maxine += h["bot_stake"].get<double>();
    }
    CHECK(st["costs"]["mina"].get<double>() == mina);
    CHECK(st["result"]["payoffs"]["mina"].get<double>() == st["result"]["receipts"]["mina"].get<double>() - mina);
    CHECK(st["result"]["payoffs"]["maxine"].get<double>() == st["result"]["receipts"]["maxine"].get<double>() - maxine);
    CHECK(status_of([&] { store.stake(id, {{"amount", 0.0}}); }) == 409);
}

TEST_CASE("reaching the left end pays Mina's terminal receipts")
{
    SessionStore store;
    auto s = store.create(base("zero"));
    std::string id = s["id"];
    json st = json::object();
    // against a zero stake any positive stake wins the turn
    for (int t = 0; t < 3; ++t) st = store.stake(id, {{"amount", 0.5}});
    CHECK(st["vertex"] == -3);
    CHECK(st["result"]["terminal"] == "mina_win");
    CHECK(st["result"]["receipts"]["mina"] == 1.0);
    CHECK(st["result"]["receipts"]["maxine"] == 0.0);
}

TEST_CASE("errors map to status codes")
{
    SessionStore store;
    CHECK(status_of([&] { store.get("abc"); }) == 404);
    auto inf = base();
    inf["trail"] = "infinite";
    CHECK(status_of([&] { store.create(inf); }) == 422);
    auto bad = base();
    bad["boundary"] = {{"m_minus_inf", 1.0}, {"m_plus_inf", 0.5}};
    CHECK(status_of([&] { store.create(bad); }) == 422);
    std::string id = store.create(base("zero"))["id"];
    CHECK(status_of([&] { store.stake(id, {{"amount", -1.0}}); }) == 400);
    CHECK(status_of([&] { store.stake(id, {{"amount", 2e6}}); }) == 400);
    CHECK(status_of([&] { store.stake(id, {{"amt", 1.0}}); }) == 400);
    CHECK(status_of([&] { store.create(base("grumpy")); }) == 400);
}

TEST_CASE("bully opens with epsilon and doubles")
{
    SessionStore store;
    auto b = base();
    b["opponent"] = {{"kind", "bully"}, {"epsilon", 0.001}};
    std::string id = store.create(b)["id"];
    auto st = store.stake(id, {{"amount", 0.0}});
    CHECK(st["last_turn"]["bot_stake"] == 0.001);
    if (st["status"] == "awaiting_stake") {
        st = store.stake(id, {{"amount", 0.2}});
        if (st["status"] == "awaiting_stake") {
            st = store.stake(id, {{"amount", 0.0}});
            CHECK(st["last_turn"]["bot_stake"].get<double>() == doctest::Approx(0.4));
        }
    }
}

TEST_CASE("simultaneity: the bot stake ignores the human's stake at the same turn")
{
    SessionStore store;
    for (const char* opp : {"nash", "bully"}) {
        // two sessions with the same seed and history, then different stakes at turn 3
        std::string x = store.create(base(opp, 99))["id"], y = store.create(base(opp, 99))["id"];
        json sx, sy;
        for (double a : {0.01, 0.02}) {
            sx = store.stake(x, {{"amount", a}});
            sy = store.stake(y, {{"amount", a}});
        }
        if (sx["status"] != "awaiting_stake") continue;
        sx = store.stake(x, {{"amount", 0.0}});
        sy = store.stake(y, {{"amount", 5.0}});
        CHECK(sx["last_turn"]["bot_stake"] == sy["last_turn"]["bot_stake"]);
    }
}

TEST_CASE("replay with the same seed and stakes gives the same transcript")
{
    SessionStore store;
    std::string x = store.create(base("nash", 4))["id"], y = store.create(base("nash", 4))["id"];
    for (int t = 0; t < 6; ++t) {
        auto sx = store.stake(x, {{"amount", 0.03 * t}});
        auto sy = store.stake(y, {{"amount", 0.03 * t}});
        CHECK(sx["history"] == sy["history"]);
        if (sx["status"] == "finished") break;
    }
}

TEST_CASE("zero against zero: winner is uniform")
{
    SessionStore store;
    long maxine = 0, n = 0;
    for (uint64_t seed = 0; seed < 400; ++seed) {
        auto b = base("zero", seed);
        b["trail"] = {{"lo", -30}, {"hi", 30}};
        std::string id = store.create(b)["id"];
        for (int t = 0; t < 5; ++t) {
            auto st = store.stake(id, {{"amount", 0.0}});
            maxine += st["last_turn"]["winner"] == "maxine";
            ++n;
        }
    }
    double p = static_cast<double>(maxine) / n, se = std::sqrt(0.25 / n);
    CHECK(std::abs(p - 0.5) < 4.0 * se);
}

TEST_CASE("tit-for-tat remembers the series")
{
    SessionStore store;
    auto b = base();
    b["opponent"] = {{"kind", "tit_for_tat"}, {"series", "s1"}};
    auto first = store.create(b);
    CHECK(first["opponent"]["provoked"] == false);
    std::string id = first["id"];
    json st = json::object();
    while (st.value("status", std::string()) != "finished") st = store.stake(id, {{"amount", 0.3}});
    for (const auto& h : st["history"]) CHECK(h["bot_stake"] == 0.0);
    auto second = store.create(b);
    CHECK(second["opponent"]["provoked"] == true);
    auto s2 = store.stake(second["id"], {{"amount", 0.0}});
    CHECK(s2["last_turn"]["bot_stake"].get<double>() > 0.0);
}

TEST_CASE("opponent catalogue")
{
    auto c = SessionStore::opponents();
    std::set<std::string> kinds;
    for (const auto& o : c) kinds.insert(o["kind"]);
    CHECK(kinds == std::set<std::string>{"nash", "zero", "tit_for_tat", "bully"});
}

TEST_CASE("state never reveals the pending bot stake")
{
    SessionStore store;
    std::string id = store.create(base())["id"];
    auto v = store.get(id);
    CHECK_FALSE(v.dump().find("pending") != std::string::npos);
    CHECK(v["history"].empty());
    store.stake(id, {{"amount", 0.0}});
    CHECK(store.get(id)["history"].size() == 1);
    CHECK(store.get(id)["turn"] == 2);
}

TEST_CASE("persistence survives a restart")
{
    auto dir = std::filesystem::temp_directory_path() / ("lp_sessions_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::string id;
    json before;
    {
        SessionStore store(dir.string());
        id = store.create(base("nash", 8))["id"];
        store.stake(id, {{"amount", 0.05}});
        before = store.stake(id, {{"amount", 0.0}});
        before.erase("last_turn");
    }
    SessionStore again(dir.string());
    CHECK(again.get(id) == before);
    std::filesystem::remove_all(dir);
}

TEST_CASE("HTTP routes")
{
    SessionStore store;
    httplib::Server srv;
    install_routes(srv, store, "http://localhost:5173");
    int port = srv.bind_to_any_port("127.0.0.1");
    std::thread th([&] { srv.listen_after_bind(); });
    srv.wait_until_ready();
    httplib::Client cli("127.0.0.1", port);

    auto op = cli.Get("/opponents");
    REQUIRE(op);
    CHECK(op->status == 200);
    CHECK(op->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
    CHECK(json::parse(op->body).size() == 4);

    auto cr = cli.Post("/sessions", base().dump(), "application/json");
    REQUIRE(cr);
    CHECK(cr->status == 201);
    std::string id = json::parse(cr->body)["id"];

    auto sk = cli.Post("/sessions/" + id + "/stake", R"({"amount": 0.02})", "application/json");
    REQUIRE(sk);
    CHECK(sk->status == 200);
    CHECK(json::parse(sk->body)["history"].size() == 1);

    auto gs = cli.Get("/sessions/" + id);
    REQUIRE(gs);
    CHECK(gs->status == 200);
    CHECK(json::parse(gs->body)["turn"] == 2);

    auto hint = cli.Get("/sessions/" + id + "/hint");
    REQUIRE(hint);
    CHECK(hint->status == 200);
    CHECK(json::parse(hint->body)["stake"].get<double>() > 0.0);

    CHECK(cli.Get("/sessions/0123")->status == 404);
    CHECK(cli.Post("/sessions/" + id + "/stake", R"({"amount": -1})", "application/json")->status == 400);
    CHECK(cli.Post("/sessions/" + id + "/stake", "{not json", "application/json")->status == 400);
    CHECK(cli.Post("/sessions", R"({"trail": "infinite", "seed": 1})", "application/json")->status == 422);
    auto pre = cli.Options("/sessions");
    REQUIRE(pre);
    CHECK(pre->status == 204);

    srv.stop();
    th.join();
}
