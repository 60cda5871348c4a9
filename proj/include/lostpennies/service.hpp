#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "engine.hpp"

namespace httplib {
class Server;
}

namespace lp::svc {

using json = nlohmann::json;

struct ApiError : std::runtime_error {
    int status;
    ApiError(int s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

struct OpponentSpec {
    std::string kind = "nash";  // nash | zero | bully | tit_for_tat
    double epsilon = 1e-3;      // bully
    double multiplier = 2.0;    // bully
    double threshold = 0.0;     // tit_for_tat: provoked when the human's stakes in the series' last game exceeded this
    std::string series;         // tit_for_tat memory token
};

struct TurnEntry {
    long turn = 0;
    double human_stake = 0.0, bot_stake = 0.0;
    Side winner = Side::mina;
    int vertex = 0;  // counter after the turn
};

struct Session {
    std::string id;
    GameConfig config;
    Side human = Side::mina;
    OpponentSpec opponent;
    Strategy bot;
    bool provoked = false;
    int vertex = 0;
    double cost_mina = 0.0, cost_maxine = 0.0;
    std::vector<TurnEntry> history;
    bool finished = false;
    Terminal terminal = Terminal::cutoff;
    double receipt_mina = 0.0, receipt_maxine = 0.0;
    double payoff_mina = 0.0, payoff_maxine = 0.0;
    std::optional<Quadruple> equilibrium;  // fitted to the session's trail and boundary, when one exists

    long turn() const { return static_cast<long>(history.size()) + 1; }
    // Bot stake for the coming turn: depends on the seed and the history so far only.
    double pending_bot_stake() const;
};

json public_view(const Session& s);

class SessionStore {
public:
    explicit SessionStore(std::optional<std::string> persist_dir = std::nullopt, double stake_cap = 1e6);

    json create(const json& body);
    json stake(const std::string& id, const json& body);
    json get(const std::string& id) const;
    json hint(const std::string& id);
    static json opponents();

    double stake_cap() const { return cap_; }

private:
    struct Entry {
        std::mutex write;
        Session session;
        std::shared_ptr<const json> snapshot;  // only through std::atomic_load / std::atomic_store
    };

    std::shared_ptr<Entry> find(const std::string& id) const;
    Session build(const json& body, const std::string& id, bool replaying);
    void apply_turn(Session& s, double human_stake);
    void publish(Entry& e);
    void persist(const Session& s, const json& body);
    void load_all();
    std::string fresh_id();

    std::optional<std::string> dir_;
    double cap_;
    mutable std::mutex map_mu_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::map<std::string, json> bodies_;  // creation bodies, kept for persistence
    std::mutex series_mu_;
    std::map<std::string, double> series_;  // token -> human stake total in the last finished game
    uint64_t id_counter_ = 0;
    uint64_t id_salt_;
};

// Registers the HTTP routes and CORS headers for `origin`.
void install_routes(httplib::Server& server, SessionStore& store, const std::string& origin = "*");

} // namespace lp::svc
