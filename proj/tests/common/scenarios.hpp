#pragma once

// Scripted toy sessions shared by the unit tests and the acceptance binary.

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "reflex/backends/toy.hpp"
#include "reflex/dpo/policy_store.hpp"
#include "reflex/engine/engine.hpp"
#include "reflex/store/event_log.hpp"
#include "reflex/toyworld/toyworld.hpp"

namespace reflex::testing {

struct ScriptedSession {
    engine::SessionState state;
    std::vector<EventDraft> drafts;
};

/// A session in which a compliant simulated user answers every question.
inline ScriptedSession simulated_session(const std::string& id, const AspectSchema& schema, std::uint64_t seed,
                                         std::optional<std::string> persona, int rounds,
                                         std::shared_ptr<const dpo::PolicyHandle> policy = nullptr) {
    ScriptedSession out;
    auto [state, created] = engine::create_session(id, schema, seed, persona, backends::Kind::Toy);
    out.state = std::move(state);
    out.drafts.push_back(std::move(created));

    toy::WorldConfig world;
    world.schema = schema;
    const auto backends = backends::make_toy_backends(world, std::move(policy));
    auto target_rng = Rng::derive(seed, "target");
    toy::SimulatedUser user{toy::random_vector(schema, target_rng), {0}, 1.0};

    engine::UserInput input{"", toy::initial_message(user, schema)};
    for (int r = 1; r <= rounds; ++r) {
        auto result = engine::run_round(out.state, input, backends);
        out.state = std::move(result.state);
        out.drafts.insert(out.drafts.end(), result.events.begin(), result.events.end());
        auto reply_rng = Rng::derive(seed, "reply", {static_cast<std::uint64_t>(r)});
        input = {"", *toy::user_reply(user, result.record.question, schema, reply_rng)};
    }
    return out;
}

/// A session driven by fixed user lines ("Color=red" style).
inline ScriptedSession scripted_session(const std::string& id, const AspectSchema& schema, std::uint64_t seed,
                                        const std::vector<std::string>& lines) {
    ScriptedSession out;
    auto [state, created] = engine::create_session(id, schema, seed, std::nullopt, backends::Kind::Toy);
    out.state = std::move(state);
    out.drafts.push_back(std::move(created));
    toy::WorldConfig world;
    world.schema = schema;
    const auto backends = backends::make_toy_backends(world);
    for (const auto& line : lines) {
        auto result = engine::run_round(out.state, engine::parse_user_input(line, schema), backends);
        out.state = std::move(result.state);
        out.drafts.insert(out.drafts.end(), result.events.begin(), result.events.end());
    }
    return out;
}

struct GoldenScenario {
    std::string name;
    std::function<ScriptedSession()> build;
};

inline std::vector<GoldenScenario> golden_scenarios() {
    return {
        {"toy_four_rounds", [] { return simulated_session("golden-a", default_schema(), 7, std::nullopt, 4); }},
        {"toy_overwrite",
         [] { return scripted_session("golden-b", default_schema(), 11, {"Content=parrot, Color=red", "Color=blue"}); }},
        {"fashion_persona_closed",
         [] {
             auto policy = std::make_shared<dpo::PolicyHandle>(dpo::default_reference_policy());
             auto s = simulated_session("golden-c", fashion_schema(), 3, "B", 3, policy);
             s.drafts.push_back({EventType::Preference,
                                 Json{{"winner_round", 2}, {"loser_round", 1}, {"persona", "B"}, {"pair_count", 1},
                                      {"pairs_until_training", 39}}});
             auto [closed, draft] = engine::close_session(s.state);
             s.state = std::move(closed);
             s.drafts.push_back(std::move(draft));
             return s;
         }},
    };
}

/// Writes drafts one event per line with timestamps 1000 * seq, so the bytes
/// depend on nothing but the drafts.
inline void write_log(const std::filesystem::path& path, const std::string& session_id,
                      const std::vector<EventDraft>& drafts) {
    std::filesystem::remove(path);
    store::EventLog log(path, session_id);
    for (const auto& d : drafts)
        log.append_batch(std::span(&d, 1), static_cast<std::int64_t>(1000 * (log.last_seq() + 1)));
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline std::filesystem::path golden_log_dir() { return std::filesystem::path(REFLEX_GOLDEN_DIR) / "logs"; }

} // namespace reflex::testing
