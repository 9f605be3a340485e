#include "reflex/toyworld/simulation.hpp"

#include <algorithm>
#include <cstdio>
#include <thread>

#include "reflex/backends/toy.hpp"
#include "reflex/core/error.hpp"
#include "reflex/engine/engine.hpp"

namespace reflex::toy {

namespace {

std::vector<double> run_dialogue(const SimulationConfig& cfg, const backends::Backends& backends, int d) {
    const auto& schema = cfg.world.schema;
    const auto seed = Rng::derive_seed(cfg.seed, "dialogue", {static_cast<std::uint64_t>(d)});
    auto target_rng = Rng::derive(seed, "target");
    SimulatedUser user{random_vector(schema, target_rng), cfg.initial_aspects, cfg.reply_prob};

    auto state = engine::create_session("sim-" + std::to_string(d), schema, Rng::derive_seed(seed, "session"),
                                        std::nullopt, backends::Kind::Toy)
                     .first;
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(cfg.rounds));
    engine::UserInput input{"", initial_message(user, schema)};
    for (int r = 1; r <= cfg.rounds; ++r) {
        auto result = engine::run_round(state, input, backends);
        state = std::move(result.state);
        scores.push_back(alignment(*result.record.image.toy(), user.target));

        auto reply_rng = Rng::derive(seed, "reply", {static_cast<std::uint64_t>(r)});
        if (auto reply = user_reply(user, result.record.question, schema, reply_rng))
            input = {"", std::move(*reply)};
        else
            input = {"(no reply)", AspectVector::empty_for(schema)};
    }
    return scores;
}

} // namespace

SimulationTable run_simulation(const SimulationConfig& cfg) {
    if (cfg.dialogues < 1) throw Error(ErrorCode::InvalidArgument, "need at least one dialogue");
    if (cfg.rounds < 1) throw Error(ErrorCode::InvalidArgument, "need at least one round");
    validate_config(cfg.world);
    SimulatedUser probe{AspectVector(cfg.world.schema.name, cfg.world.schema.size()), cfg.initial_aspects, cfg.reply_prob};
    std::fill(probe.target.slots.begin(), probe.target.slots.end(), 0);
    validate_user(probe, cfg.world.schema);

    const auto backends = backends::make_toy_backends(cfg.world);
    std::vector<std::vector<double>> per_dialogue(static_cast<std::size_t>(cfg.dialogues));

    unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.dialogues));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int d = static_cast<int>(w); d < cfg.dialogues; d += static_cast<int>(workers))
                    per_dialogue[static_cast<std::size_t>(d)] = run_dialogue(cfg, backends, d);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    SimulationTable table;
    table.dialogues = cfg.dialogues;
    for (int r = 0; r < cfg.rounds; ++r) {
        double sum = 0.0;
        for (const auto& scores : per_dialogue) sum += scores[static_cast<std::size_t>(r)];
        const double mean = sum / cfg.dialogues;
        table.rows.push_back({r + 1, mean, table.rows.empty() ? 0.0 : mean - table.rows.front().mean});
    }
    return table;
}

std::string to_csv(const SimulationTable& table) {
    std::string out = "round,mean,delta\n";
    char line[96];
    for (const auto& row : table.rows) {
        std::snprintf(line, sizeof line, "%d,%.6f,%.6f\n", row.round, row.mean, row.delta);
        out += line;
    }
    return out;
}

std::string to_text(const SimulationTable& table) {
    std::string out = "round  mean     delta\n";
    char line[96];
    for (const auto& row : table.rows) {
        if (row.round == 1) std::snprintf(line, sizeof line, "%5d  %.5f  -\n", row.round, row.mean);
        else std::snprintf(line, sizeof line, "%5d  %.5f  (%+.5f)\n", row.round, row.mean, row.delta);
        out += line;
    }
    return out;
}

void to_json(Json& j, const SimulationTable& t) {
    Json rows = Json::array();
    for (const auto& r : t.rows) rows.push_back({{"round", r.round}, {"mean", r.mean}, {"delta", r.delta}});
    j = Json{{"dialogues", t.dialogues}, {"rows", std::move(rows)}};
}

} // namespace reflex::toy
