#include "reflex/service/session_manager.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <random>

#include "reflex/backends/remote.hpp"
#include "reflex/backends/toy.hpp"
#include "reflex/core/error.hpp"
#include "reflex/store/replay.hpp"

namespace reflex::service {

namespace fs = std::filesystem;

struct SessionManager::Live {
    std::mutex round_mu; // held for the whole of a mutating request
    mutable std::mutex mu;
    mutable std::condition_variable cv;
    engine::SessionState state;
    std::unique_ptr<store::EventLog> log;
    std::vector<SessionEvent> events;
};

std::string persona_key(const engine::SessionState& s) { return s.persona.value_or("default"); }

namespace {

std::string hex_id(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf, 12);
}

std::unique_lock<std::mutex> lock_round(std::mutex& m, const std::string& id) {
    std::unique_lock lock(m, std::try_to_lock);
    if (!lock) throw Error(ErrorCode::RoundInFlight, "session " + id + " is busy");
    return lock;
}

} // namespace

SessionManager::SessionManager(ServiceConfig cfg) : cfg_(std::move(cfg)), blobs_(cfg_.data_dir) {
    dpo::validate_config(cfg_.trainer);
    toy::validate_config(cfg_.world);
    const auto dir = cfg_.data_dir / "sessions";
    if (!fs::exists(dir)) return;
    std::vector<fs::path> logs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
    std::sort(logs.begin(), logs.end());
    for (const auto& path : logs) {
        try {
            auto live = std::make_shared<Live>();
            live->events = store::read_log(path);
            live->state = store::replay(live->events).state;
            if (live->state.id.empty()) continue;
            live->log = std::make_unique<store::EventLog>(path, live->state.id, cfg_.log);
            sessions_[live->state.id] = std::move(live);
        } catch (const Error& e) {
            std::cerr << "skipping " << path.string() << ": " << e.what() << '\n';
        }
    }
}

SessionManager::~SessionManager() = default;

std::shared_ptr<SessionManager::Live> SessionManager::find(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "no session '" + id + "'");
    return it->second;
}

std::shared_ptr<dpo::PolicyHandle> SessionManager::policy(const std::string& key) {
    std::lock_guard lock(mu_);
    auto& slot = policies_[key];
    if (!slot) {
        slot = std::make_shared<dpo::PolicyHandle>(dpo::default_reference_policy());
        const auto path = cfg_.data_dir / "policies" / (key + ".json");
        if (fs::exists(path)) slot->update(dpo::load_policy(path));
    }
    return slot;
}

fs::path SessionManager::pair_store_path(const std::string& key) const { return cfg_.data_dir / "pairs" / (key + ".jsonl"); }

std::optional<std::string> SessionManager::model_for(const engine::SessionState& s) const {
    if (s.persona) {
        auto it = cfg_.personas.find(*s.persona);
        if (it != cfg_.personas.end()) return it->second;
    }
    if (s.mode == backends::Kind::Remote) return cfg_.backend.model_name;
    return std::nullopt;
}

backends::Backends SessionManager::backends_for(const engine::SessionState& s) {
    if (s.mode == backends::Kind::Toy) {
        auto world = cfg_.world;
        world.schema = s.schema;
        return backends::make_toy_backends(std::move(world), policy(persona_key(s)));
    }
    auto bc = cfg_.backend;
    bc.kind = backends::Kind::Remote;
    if (s.persona) backends::select_persona(bc, *s.persona, cfg_.personas);
    return backends::make_remote_backends(bc);
}

std::vector<SessionEvent> SessionManager::commit(Live& live, std::span<const EventDraft> drafts) {
    std::lock_guard lock(live.mu);
    auto stamped = live.log->append_batch(drafts, store::now_ms());
    live.events.insert(live.events.end(), stamped.begin(), stamped.end());
    live.cv.notify_all();
    return stamped;
}

engine::SessionState SessionManager::create(const CreateRequest& req) {
    const auto& schema = schemas_.get(req.schema);
    if (req.persona && !cfg_.personas.contains(*req.persona))
        throw Error(ErrorCode::InvalidArgument, "unknown persona '" + *req.persona + "'");
    if (req.mode == backends::Kind::Remote) {
        auto bc = cfg_.backend;
        bc.kind = backends::Kind::Remote;
        backends::validate_config(bc);
    }
    const std::uint64_t seed = req.seed ? *req.seed : std::random_device{}() * 0x100000000ull + std::random_device{}();

    auto live = std::make_shared<Live>();
    std::unique_lock lock(mu_);
    std::string id;
    do {
        id = hex_id(Rng::derive_seed(seed, "session_id", {next_id_++}));
    } while (sessions_.contains(id) || fs::exists(store::session_log_path(cfg_.data_dir, id)));
    auto [state, draft] = engine::create_session(id, schema, seed, req.persona, req.mode);
    live->log = std::make_unique<store::EventLog>(store::session_log_path(cfg_.data_dir, id), id, cfg_.log);
    live->state = state;
    sessions_[id] = live;
    lock.unlock();

    commit(*live, std::span(&draft, 1));
    return state;
}

MessageOutcome SessionManager::message(const std::string& id, const engine::UserInput& input,
                                       const engine::StageHook& hook) {
    auto live = find(id);
    auto round = lock_round(live->round_mu, id);
    const auto before = state(id);
    auto result = engine::run_round(before, input, backends_for(before), hook);
    if (!result.image_bytes.empty()) blobs_.put(result.image_bytes);
    MessageOutcome out;
    {
        std::lock_guard lock(live->mu);
        out.events = live->log->append_batch(result.events, store::now_ms());
        live->events.insert(live->events.end(), out.events.begin(), out.events.end());
        live->state = std::move(result.state);
        live->cv.notify_all();
    }
    out.record = std::move(result.record);
    return out;
}

std::vector<EventDraft> SessionManager::train_persona(const std::string& key, TrainOutcome& out) {
    const auto pairs = dpo::PairStore(pair_store_path(key)).load();
    if (pairs.empty()) throw Error(ErrorCode::EmptyStore, "no preference pairs for persona '" + key + "'");
    auto handle = policy(key);
    const auto result = dpo::train(handle->snapshot(), handle->reference(), pairs, cfg_.trainer);
    handle->update(result.params);
    dpo::save_policy(cfg_.data_dir / "policies" / (key + ".json"), result.params);

    out.pair_count = pairs.size();
    out.curve = result.curve;
    out.kl = dpo::policy_kl(result.params, handle->reference());

    // One event per epoch (mean loss over its inner steps), then a summary.
    std::vector<EventDraft> drafts;
    const auto k = static_cast<std::size_t>(cfg_.trainer.prompts_per_epoch);
    for (std::size_t e = 0; e * k < result.curve.size(); ++e) {
        double sum = 0.0;
        for (std::size_t i = e * k; i < (e + 1) * k; ++i) sum += result.curve[i].loss;
        drafts.push_back({EventType::TrainingUpdate,
                          Json{{"persona", key}, {"epoch", static_cast<int>(e)}, {"mean_loss", sum / static_cast<double>(k)}}});
    }
    drafts.push_back({EventType::TrainingUpdate,
                      Json{{"persona", key},
                           {"done", true},
                           {"pair_count", pairs.size()},
                           {"steps", result.curve.size()},
                           {"config", cfg_.trainer},
                           {"kl", out.kl}}});
    return drafts;
}

PreferenceOutcome SessionManager::preference(const std::string& id, int winner_round, int loser_round) {
    auto live = find(id);
    auto round = lock_round(live->round_mu, id);
    const auto s = state(id);
    if (winner_round == loser_round) throw Error(ErrorCode::InvalidArgument, "winner and loser must be different rounds");
    for (int r : {winner_round, loser_round})
        if (r < 1 || r > s.current_round()) throw Error(ErrorCode::NotFound, "no round " + std::to_string(r));
    const auto& w = s.rounds[static_cast<std::size_t>(winner_round - 1)].image;
    const auto& l = s.rounds[static_cast<std::size_t>(loser_round - 1)].image;
    if (!w.trajectory || !l.trajectory)
        throw Error(ErrorCode::MissingTrajectory, "preference needs denoising trajectories (toy mode only)");

    const auto key = persona_key(s);
    std::lock_guard train_lock(train_mu_);
    dpo::PairStore pairs(pair_store_path(key));
    const auto count = pairs.append({*w.trajectory, *l.trajectory,
                                     id + ":" + std::to_string(winner_round) + ">" + std::to_string(loser_round),
                                     store::now_ms()});
    const auto bs = static_cast<std::size_t>(cfg_.trainer.batch_size);

    PreferenceOutcome out;
    out.pair_count = count;
    out.pairs_until_training = bs - count % bs;
    out.trained = count % bs == 0;
    std::vector<EventDraft> drafts{{EventType::Preference,
                                    Json{{"winner_round", winner_round},
                                         {"loser_round", loser_round},
                                         {"persona", key},
                                         {"pair_count", count},
                                         {"pairs_until_training", out.pairs_until_training}}}};
    if (out.trained) {
        TrainOutcome t;
        auto more = train_persona(key, t);
        drafts.insert(drafts.end(), more.begin(), more.end());
    }
    out.events = commit(*live, drafts);
    return out;
}

TrainOutcome SessionManager::refine_dpo(const std::string& id) {
    auto live = find(id);
    auto round = lock_round(live->round_mu, id);
    const auto s = state(id);
    if (s.mode != backends::Kind::Toy)
        throw Error(ErrorCode::ToolUnavailable, "DPO refinement needs toy-mode trajectories");
    std::lock_guard train_lock(train_mu_);
    TrainOutcome out;
    const auto drafts = train_persona(persona_key(s), out);
    out.events = commit(*live, drafts);
    return out;
}

AaeOutcome SessionManager::refine_aae(const std::string& id, const aae::ToolConfig& tool,
                                      std::optional<double> neglect_prob) {
    auto live = find(id);
    auto round = lock_round(live->round_mu, id);
    const auto s = state(id);
    if (s.mode != backends::Kind::Toy || tool.sim_backend != aae::SimBackend::Toy)
        throw Error(ErrorCode::ToolUnavailable, "the regeneration tool runs on toy sessions only");
    aae::validate_config(tool);
    if (s.rounds.empty()) throw Error(ErrorCode::InvalidArgument, "no round to refine yet");
    const auto& last = s.rounds.back();
    if (!last.prompt.structured || last.prompt.structured->specified_count() == 0)
        throw Error(ErrorCode::EmptyPrompt, "latest prompt specifies nothing");

    auto world = cfg_.world;
    world.schema = s.schema;
    if (neglect_prob) world.neglect_prob = *neglect_prob;
    toy::validate_config(world);
    const auto result = aae::run_tool(*last.prompt.structured, last.image.seed, tool, world);

    AaeOutcome out{last.round, result.image, result.report, {}};
    const EventDraft draft{EventType::Tool2Invocation,
                           Json{{"round", last.round},
                                {"threshold", tool.threshold},
                                {"max_iterations", tool.max_iterations},
                                {"neglect_prob", world.neglect_prob},
                                {"report", result.report},
                                {"image", result.image}}};
    out.events = commit(*live, std::span(&draft, 1));
    return out;
}

engine::SessionState SessionManager::close(const std::string& id) {
    auto live = find(id);
    auto round = lock_round(live->round_mu, id);
    auto [next, draft] = engine::close_session(state(id));
    std::lock_guard lock(live->mu);
    auto stamped = live->log->append_batch(std::span(&draft, 1), store::now_ms());
    live->events.insert(live->events.end(), stamped.begin(), stamped.end());
    live->state = next;
    live->cv.notify_all();
    return next;
}

engine::SessionState SessionManager::state(const std::string& id) const {
    auto live = find(id);
    std::lock_guard lock(live->mu);
    return live->state;
}

std::vector<SessionEvent> SessionManager::events(const std::string& id, std::uint64_t since, int wait_ms) const {
    auto live = find(id);
    std::unique_lock lock(live->mu);
    const auto ready = [&] { return !live->events.empty() && live->events.back().seq > since; };
    if (wait_ms > 0) live->cv.wait_for(lock, std::chrono::milliseconds(std::min(wait_ms, 25000)), ready);
    std::vector<SessionEvent> out;
    for (const auto& e : live->events)
        if (e.seq > since) out.push_back(e);
    return out;
}

std::vector<std::string> SessionManager::session_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : sessions_) ids.push_back(id);
    return ids;
}

std::optional<std::string> SessionManager::image(const std::string& hash) const { return blobs_.get(hash); }

} // namespace reflex::service
