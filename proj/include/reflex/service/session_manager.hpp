#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "reflex/aae/aae.hpp"
#include "reflex/backends/config.hpp"
#include "reflex/core/schema.hpp"
#include "reflex/dpo/policy_store.hpp"
#include "reflex/dpo/trainer.hpp"
#include "reflex/engine/engine.hpp"
#include "reflex/store/blob_store.hpp"
#include "reflex/store/event_log.hpp"
#include "reflex/toyworld/toyworld.hpp"

namespace reflex::service {

struct ServiceConfig {
    std::filesystem::path data_dir = "reflex-data";
    /// Remote sessions use this (plus the persona's model).
    backends::BackendConfig backend;
    backends::PersonaTable personas = backends::default_personas();
    /// Toy world for toy sessions; its schema is replaced by the session's.
    toy::WorldConfig world;
    dpo::TrainerConfig trainer;
    store::LogOptions log;
};

struct CreateRequest {
    std::string schema = "default";
    std::optional<std::string> persona;
    backends::Kind mode = backends::Kind::Toy;
    std::optional<std::uint64_t> seed;
};

struct MessageOutcome {
    engine::RoundRecord record;
    std::vector<SessionEvent> events;
};

struct PreferenceOutcome {
    std::size_t pair_count = 0;
    std::size_t pairs_until_training = 0;
    bool trained = false;
    std::vector<SessionEvent> events;
};

struct TrainOutcome {
    std::size_t pair_count = 0;
    std::vector<dpo::TrainingStep> curve;
    double kl = 0.0;
    std::vector<SessionEvent> events;
};

struct AaeOutcome {
    int round = 0;
    AspectVector image;
    aae::NeglectReport report;
    std::vector<SessionEvent> events;
};

/**
 * Owns every session: its state, its event log and the per-persona policies.
 * Each mutation runs under the session's round lock and is committed by one
 * log batch; a second mutation arriving meanwhile gets RoundInFlight.
 * Existing logs under data_dir are replayed on construction.
 */
class SessionManager {
public:
    explicit SessionManager(ServiceConfig cfg);
    ~SessionManager();

    engine::SessionState create(const CreateRequest& req);
    MessageOutcome message(const std::string& id, const engine::UserInput& input, const engine::StageHook& hook = {});
    PreferenceOutcome preference(const std::string& id, int winner_round, int loser_round);
    TrainOutcome refine_dpo(const std::string& id);
    AaeOutcome refine_aae(const std::string& id, const aae::ToolConfig& tool, std::optional<double> neglect_prob);
    engine::SessionState close(const std::string& id);

    engine::SessionState state(const std::string& id) const;
    /// Events with seq > since; waits up to wait_ms for one to arrive.
    std::vector<SessionEvent> events(const std::string& id, std::uint64_t since, int wait_ms = 0) const;
    std::vector<std::string> session_ids() const;
    std::optional<std::string> image(const std::string& hash) const;

    /// Image model a session's persona resolves to (nullopt without persona).
    std::optional<std::string> model_for(const engine::SessionState& s) const;
    std::shared_ptr<dpo::PolicyHandle> policy(const std::string& persona_key);
    std::filesystem::path pair_store_path(const std::string& persona_key) const;
    const SchemaRegistry& schemas() const noexcept { return schemas_; }
    const ServiceConfig& config() const noexcept { return cfg_; }

private:
    struct Live;
    std::shared_ptr<Live> find(const std::string& id) const;
    backends::Backends backends_for(const engine::SessionState& s);
    std::vector<SessionEvent> commit(Live& live, std::span<const EventDraft> drafts);
    /// Trains the persona policy on its whole pair store; returns the
    /// training_update drafts to commit.
    std::vector<EventDraft> train_persona(const std::string& persona_key, TrainOutcome& out);

    ServiceConfig cfg_;
    SchemaRegistry schemas_;
    store::BlobStore blobs_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Live>> sessions_;
    std::map<std::string, std::shared_ptr<dpo::PolicyHandle>> policies_;
    std::mutex train_mu_;
    std::uint64_t next_id_ = 1;
};

/// "default" for sessions without a persona.
std::string persona_key(const engine::SessionState& s);

} // namespace reflex::service
