#include "reflex/store/replay.hpp"

#include "reflex/backends/config.hpp"
#include "reflex/core/error.hpp"
#include "reflex/store/event_log.hpp"

namespace reflex::store {

namespace {

[[noreturn]] void corrupt(const SessionEvent& e, const std::string& why) {
    throw Error(ErrorCode::CorruptLog, "seq " + std::to_string(e.seq) + " (" + std::string(to_string(e.type)) + "): " + why);
}

} // namespace

ReplayResult replay(std::span<const SessionEvent> events) {
    ReplayResult out;
    auto& state = out.state;
    std::optional<engine::RoundRecord> pending;
    std::uint64_t pending_start = 0;
    bool created = false;

    // Each round must arrive in stage order: user_message, prompt, generation,
    // caption, ambiguity, question.
    int stage = 0;
    const auto expect_stage = [&](const SessionEvent& e, int want) {
        if (!pending || stage != want) corrupt(e, "out of round order");
        ++stage;
    };

    for (const auto& e : events) {
        if (!created && e.type != EventType::SessionCreated) corrupt(e, "log must start with session_created");
        if (state.status == engine::SessionStatus::Closed) corrupt(e, "event after session_closed");
        try {
            switch (e.type) {
            case EventType::SessionCreated: {
                if (created) corrupt(e, "duplicate session_created");
                const auto& p = e.payload;
                const auto persona = p.contains("persona") && !p.at("persona").is_null()
                                         ? std::optional<std::string>(p.at("persona").get<std::string>())
                                         : std::nullopt;
                state = engine::create_session(p.at("id").get<std::string>(), p.at("schema").get<AspectSchema>(),
                                               p.at("rng_seed").get<std::uint64_t>(), persona,
                                               p.at("mode").get<backends::Kind>())
                            .first;
                created = true;
                break;
            }
            case EventType::UserMessage: {
                if (pending) corrupt(e, "new user message before the previous round finished");
                auto turn = e.payload.get<Turn>();
                if (turn.round != state.current_round() + 1) corrupt(e, "round number out of sequence");
                state.memory.append(std::move(turn));
                pending.emplace();
                pending->round = state.current_round() + 1;
                pending_start = e.seq;
                stage = 1;
                break;
            }
            case EventType::Prompt: expect_stage(e, 1); pending->prompt = e.payload.get<PromptRecord>(); break;
            case EventType::Generation: expect_stage(e, 2); pending->image = e.payload.get<ImageRecord>(); break;
            case EventType::Caption: expect_stage(e, 3); pending->captions = e.payload.get<CaptionSet>(); break;
            case EventType::Ambiguity: expect_stage(e, 4); pending->ambiguity = e.payload.get<AmbiguityLabel>(); break;
            case EventType::Question: {
                expect_stage(e, 5);
                pending->question = e.payload.get<Question>();
                state.memory.append({pending->round, Speaker::Agent, pending->question.text, std::nullopt});
                state.rounds.push_back(std::move(*pending));
                pending.reset();
                stage = 0;
                break;
            }
            case EventType::Preference: ++out.side.preferences; break;
            case EventType::TrainingUpdate: ++out.side.training_updates; break;
            case EventType::Tool2Invocation: ++out.side.tool2_invocations; break;
            case EventType::SessionClosed:
                if (pending) corrupt(e, "session closed mid-round");
                state.status = engine::SessionStatus::Closed;
                break;
            }
        } catch (const Json::exception& ex) {
            corrupt(e, ex.what());
        } catch (const Error& ex) {
            if (ex.code() == ErrorCode::CorruptLog) throw;
            corrupt(e, ex.what());
        }
    }
    if (pending)
        throw Error(ErrorCode::CorruptLog, "round starting at seq " + std::to_string(pending_start) + " is incomplete");
    return out;
}

ReplayResult replay_file(const std::filesystem::path& path) {
    const auto events = read_log(path);
    return replay(events);
}

} // namespace reflex::store
