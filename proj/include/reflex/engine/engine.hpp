#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "reflex/backends/backend.hpp"
#include "reflex/core/events.hpp"
#include "reflex/core/rng.hpp"
#include "reflex/core/types.hpp"

namespace reflex::engine {

/// All five stages of one dialogue round.
struct RoundRecord {
    int round = 0;
    PromptRecord prompt;
    ImageRecord image;
    CaptionSet captions;
    AmbiguityLabel ambiguity;
    Question question;

    bool operator==(const RoundRecord&) const = default;
};

enum class SessionStatus { Open, Closed };

struct SessionState {
    std::string id;
    AspectSchema schema;
    DialogueMemory memory;
    std::vector<RoundRecord> rounds;
    std::uint64_t rng_seed = 0;
    std::optional<std::string> persona;
    backends::Kind mode = backends::Kind::Toy;
    SessionStatus status = SessionStatus::Open;

    int current_round() const noexcept { return static_cast<int>(rounds.size()); }

    bool operator==(const SessionState&) const = default;
};

/// Fresh session plus the session_created event that records it.
std::pair<SessionState, EventDraft> create_session(std::string id, AspectSchema schema, std::uint64_t rng_seed,
                                                   std::optional<std::string> persona, backends::Kind mode);

/// Closes the session (further rounds throw SessionClosed).
std::pair<SessionState, EventDraft> close_session(const SessionState& state);

/// One user message: free text, a structured assignment, or both.
struct UserInput {
    std::string text;
    std::optional<AspectVector> structured;
};

/// Toy-mode reading of a typed line: "Color=red" becomes structured,
/// anything else stays free text.
UserInput parse_user_input(const std::string& line, const AspectSchema& schema);

enum class Stage { Summarize, Generate, Caption, InferAmbiguity, MakeQuestion };

std::string_view to_string(Stage stage);

/// Called before each stage runs; throwing aborts the round. Used for fault
/// injection and tracing.
using StageHook = std::function<void(Stage)>;

struct RoundResult {
    SessionState state;
    RoundRecord record;
    /// user_message, prompt, generation, caption, ambiguity, question.
    std::vector<EventDraft> events;
    /// Remote image bytes destined for the blob store (empty in toy mode).
    std::string image_bytes;
};

/// Image seed for round r: derive(rng_seed, "generate", {r}).
std::uint64_t round_image_seed(std::uint64_t rng_seed, int round);

/**
 * One external-reflection round: store the user words, summarize a prompt,
 * generate, caption, infer ambiguity, ask a question, store the question.
 *
 * Pure with respect to `state`: the input is never modified, so a throw from
 * any stage leaves the caller's session exactly as it was.
 */
RoundResult run_round(const SessionState& state, const UserInput& input, const backends::Backends& backends,
                      const StageHook& hook = {});

/**
 * Scores every caption against the prompt text and picks the aspect to ask
 * about. Aspects scoring below 1 are eligible (every aspect when none is);
 * candidates are the up-to-3 lowest eligible scores, ties in schema order;
 * the chosen aspect is a uniform draw from the candidates.
 */
AmbiguityLabel infer_ambiguity(const CaptionSet& captions, const PromptRecord& prompt, const AspectSchema& schema,
                               const backends::Embedder& embedder, Rng& rng);

/// Template question for label.chosen, or the writer's question when a writer
/// is given and its reply is usable (non-empty and names the aspect).
Question make_question(const AmbiguityLabel& label, const CaptionSet& captions, const AspectSchema& schema,
                       const backends::QuestionWriter* writer);

void to_json(Json& j, const RoundRecord& r);
void from_json(const Json& j, RoundRecord& r);
void to_json(Json& j, const SessionStatus& s);
void from_json(const Json& j, SessionStatus& s);
void to_json(Json& j, const SessionState& s);
void from_json(const Json& j, SessionState& s);

} // namespace reflex::engine
