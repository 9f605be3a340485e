#include "reflex/engine/engine.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "reflex/backends/config.hpp"
#include "reflex/core/error.hpp"

namespace reflex::engine {

std::string_view to_string(Stage stage) {
    switch (stage) {
    case Stage::Summarize: return "summarize";
    case Stage::Generate: return "generate";
    case Stage::Caption: return "caption";
    case Stage::InferAmbiguity: return "infer_ambiguity";
    case Stage::MakeQuestion: return "make_question";
    }
    return "unknown";
}

std::pair<SessionState, EventDraft> create_session(std::string id, AspectSchema schema, std::uint64_t rng_seed,
                                                   std::optional<std::string> persona, backends::Kind mode) {
    validate_schema(schema);
    SessionState state;
    state.id = std::move(id);
    state.schema = std::move(schema);
    state.rng_seed = rng_seed;
    state.persona = std::move(persona);
    state.mode = mode;
    Json payload{{"id", state.id},
                 {"schema", state.schema},
                 {"rng_seed", state.rng_seed},
                 {"persona", state.persona ? Json(*state.persona) : Json(nullptr)},
                 {"mode", state.mode}};
    return {std::move(state), EventDraft{EventType::SessionCreated, std::move(payload)}};
}

std::pair<SessionState, EventDraft> close_session(const SessionState& state) {
    if (state.status == SessionStatus::Closed) throw Error(ErrorCode::SessionClosed, "session already closed");
    auto next = state;
    next.status = SessionStatus::Closed;
    return {std::move(next), EventDraft{EventType::SessionClosed, Json{{"rounds", state.current_round()}}}};
}

UserInput parse_user_input(const std::string& line, const AspectSchema& schema) {
    UserInput input;
    input.text = line;
    input.structured = parse_assignment(line, schema);
    return input;
}

std::uint64_t round_image_seed(std::uint64_t rng_seed, int round) {
    return Rng::derive_seed(rng_seed, "generate", {static_cast<std::uint64_t>(round)});
}

AmbiguityLabel infer_ambiguity(const CaptionSet& captions, const PromptRecord& prompt, const AspectSchema& schema,
                               const backends::Embedder& embedder, Rng& rng) {
    validate_captions(captions, schema);
    AmbiguityLabel label;
    label.round = captions.round;
    std::vector<double> scores(schema.size());
    for (std::size_t i = 0; i < schema.size(); ++i) {
        scores[i] = std::clamp(embedder.similarity(prompt.text, captions.captions.at(schema.aspects[i])), 0.0, 1.0);
        label.scores[schema.aspects[i]] = scores[i];
    }

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (scores[i] < 1.0) eligible.push_back(i);
    if (eligible.empty()) {
        eligible.resize(schema.size());
        std::iota(eligible.begin(), eligible.end(), std::size_t{0});
    }
    std::stable_sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    eligible.resize(std::min<std::size_t>(3, eligible.size()));

    for (auto i : eligible) label.candidates.push_back(schema.aspects[i]);
    label.chosen = label.candidates[rng.below(label.candidates.size())];
    return label;
}

namespace {

bool mentions(std::string_view text, std::string_view word) {
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    };
    return lower(text).find(lower(word)) != std::string::npos;
}

} // namespace

Question make_question(const AmbiguityLabel& label, const CaptionSet& captions, const AspectSchema& schema,
                       const backends::QuestionWriter* writer) {
    const auto idx = schema.require_index(label.chosen);
    Question q;
    q.round = label.round;
    q.aspect = label.chosen;
    if (writer) {
        try {
            auto text = writer->write(label, captions, schema);
            if (!text.empty() && mentions(text, label.chosen)) {
                q.text = std::move(text);
                q.source = QuestionSource::Backend;
                return q;
            }
        } catch (const Error&) {
            // fall through to the template
        }
    }
    q.text = schema.question_for(idx);
    q.source = QuestionSource::Template;
    return q;
}

RoundResult run_round(const SessionState& state, const UserInput& input, const backends::Backends& backends,
                      const StageHook& hook) {
    if (state.status == SessionStatus::Closed) throw Error(ErrorCode::SessionClosed, "session " + state.id + " is closed");
    if (input.structured) validate_vector(*input.structured, state.schema);
    std::string text = input.text;
    if (text.empty() && input.structured) text = phrase_stack(*input.structured, state.schema);
    if (text.empty()) throw Error(ErrorCode::InvalidArgument, "user message is empty");

    const auto stage = [&](Stage s) {
        if (hook) hook(s);
    };

    RoundResult out{state, {}, {}, {}};
    const int round = state.current_round() + 1;
    auto& next = out.state;
    auto& rec = out.record;
    rec.round = round;

    Turn user_turn{round, Speaker::User, std::move(text), input.structured};
    next.memory.append(user_turn);
    out.events.push_back({EventType::UserMessage, Json(user_turn)});

    stage(Stage::Summarize);
    rec.prompt = backends.summarizer->summarize(next.memory, state.schema, round);
    out.events.push_back({EventType::Prompt, Json(rec.prompt)});

    stage(Stage::Generate);
    auto image = backends.generator->generate(rec.prompt, round_image_seed(state.rng_seed, round), state.schema);
    image.record.round = round;
    rec.image = image.record;
    out.events.push_back({EventType::Generation, Json(rec.image)});

    stage(Stage::Caption);
    rec.captions = backends.evaluator->caption(image, state.schema);
    rec.captions.round = round;
    validate_captions(rec.captions, state.schema);
    out.events.push_back({EventType::Caption, Json(rec.captions)});

    stage(Stage::InferAmbiguity);
    auto rng = Rng::derive(state.rng_seed, "ambiguity", {static_cast<std::uint64_t>(round)});
    rec.ambiguity = infer_ambiguity(rec.captions, rec.prompt, state.schema, *backends.embedder, rng);
    out.events.push_back({EventType::Ambiguity, Json(rec.ambiguity)});

    stage(Stage::MakeQuestion);
    rec.question = make_question(rec.ambiguity, rec.captions, state.schema, backends.questioner.get());
    next.memory.append({round, Speaker::Agent, rec.question.text, std::nullopt});
    out.events.push_back({EventType::Question, Json(rec.question)});

    next.rounds.push_back(rec);
    out.image_bytes = std::move(image.bytes);
    return out;
}

void to_json(Json& j, const RoundRecord& r) {
    j = Json{{"round", r.round},         {"prompt", r.prompt},       {"image", r.image},
             {"captions", r.captions},   {"ambiguity", r.ambiguity}, {"question", r.question}};
}

void from_json(const Json& j, RoundRecord& r) {
    j.at("round").get_to(r.round);
    j.at("prompt").get_to(r.prompt);
    j.at("image").get_to(r.image);
    j.at("captions").get_to(r.captions);
    j.at("ambiguity").get_to(r.ambiguity);
    j.at("question").get_to(r.question);
}

void to_json(Json& j, const SessionStatus& s) { j = s == SessionStatus::Open ? "open" : "closed"; }

void from_json(const Json& j, SessionStatus& s) {
    const auto text = j.get<std::string>();
    if (text == "open") s = SessionStatus::Open;
    else if (text == "closed") s = SessionStatus::Closed;
    else throw Error(ErrorCode::InvalidArgument, "unknown session status '" + text + "'");
}

void to_json(Json& j, const SessionState& s) {
    j = Json{{"id", s.id},
             {"schema", s.schema},
             {"memory", s.memory},
             {"rounds", s.rounds},
             {"rng_seed", s.rng_seed},
             {"persona", s.persona ? Json(*s.persona) : Json(nullptr)},
             {"mode", s.mode},
             {"status", s.status}};
}

void from_json(const Json& j, SessionState& s) {
    j.at("id").get_to(s.id);
    j.at("schema").get_to(s.schema);
    j.at("memory").get_to(s.memory);
    j.at("rounds").get_to(s.rounds);
    j.at("rng_seed").get_to(s.rng_seed);
    s.persona = j.at("persona").is_null() ? std::nullopt : std::optional<std::string>(j.at("persona").get<std::string>());
    j.at("mode").get_to(s.mode);
    j.at("status").get_to(s.status);
}

} // namespace reflex::engine
