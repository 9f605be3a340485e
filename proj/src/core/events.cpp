#include "reflex/core/events.hpp"

#include <array>
#include <utility>

namespace reflex {

namespace {

constexpr std::array<std::pair<EventType, std::string_view>, 11> kNames{{
    {EventType::SessionCreated, "session_created"},
    {EventType::UserMessage, "user_message"},
    {EventType::Prompt, "prompt"},
    {EventType::Generation, "generation"},
    {EventType::Caption, "caption"},
    {EventType::Ambiguity, "ambiguity"},
    {EventType::Question, "question"},
    {EventType::Preference, "preference"},
    {EventType::TrainingUpdate, "training_update"},
    {EventType::Tool2Invocation, "tool2_invocation"},
    {EventType::SessionClosed, "session_closed"},
}};

} // namespace

std::string_view to_string(EventType type) {
    for (const auto& [t, name] : kNames)
        if (t == type) return name;
    return "unknown";
}

std::optional<EventType> parse_event_type(std::string_view text) {
    for (const auto& [t, name] : kNames)
        if (name == text) return t;
    return std::nullopt;
}

void to_json(Json& j, const EventType& t) { j = std::string(to_string(t)); }

void from_json(const Json& j, EventType& t) {
    const auto text = j.get<std::string>();
    const auto parsed = parse_event_type(text);
    if (!parsed) throw Error(ErrorCode::InvalidArgument, "unknown event type '" + text + "'");
    t = *parsed;
}

void to_json(Json& j, const SessionEvent& e) {
    j = Json{{"session_id", e.session_id}, {"seq", e.seq}, {"ts_ms", e.ts_ms}, {"type", e.type}, {"payload", e.payload}};
}

void from_json(const Json& j, SessionEvent& e) {
    j.at("session_id").get_to(e.session_id);
    j.at("seq").get_to(e.seq);
    j.at("ts_ms").get_to(e.ts_ms);
    j.at("type").get_to(e.type);
    e.payload = j.at("payload");
}

} // namespace reflex
