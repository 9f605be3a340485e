#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "reflex/core/json.hpp"

namespace reflex {

enum class EventType {
    SessionCreated,
    UserMessage,
    Prompt,
    Generation,
    Caption,
    Ambiguity,
    Question,
    Preference,
    TrainingUpdate,
    Tool2Invocation,
    SessionClosed,
};

std::string_view to_string(EventType type);
std::optional<EventType> parse_event_type(std::string_view text);

/// An event before the log assigns it a sequence number and timestamp.
struct EventDraft {
    EventType type;
    Json payload;
};

/// One line of a session log.
struct SessionEvent {
    std::string session_id;
    std::uint64_t seq = 0;
    std::int64_t ts_ms = 0;
    EventType type = EventType::SessionCreated;
    Json payload;

    bool operator==(const SessionEvent&) const = default;
};

void to_json(Json& j, const EventType& t);
void from_json(const Json& j, EventType& t);
void to_json(Json& j, const SessionEvent& e);
void from_json(const Json& j, SessionEvent& e);

} // namespace reflex
