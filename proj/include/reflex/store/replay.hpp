#pragma once

#include <filesystem>
#include <span>

#include "reflex/core/events.hpp"
#include "reflex/engine/engine.hpp"

namespace reflex::store {

/// Counts of the events that do not change SessionState.
struct SideEvents {
    std::size_t preferences = 0;
    std::size_t training_updates = 0;
    std::size_t tool2_invocations = 0;
};

struct ReplayResult {
    engine::SessionState state;
    SideEvents side;
};

/// Folds a checked event sequence into the session state it describes.
/// An empty sequence yields a default (empty) session. A trailing round
/// without its question event is reported as CorruptLog.
ReplayResult replay(std::span<const SessionEvent> events);
ReplayResult replay_file(const std::filesystem::path& path);

} // namespace reflex::store
