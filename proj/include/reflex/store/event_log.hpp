#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "reflex/core/events.hpp"

namespace reflex::store {

struct LogOptions {
    bool fsync = false; // fsync after every append batch
};

/**
 * Append-only JSON-lines log for one session. Opening an existing file
 * validates it and resumes after its last seq. Single writer; not
 * thread-safe on its own.
 */
class EventLog {
public:
    EventLog(std::filesystem::path path, std::string session_id, LogOptions options = {});
    ~EventLog();
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    /// Throws SeqGap (seq > last + 1), DuplicateSeq (seq <= last) or IoError.
    void append(const SessionEvent& event);

    /// Stamps drafts with consecutive seqs and the given time, then writes
    /// them with a single write call. Returns the stamped events.
    std::vector<SessionEvent> append_batch(std::span<const EventDraft> drafts, std::int64_t ts_ms);

    std::uint64_t last_seq() const noexcept { return last_seq_; }
    const std::filesystem::path& path() const noexcept { return path_; }
    const std::string& session_id() const noexcept { return session_id_; }

private:
    void write_lines(const std::string& text);

    std::filesystem::path path_;
    std::string session_id_;
    LogOptions options_;
    int fd_ = -1;
    std::uint64_t last_seq_ = 0;
};

/// Parses and integrity-checks a log: every line valid JSON and LF-terminated,
/// one session id, seq contiguous from 1, payloads decodable for their type.
/// Throws CorruptLog naming the first bad line.
std::vector<SessionEvent> read_log(const std::filesystem::path& path);
std::vector<SessionEvent> parse_log(std::string_view text);

/// <data_dir>/sessions/<id>.jsonl
std::filesystem::path session_log_path(const std::filesystem::path& data_dir, const std::string& session_id);

std::int64_t now_ms();

} // namespace reflex::store
