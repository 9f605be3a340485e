#include "reflex/store/event_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

#include "reflex/backends/config.hpp"
#include "reflex/core/error.hpp"

namespace reflex::store {

std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::filesystem::path session_log_path(const std::filesystem::path& data_dir, const std::string& session_id) {
    return data_dir / "sessions" / (session_id + ".jsonl");
}

namespace {

void check_payload(const SessionEvent& e) {
    const auto& p = e.payload;
    switch (e.type) {
    case EventType::SessionCreated:
        p.at("id").get<std::string>();
        p.at("schema").get<AspectSchema>();
        p.at("rng_seed").get<std::uint64_t>();
        p.at("mode").get<backends::Kind>();
        break;
    case EventType::UserMessage: p.get<Turn>(); break;
    case EventType::Prompt: p.get<PromptRecord>(); break;
    case EventType::Generation: p.get<ImageRecord>(); break;
    case EventType::Caption: p.get<CaptionSet>(); break;
    case EventType::Ambiguity: p.get<AmbiguityLabel>(); break;
    case EventType::Question: p.get<Question>(); break;
    case EventType::Preference:
        p.at("winner_round").get<int>();
        p.at("loser_round").get<int>();
        break;
    case EventType::TrainingUpdate:
    case EventType::Tool2Invocation:
    case EventType::SessionClosed:
        if (!p.is_object()) throw Error(ErrorCode::InvalidArgument, "payload must be an object");
        break;
    }
}

} // namespace

std::vector<SessionEvent> parse_log(std::string_view text) {
    std::vector<SessionEvent> events;
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        const auto nl = text.find('\n');
        const auto where = "line " + std::to_string(lineno);
        if (nl == std::string_view::npos)
            throw Error(ErrorCode::CorruptLog, where + ": truncated (no line terminator)");
        const auto line = text.substr(0, nl);
        text.remove_prefix(nl + 1);
        SessionEvent event;
        try {
            event = Json::parse(line).get<SessionEvent>();
            check_payload(event);
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::CorruptLog, where + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::CorruptLog, where + ": " + e.what());
        }
        if (event.seq != events.size() + 1)
            throw Error(ErrorCode::CorruptLog, where + ": seq " + std::to_string(event.seq) + ", expected " +
                                                   std::to_string(events.size() + 1));
        if (!events.empty() && event.session_id != events.front().session_id)
            throw Error(ErrorCode::CorruptLog, where + ": session id changes to '" + event.session_id + "'");
        events.push_back(std::move(event));
    }
    return events;
}

std::vector<SessionEvent> read_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read log " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_log(buf.str());
}

EventLog::EventLog(std::filesystem::path path, std::string session_id, LogOptions options)
    : path_(std::move(path)), session_id_(std::move(session_id)), options_(options) {
    if (std::filesystem::exists(path_)) {
        const auto existing = read_log(path_);
        if (!existing.empty() && existing.front().session_id != session_id_)
            throw Error(ErrorCode::CorruptLog, path_.string() + " belongs to session " + existing.front().session_id);
        last_seq_ = existing.size();
    } else if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::IoError, "open " + path_.string() + ": " + std::strerror(errno));
}

EventLog::~EventLog() {
    if (fd_ >= 0) ::close(fd_);
}

void EventLog::write_lines(const std::string& text) {
    std::size_t done = 0;
    while (done < text.size()) {
        const auto n = ::write(fd_, text.data() + done, text.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(ErrorCode::IoError, "write " + path_.string() + ": " + std::strerror(errno));
        }
        done += static_cast<std::size_t>(n);
    }
    if (options_.fsync && ::fsync(fd_) != 0)
        throw Error(ErrorCode::IoError, "fsync " + path_.string() + ": " + std::strerror(errno));
}

void EventLog::append(const SessionEvent& event) {
    if (event.session_id != session_id_)
        throw Error(ErrorCode::InvalidArgument, "event for session " + event.session_id + " sent to " + session_id_);
    if (event.seq <= last_seq_)
        throw Error(ErrorCode::DuplicateSeq, "seq " + std::to_string(event.seq) + " already written");
    if (event.seq != last_seq_ + 1)
        throw Error(ErrorCode::SeqGap, "seq " + std::to_string(event.seq) + " after " + std::to_string(last_seq_));
    write_lines(Json(event).dump() + '\n');
    last_seq_ = event.seq;
}

std::vector<SessionEvent> EventLog::append_batch(std::span<const EventDraft> drafts, std::int64_t ts_ms) {
    std::vector<SessionEvent> stamped;
    std::string text;
    auto seq = last_seq_;
    for (const auto& d : drafts) {
        stamped.push_back({session_id_, ++seq, ts_ms, d.type, d.payload});
        text += Json(stamped.back()).dump();
        text += '\n';
    }
    if (!text.empty()) write_lines(text);
    last_seq_ = seq;
    return stamped;
}

} // namespace reflex::store
