#include <doctest.h>

#include "reflex/core/error.hpp"
#include "reflex/store/blob_store.hpp"
#include "reflex/store/event_log.hpp"
#include "reflex/store/replay.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace reflex;
using namespace reflex::store;

namespace {

SessionEvent event(std::uint64_t seq, EventType type = EventType::SessionClosed) {
    return {"s1", seq, 1000, type, Json{{"rounds", 0}}};
}

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

std::string error_text(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("append enforces contiguous sequence numbers") {
    const auto dir = testing::scratch_dir("append");
    EventLog log(dir / "s1.jsonl", "s1");
    CHECK_NOTHROW(log.append(event(1)));
    CHECK(code_of([&] { log.append(event(3)); }) == ErrorCode::SeqGap);
    CHECK(code_of([&] { log.append(event(1)); }) == ErrorCode::DuplicateSeq);
    CHECK_NOTHROW(log.append(event(2)));
    CHECK(log.last_seq() == 2);
    CHECK(code_of([&] { log.append({"other", 3, 0, EventType::SessionClosed, Json::object()}); }) == ErrorCode::InvalidArgument);
    std::filesystem::remove_all(dir);
}

TEST_CASE("append_batch stamps and the log resumes after reopening") {
    const auto dir = testing::scratch_dir("batch");
    const auto path = dir / "s1.jsonl";
    const auto s = testing::scripted_session("s1", default_schema(), 1, {"Content=parrot"});
    {
        EventLog log(path, "s1");
        const auto stamped = log.append_batch(std::span(s.drafts).first(1), 42);
        REQUIRE(stamped.size() == 1);
        CHECK(stamped[0].seq == 1);
        CHECK(stamped[0].ts_ms == 42);
    }
    const auto before = testing::slurp(path);
    {
        EventLog log(path, "s1");
        CHECK(log.last_seq() == 1);
        const auto stamped = log.append_batch(std::span(s.drafts).subspan(1), 43);
        CHECK(stamped.front().seq == 2);
        CHECK(stamped.back().seq == 7);
    }
    const auto after = testing::slurp(path);
    CHECK(after.compare(0, before.size(), before) == 0);
    CHECK(replay_file(path).state == s.state);
    CHECK_THROWS_AS(EventLog(path, "someone-else"), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("replay of an empty log") {
    const auto r = replay({});
    CHECK(r.state == engine::SessionState{});
    CHECK(r.side.preferences == 0);
}

TEST_CASE("integrity checks") {
    const auto dir = testing::scratch_dir("corrupt");
    const auto s = testing::scripted_session("s1", default_schema(), 1, {"Content=parrot", "Color=red"});
    const auto path = dir / "s1.jsonl";
    testing::write_log(path, "s1", s.drafts);
    const auto text = testing::slurp(path);
    const auto lines = std::count(text.begin(), text.end(), '\n');

    SUBCASE("truncated last line") {
        const auto cut = text.substr(0, text.size() - 10);
        const auto msg = error_text([&] { parse_log(cut); });
        CHECK(msg.find("CorruptLog") == 0);
        CHECK(msg.find("line " + std::to_string(lines)) != std::string::npos);
    }
    SUBCASE("garbage line") {
        auto bad = text;
        bad.insert(text.find('\n') + 1, "{not json}\n");
        CHECK(error_text([&] { parse_log(bad); }).find("line 2") != std::string::npos);
    }
    SUBCASE("sequence gap") {
        auto events = parse_log(text);
        std::string gapped;
        for (std::size_t i = 0; i < events.size(); ++i)
            if (i != 3) gapped += Json(events[i]).dump() + "\n";
        CHECK(code_of([&] { parse_log(gapped); }) == ErrorCode::CorruptLog);
    }
    SUBCASE("incomplete final round") {
        auto events = parse_log(text);
        events.pop_back();
        const auto msg = error_text([&] { replay(events); });
        CHECK(msg.find("seq 8") != std::string::npos);
    }
    SUBCASE("stages out of order") {
        auto events = parse_log(text);
        std::swap(events[2].payload, events[3].payload);
        std::swap(events[2].type, events[3].type);
        CHECK(code_of([&] { replay(events); }) == ErrorCode::CorruptLog);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("replay reproduces the live state") {
    const auto dir = testing::scratch_dir("live");
    auto policy = std::make_shared<dpo::PolicyHandle>(dpo::default_reference_policy());
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto s = testing::simulated_session("live", seed % 2 ? default_schema() : fashion_schema(), seed,
                                                  seed % 3 ? std::optional<std::string>("D") : std::nullopt,
                                                  1 + static_cast<int>(seed % 6), policy);
        testing::write_log(dir / "live.jsonl", "live", s.drafts);
        const auto r = replay_file(dir / "live.jsonl");
        CHECK(r.state == s.state);
        CHECK(canonical(r.state) == canonical(s.state));
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("golden session logs") {
    const bool update = std::getenv("REFLEX_UPDATE_GOLDEN") && std::string(std::getenv("REFLEX_UPDATE_GOLDEN")) == "1";
    const auto dir = testing::golden_log_dir();
    const auto scratch = testing::scratch_dir("golden");
    for (const auto& scenario : testing::golden_scenarios()) {
        CAPTURE(scenario.name);
        const auto s = scenario.build();
        const auto log_path = dir / (scenario.name + ".jsonl");
        const auto state_path = dir / (scenario.name + ".state.json");
        if (update) {
            std::filesystem::create_directories(dir);
            testing::write_log(log_path, s.state.id, s.drafts);
            std::ofstream(state_path, std::ios::binary | std::ios::trunc) << canonical(s.state) << '\n';
        }
        // The scenario still produces the committed bytes...
        testing::write_log(scratch / "log.jsonl", s.state.id, s.drafts);
        CHECK(testing::slurp(scratch / "log.jsonl") == testing::slurp(log_path));
        // ...and the committed log folds into the committed state.
        const auto replayed = replay_file(log_path);
        CHECK(canonical(replayed.state) + "\n" == testing::slurp(state_path));
    }
    std::filesystem::remove_all(scratch);
}

TEST_CASE("overwrite golden: a later answer replaces an earlier one") {
    const auto r = replay_file(testing::golden_log_dir() / "toy_overwrite.jsonl");
    REQUIRE(r.state.rounds.size() == 2);
    CHECK(r.state.rounds[1].prompt.structured == parse_assignment("Content=parrot, Color=blue", default_schema()));
    CHECK(r.state.rounds[1].prompt.text == "parrot, blue");
}

TEST_CASE("side events are counted") {
    const auto r = replay_file(testing::golden_log_dir() / "fashion_persona_closed.jsonl");
    CHECK(r.side.preferences == 1);
    CHECK(r.state.status == engine::SessionStatus::Closed);
    CHECK(r.state.persona == "B");
    CHECK(r.state.rounds.back().image.trajectory.has_value());
}

TEST_CASE("blob store") {
    const auto dir = testing::scratch_dir("blobs");
    BlobStore blobs(dir);
    const std::string bytes = "\x89PNG fake";
    const auto hash = blobs.put(bytes);
    CHECK(hash.size() == 64);
    CHECK(blobs.put(bytes) == hash);
    CHECK(blobs.get(hash) == bytes);
    CHECK_FALSE(blobs.get(std::string(64, '0')));
    CHECK_FALSE(blobs.get("../../etc/passwd"));
    std::filesystem::remove_all(dir);
}
