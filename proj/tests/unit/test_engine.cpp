#include <doctest.h>

#include "reflex/backends/toy.hpp"
#include "reflex/core/error.hpp"
#include "reflex/engine/engine.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace reflex;
using namespace reflex::engine;

namespace {

const AspectSchema& schema() {
    static const auto s = default_schema();
    return s;
}

backends::Backends toy_backends() { return backends::make_toy_backends(toy::WorldConfig{}); }

SessionState fresh(std::uint64_t seed) { return create_session("s", schema(), seed, std::nullopt, backends::Kind::Toy).first; }

UserInput says(const std::string& line) { return parse_user_input(line, schema()); }

CaptionSet captions_of(const AspectVector& v) {
    backends::GeneratedImage img;
    img.record.payload = v;
    return backends::ToyEvaluator{}.caption(img, schema());
}

struct FixedWriter final : backends::QuestionWriter {
    std::string reply;
    bool fail = false;
    std::string write(const AmbiguityLabel&, const CaptionSet&, const AspectSchema&) const override {
        if (fail) throw Error(ErrorCode::BackendUnavailable, "timed out");
        return reply;
    }
};

struct BrokenEvaluator final : backends::Evaluator {
    CaptionSet caption(const backends::GeneratedImage&, const AspectSchema&) const override {
        throw Error(ErrorCode::BackendUnavailable, "evaluator down");
    }
};

} // namespace

TEST_CASE("create and close sessions") {
    auto [s, ev] = create_session("abc", schema(), 5, "A", backends::Kind::Toy);
    CHECK(ev.type == EventType::SessionCreated);
    CHECK(ev.payload["id"] == "abc");
    CHECK(ev.payload["rng_seed"] == 5);
    CHECK(s.current_round() == 0);
    auto [closed, cev] = close_session(s);
    CHECK(closed.status == SessionStatus::Closed);
    CHECK(cev.type == EventType::SessionClosed);
    try {
        run_round(closed, says("Content=parrot"), toy_backends());
        FAIL("expected SessionClosed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SessionClosed);
    }
    CHECK_THROWS_AS(close_session(closed), Error);
}

TEST_CASE("round 1 never asks about the aspect the user gave") {
    const auto b = toy_backends();
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto r = run_round(fresh(seed), says("Content=parrot"), b);
        CHECK(r.record.prompt.structured == *parse_assignment("Content=parrot", schema()));
        CHECK(r.record.question.aspect != "Content");
        CHECK(r.record.ambiguity.scores.at("Content") == 1.0);
        CHECK(r.record.ambiguity.candidates == std::vector<std::string>{"Style", "Background", "Size"});
    }
}

TEST_CASE("round structure and events") {
    const auto r = run_round(fresh(1), says("Content=parrot"), toy_backends());
    CHECK(r.state.current_round() == 1);
    CHECK(r.record.round == 1);
    CHECK(r.record.image.seed == round_image_seed(1, 1));
    REQUIRE(r.events.size() == 6);
    const EventType order[] = {EventType::UserMessage, EventType::Prompt,    EventType::Generation,
                               EventType::Caption,     EventType::Ambiguity, EventType::Question};
    for (std::size_t i = 0; i < 6; ++i) CHECK(r.events[i].type == order[i]);
    REQUIRE(r.state.memory.turns.size() == 2);
    CHECK(r.state.memory.turns[0].text == "Content=parrot");
    CHECK(r.state.memory.turns[1].speaker == Speaker::Agent);
    CHECK(r.state.memory.turns[1].text == r.record.question.text);
    CHECK(r.state.rounds.back() == r.record);
}

TEST_CASE("fully specified input that the image matches: every aspect ties") {
    Rng rng(2);
    const auto v = toy::random_vector(schema(), rng);
    const auto r = run_round(fresh(3), UserInput{"", v}, toy_backends());
    CHECK(*r.record.image.toy() == v);
    for (const auto& [aspect, score] : r.record.ambiguity.scores) CHECK(score == 1.0);
    CHECK(r.record.ambiguity.candidates == std::vector<std::string>{"Content", "Style", "Background"});
    CHECK_FALSE(r.record.question.text.empty());
}

TEST_CASE("infer_ambiguity") {
    backends::ToyEmbedder embed;
    auto img = *parse_assignment("Content=parrot", schema());
    for (std::size_t i = 1; i < 7; ++i) img.slots[i] = 3;
    const auto caps = captions_of(img);
    const PromptRecord prompt{1, "parrot", *parse_assignment("Content=parrot", schema())};

    SUBCASE("unspecified aspects tie at 0, ordered by schema") {
        Rng rng(1);
        const auto label = infer_ambiguity(caps, prompt, schema(), embed, rng);
        CHECK(label.scores.at("Content") == 1.0);
        CHECK(label.scores.at("Perspective") == 0.0);
        CHECK(label.candidates == std::vector<std::string>{"Style", "Background", "Size"});
    }
    SUBCASE("seed 7 pick is stable") {
        Rng rng(7);
        const auto label = infer_ambiguity(caps, prompt, schema(), embed, rng);
        testing::check_golden("ambiguity_seed7.json", Json(label).dump(2) + "\n");
    }
    SUBCASE("the pick is uniform over the candidates") {
        std::map<std::string, int> counts;
        for (std::uint64_t s = 0; s < 3000; ++s) {
            Rng rng(s);
            ++counts[infer_ambiguity(caps, prompt, schema(), embed, rng).chosen];
        }
        REQUIRE(counts.size() == 3);
        for (const auto& [aspect, n] : counts) CHECK(std::abs(n - 1000) < 100);
    }
    SUBCASE("fewer than three eligible aspects") {
        const PromptRecord wide{1, phrase_stack(img, schema()), img};
        auto almost = img;
        almost.slots[6] = 4;
        almost.slots[5] = 4;
        Rng rng(1);
        const auto label = infer_ambiguity(captions_of(almost), wide, schema(), embed, rng);
        CHECK(label.candidates == std::vector<std::string>{"Perspective", "Other"});
    }
    SUBCASE("the chosen aspect never outscores a non-candidate") {
        Rng gen(5);
        for (int t = 0; t < 300; ++t) {
            const auto v = toy::random_vector(schema(), gen);
            auto p = AspectVector::empty_for(schema());
            for (std::size_t i = 0; i < 7; ++i)
                if (gen.bernoulli(0.5)) p.slots[i] = gen.bernoulli(0.5) ? *v.slots[i] : static_cast<int>(gen.below(16));
            Rng rng(gen.next_u64());
            const auto label = infer_ambiguity(captions_of(v), {1, phrase_stack(p, schema()), p}, schema(), embed, rng);
            const double chosen = label.scores.at(label.chosen);
            for (const auto& [aspect, score] : label.scores)
                if (std::find(label.candidates.begin(), label.candidates.end(), aspect) == label.candidates.end())
                    CHECK(score >= chosen);
        }
    }
    SUBCASE("incomplete captions") {
        auto partial = caps;
        partial.captions.erase("Other");
        Rng rng(1);
        CHECK_THROWS_AS(infer_ambiguity(partial, prompt, schema(), embed, rng), Error);
    }
}

TEST_CASE("make_question") {
    AmbiguityLabel label{1, {}, {"Style"}, "Style"};
    const CaptionSet caps;
    SUBCASE("template") {
        const auto q = make_question(label, caps, schema(), nullptr);
        CHECK(q.text == "What should the Style of the image be?");
        CHECK(q.source == QuestionSource::Template);
        CHECK(q.aspect == "Style");
    }
    SUBCASE("backend failure falls back to the template") {
        FixedWriter w;
        w.fail = true;
        const auto q = make_question(label, caps, schema(), &w);
        CHECK(q.source == QuestionSource::Template);
        CHECK(q.text == "What should the Style of the image be?");
    }
    SUBCASE("backend question must name the aspect") {
        label.chosen = "Color";
        FixedWriter w;
        w.reply = "The parrot is blue now. Which color would you like instead?";
        auto q = make_question(label, caps, schema(), &w);
        CHECK(q.source == QuestionSource::Backend);
        CHECK(q.text == w.reply);
        w.reply = "Anything else?";
        q = make_question(label, caps, schema(), &w);
        CHECK(q.source == QuestionSource::Template);
        CHECK(q.text == "What should the Color of the image be?");
    }
}

TEST_CASE("failing stages propagate and leave the input state alone") {
    auto state = run_round(fresh(4), says("Content=parrot"), toy_backends()).state;
    const auto before = canonical(state);
    auto broken = toy_backends();
    broken.evaluator = std::make_shared<BrokenEvaluator>();
    try {
        run_round(state, says("Color=red"), broken);
        FAIL("expected BackendUnavailable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BackendUnavailable);
    }
    CHECK(canonical(state) == before);

    for (auto stage : {Stage::Summarize, Stage::Generate, Stage::Caption, Stage::InferAmbiguity, Stage::MakeQuestion}) {
        std::vector<Stage> seen;
        const auto hook = [&](Stage s) {
            seen.push_back(s);
            if (s == stage) throw Error(ErrorCode::BackendUnavailable, "injected");
        };
        CHECK_THROWS_AS(run_round(state, says("Color=red"), toy_backends(), hook), Error);
        CHECK(seen.back() == stage);
        CHECK(canonical(state) == before);
    }
}

TEST_CASE("empty messages are rejected") {
    CHECK_THROWS_AS(run_round(fresh(1), UserInput{}, toy_backends()), Error);
    CHECK_THROWS_AS(run_round(fresh(1), UserInput{"", AspectVector::empty_for(schema())}, toy_backends()), Error);
}

TEST_CASE("monotone pinning with a compliant user") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = testing::simulated_session("m", schema(), seed, std::nullopt, 9);
        std::size_t prev = 0;
        for (const auto& r : s.state.rounds) {
            const auto n = r.prompt.structured->specified_count();
            if (prev < 7) CHECK(n == prev + 1);
            else CHECK(n == 7);
            prev = n;
        }
    }
}

TEST_CASE("toy rounds are deterministic") {
    const auto a = testing::simulated_session("d", schema(), 99, std::nullopt, 5);
    const auto b = testing::simulated_session("d", schema(), 99, std::nullopt, 5);
    CHECK(a.state == b.state);
    CHECK(canonical(a.state) == canonical(b.state));
    const auto c = testing::simulated_session("d", schema(), 100, std::nullopt, 5);
    CHECK(canonical(a.state) != canonical(c.state));
}

TEST_CASE("session state JSON round trip") {
    auto policy = std::make_shared<dpo::PolicyHandle>(dpo::default_reference_policy());
    const auto s = testing::simulated_session("j", fashion_schema(), 4, "C", 3, policy).state;
    const auto back = Json::parse(canonical(s)).get<SessionState>();
    CHECK(back == s);
    CHECK(canonical(back) == canonical(s));
}
