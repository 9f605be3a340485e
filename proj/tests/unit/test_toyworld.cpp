#include <doctest.h>

#include "reflex/core/error.hpp"
#include "reflex/toyworld/simulation.hpp"
#include "reflex/toyworld/toyworld.hpp"

using namespace reflex;
using namespace reflex::toy;

namespace {

AspectVector prompt_with(const AspectSchema& s, std::initializer_list<std::pair<std::size_t, int>> slots) {
    auto v = AspectVector::empty_for(s);
    for (auto [i, value] : slots) v.slots[i] = value;
    return v;
}

} // namespace

TEST_CASE("toy_generate") {
    WorldConfig cfg;
    Rng rng(5);
    SUBCASE("fully specified prompt without neglect is copied") {
        for (int i = 0; i < 50; ++i) {
            const auto p = random_vector(cfg.schema, rng);
            CHECK(toy_generate(p, rng.next_u64(), cfg) == p);
        }
    }
    SUBCASE("specified slots are kept, the rest are filled") {
        const auto p = prompt_with(cfg.schema, {{0, 3}, {4, 9}});
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto img = toy_generate(p, seed, cfg);
            CHECK(img.fully_specified());
            CHECK(img.slots[0] == 3);
            CHECK(img.slots[4] == 9);
        }
    }
    SUBCASE("deterministic in (prompt, seed)") {
        const auto p = prompt_with(cfg.schema, {{2, 1}});
        CHECK(toy_generate(p, 77, cfg) == toy_generate(p, 77, cfg));
        CHECK(toy_generate(p, 77, cfg) != toy_generate(p, 78, cfg));
    }
    SUBCASE("neglect: three specified slots lose 0.6 on average") {
        cfg.neglect_prob = 0.2;
        const auto p = prompt_with(cfg.schema, {{0, 1}, {1, 2}, {2, 3}});
        long neglected = 0;
        for (std::uint64_t seed = 0; seed < 10000; ++seed) {
            const auto img = toy_generate(p, seed, cfg);
            for (std::size_t i = 0; i < 3; ++i) neglected += img.slots[i] != p.slots[i];
        }
        CHECK(std::abs(neglected / 10000.0 - 0.6) <= 0.05);
    }
    SUBCASE("forced slots are never neglected") {
        cfg.neglect_prob = 1.0;
        const auto p = prompt_with(cfg.schema, {{0, 1}, {1, 2}});
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto img = toy_generate(p, seed, cfg, {1});
            CHECK(img.slots[0] != 1);
            CHECK(img.slots[1] == 2);
        }
    }
}

TEST_CASE("alignment") {
    const auto s = default_schema();
    Rng rng(9);
    const auto x = random_vector(s, rng);
    CHECK(alignment(x, x) == 1.0);
    auto y = x;
    for (auto& slot : y.slots) slot = (*slot + 1) % s.vocab_size;
    CHECK(alignment(x, y) == 0.0);
    for (std::size_t i = 0; i < 4; ++i) y.slots[i] = x.slots[i];
    CHECK(alignment(x, y) == doctest::Approx(4.0 / 7.0));

    auto other = y;
    other.schema = "fashion";
    CHECK_THROWS_AS(alignment(x, other), Error);
}

TEST_CASE("expected_alignment oracle") {
    WorldConfig cfg;
    // (p + (7 - p)/16) / 7
    const double oracle[] = {0.0625, 0.19642857142857142, 0.33035714285714285, 0.4642857142857143,
                             0.5982142857142857, 0.7321428571428571, 0.8660714285714286, 1.0};
    for (int p = 0; p <= 7; ++p) CHECK(expected_alignment(p, cfg) == doctest::Approx(oracle[p]).epsilon(1e-12));
    for (int p = 0; p < 7; ++p) CHECK(expected_alignment(p + 1, cfg) > expected_alignment(p, cfg));

    try {
        expected_alignment(8, cfg);
        FAIL("expected OutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfRange);
    }
    cfg.neglect_prob = 0.2;
    CHECK_THROWS_AS(expected_alignment(1, cfg), Error);
}

TEST_CASE("expected_alignment matches Monte Carlo") {
    WorldConfig cfg;
    Rng rng(314);
    for (int pinned : {1, 4}) {
        double sum = 0.0;
        const int draws = 100000;
        for (int i = 0; i < draws; ++i) {
            const auto target = random_vector(cfg.schema, rng);
            auto prompt = AspectVector::empty_for(cfg.schema);
            for (int a = 0; a < pinned; ++a) prompt.slots[a] = target.slots[a];
            sum += alignment(toy_generate(prompt, rng.next_u64(), cfg), target);
        }
        CHECK(std::abs(sum / draws - expected_alignment(pinned, cfg)) < 0.005);
    }
}

TEST_CASE("pinned slots bound alignment from below") {
    WorldConfig cfg;
    Rng rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        const auto target = random_vector(cfg.schema, rng);
        const int p = static_cast<int>(rng.below(8));
        auto prompt = AspectVector::empty_for(cfg.schema);
        for (int a = 0; a < p; ++a) prompt.slots[a] = target.slots[a];
        CHECK(alignment(toy_generate(prompt, rng.next_u64(), cfg), target) >= p / 7.0 - 1e-12);
    }
}

TEST_CASE("simulated user") {
    const auto s = default_schema();
    Rng rng(3);
    SimulatedUser user{random_vector(s, rng), {0}, 1.0};
    const auto first = initial_message(user, s);
    CHECK(first.specified_count() == 1);
    CHECK(first.slots[0] == user.target.slots[0]);

    Question q{1, "Style", "What should the Style of the image be?", QuestionSource::Template};
    const auto reply = user_reply(user, q, s, rng);
    REQUIRE(reply);
    CHECK(reply->specified_count() == 1);
    CHECK(reply->slots[1] == user.target.slots[1]);
    CHECK(user_reply(user, q, s, rng) == reply);

    user.reply_prob = 0.0;
    for (int i = 0; i < 100; ++i) CHECK_FALSE(user_reply(user, q, s, rng));

    user.initial_aspects.clear();
    CHECK_THROWS_AS(validate_user(user, s), Error);
}

TEST_CASE("run_simulation") {
    SimulationConfig cfg;
    cfg.threads = 1;
    SUBCASE("one round") {
        cfg.rounds = 1;
        const auto table = run_simulation(cfg);
        REQUIRE(table.rows.size() == 1);
        CHECK(std::abs(table.rows[0].mean - 0.19643) <= 0.02);
        CHECK(table.rows[0].delta == 0.0);
    }
    SUBCASE("four rounds follow the oracle") {
        const auto table = run_simulation(cfg);
        REQUIRE(table.rows.size() == 4);
        for (int r = 0; r < 4; ++r) {
            CHECK(std::abs(table.rows[r].mean - expected_alignment(r + 1, cfg.world)) <= 0.02);
            CHECK(table.rows[r].delta == doctest::Approx(table.rows[r].mean - table.rows[0].mean));
        }
    }
    SUBCASE("thread count does not change results") {
        cfg.dialogues = 60;
        const auto one = run_simulation(cfg);
        cfg.threads = 3;
        const auto three = run_simulation(cfg);
        CHECK(to_csv(one) == to_csv(three));
    }
    SUBCASE("silent users pin nothing new") {
        cfg.dialogues = 200;
        cfg.reply_prob = 0.0;
        const auto table = run_simulation(cfg);
        for (const auto& row : table.rows) CHECK(std::abs(row.mean - 0.19643) <= 0.04);
    }
}

TEST_CASE("simulation table formats") {
    SimulationTable t{2, {{1, 0.2, 0.0}, {2, 0.35, 0.15}}};
    CHECK(to_csv(t) == "round,mean,delta\n1,0.200000,0.000000\n2,0.350000,0.150000\n");
    Json j = t;
    CHECK(j["rows"].size() == 2);
    CHECK(to_text(t).find("0.3500") != std::string::npos);
}
