#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dpo_oracle.hpp"
#include "reflex/core/error.hpp"
#include "reflex/dpo/policy_store.hpp"
#include "reflex/dpo/trainer.hpp"
#include "support.hpp"

using namespace reflex;
using namespace reflex::dpo;

namespace {

DenoisingTrajectory scalar_traj(double x, double a) {
    DenoisingTrajectory t{RowMatrix<double>(2, 1)};
    t.latents << x, a;
    return t;
}

Policy scalar_policy(double bias) {
    auto p = zero_policy(constant_schedule(1, 0.0, 1.0), 1);
    p.bias(0, 0) = bias;
    return p;
}

} // namespace

TEST_CASE("log_prob") {
    SUBCASE("standard normal at its mean") {
        const auto lp = log_prob(scalar_policy(0.0), scalar_traj(0.0, 0.0));
        CHECK(lp.total == doctest::Approx(-0.9189385332046727).epsilon(1e-14));
    }
    SUBCASE("translation invariance") {
        Rng rng(4);
        for (int i = 0; i < 20; ++i) {
            auto p = zero_policy(constant_schedule(1, 0.8, 0.4), 3);
            auto t = testing::random_trajectory(1, 3, rng);
            const double before = log_prob(p, t).total;
            for (Eigen::Index j = 0; j < 3; ++j) {
                const double shift = rng.normal();
                p.bias(0, j) += shift;
                t.latents(1, j) += shift;
            }
            CHECK(log_prob(p, t).total == doctest::Approx(before).epsilon(1e-12));
        }
    }
    SUBCASE("log ratio of a shifted mean") {
        const auto t = scalar_traj(0.0, 0.1);
        const double ratio = log_prob(scalar_policy(0.1), t).total - log_prob(scalar_policy(0.0), t).total;
        CHECK(ratio == doctest::Approx(0.005).epsilon(1e-10));
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(log_prob(scalar_policy(0.0), DenoisingTrajectory{RowMatrix<double>::Zero(3, 1)}), Error);
    }
}

TEST_CASE("d3po_loss") {
    Rng rng(11);
    SUBCASE("theta == ref gives ln 2 for every pair and beta") {
        for (int i = 0; i < 100; ++i) {
            auto inst = testing::random_instance(rng);
            CHECK(std::abs(d3po_loss(inst.ref, inst.ref, inst.batch[0], inst.beta) - std::numbers::ln2) < 1e-9);
        }
    }
    SUBCASE("vanishing beta tends to ln 2") {
        auto inst = testing::random_instance(rng);
        CHECK(std::abs(d3po_loss(inst.theta, inst.ref, inst.batch[0], 1e-12) - std::numbers::ln2) < 1e-9);
    }
    SUBCASE("scalar worked example") {
        const PreferencePair pair{scalar_traj(0.0, 0.1), scalar_traj(0.0, -0.1), "p", 0};
        const auto terms = d3po_terms(scalar_policy(0.1), scalar_policy(0.0), pair, 1.0);
        CHECK(terms.margin == doctest::Approx(0.02).epsilon(1e-12));
        CHECK(terms.loss == doctest::Approx(0.6831971797266342).epsilon(1e-12));
        CHECK(terms.winner_log_ratio(0) == doctest::Approx(0.005).epsilon(1e-12));
        CHECK(terms.loser_log_ratio(0) == doctest::Approx(-0.015).epsilon(1e-12));
    }
    SUBCASE("strictly decreasing in the winner's log ratio") {
        const PreferencePair pair{scalar_traj(0.0, 1.0), scalar_traj(0.0, -1.0), "p", 0};
        double prev = d3po_loss(scalar_policy(0.0), scalar_policy(0.0), pair, 1.0);
        for (double b = 0.1; b <= 1.0; b += 0.1) {
            const double next = d3po_loss(scalar_policy(b), scalar_policy(0.0), pair, 1.0);
            CHECK(next < prev);
            prev = next;
        }
    }
    SUBCASE("errors") {
        const PreferencePair pair{scalar_traj(0.0, 1.0), scalar_traj(0.0, -1.0), "p", 0};
        try {
            d3po_loss(scalar_policy(0.0), scalar_policy(0.0), pair, 0.0);
            FAIL("expected NonPositiveBeta");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::NonPositiveBeta);
        }
        auto wide = zero_policy(constant_schedule(1, 0.0, 1.0), 2);
        CHECK_THROWS_AS(d3po_loss(wide, wide, pair, 1.0), Error);
    }
}

TEST_CASE("d3po_grad") {
    Rng rng(12);
    SUBCASE("agrees with the long-double finite-difference oracle") {
        for (int i = 0; i < 100; ++i) {
            const auto inst = testing::random_instance(rng);
            const auto analytic = d3po_grad<double>(inst.theta, inst.ref, inst.batch, inst.beta);
            CHECK(testing::relative_error(analytic, testing::oracle_grad(inst, 1e-5)) < 1e-4);
        }
    }
    SUBCASE("at theta == ref it is -(beta/2) times the log-prob gradient difference") {
        auto inst = testing::random_instance(rng);
        inst.batch.resize(1);
        const auto& pair = inst.batch[0];
        const auto g = d3po_grad<double>(inst.ref, inst.ref, inst.batch, inst.beta);
        const RowMatrix<double> expected =
            -(inst.beta / 2.0) * (log_prob_grad(inst.ref, pair.winner) - log_prob_grad(inst.ref, pair.loser));
        CHECK((g - expected).norm() < 1e-12);
    }
    SUBCASE("symmetric pair has zero gradient") {
        auto inst = testing::random_instance(rng);
        for (auto& p : inst.batch) p.loser = p.winner;
        CHECK(d3po_grad<double>(inst.theta, inst.ref, inst.batch, inst.beta).norm() == 0.0);
    }
    SUBCASE("empty batch") {
        const auto p = default_reference_policy();
        CHECK_THROWS_AS(d3po_grad<double>(p, p, {}, 1.0), Error);
    }
}

TEST_CASE("policy_kl") {
    auto ref = zero_policy(constant_schedule(2, 0.9, 0.5), 2);
    auto theta = ref;
    CHECK(policy_kl(theta, ref) == 0.0);
    theta.bias(1, 0) = 0.5;
    // 0.25 / (2 * 0.25)
    CHECK(policy_kl(theta, ref) == doctest::Approx(0.5));
}

TEST_CASE("train") {
    const auto ref = default_reference_policy();
    const auto pairs = synthesize_pairs(ref, prefer_positive_region, 120, 7);
    SUBCASE("synthetic pairs respect the oracle") {
        REQUIRE(pairs.size() == 120);
        for (const auto& p : pairs) CHECK(prefer_positive_region(p.winner, p.loser) > 0);
    }
    SUBCASE("zero learning rate is a no-op") {
        TrainerConfig cfg;
        cfg.learning_rate = 0.0;
        cfg.epochs = 4;
        const auto r = train(ref, ref, pairs, cfg);
        CHECK(r.params == ref);
        REQUIRE(r.curve.size() == 12);
        for (const auto& s : r.curve) CHECK(s.loss == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
    }
    SUBCASE("batch schedule cycles through the store") {
        TrainerConfig cfg;
        cfg.epochs = 2;
        const auto r = train(ref, ref, pairs, cfg);
        std::vector<std::size_t> seen;
        for (const auto& s : r.curve) seen.push_back(s.batch);
        CHECK(seen == std::vector<std::size_t>{0, 1, 2, 0, 1, 2});
    }
    SUBCASE("small steps on a fixed batch never increase the loss") {
        TrainerConfig cfg;
        cfg.learning_rate = 1e-3;
        cfg.epochs = 100;
        cfg.prompts_per_epoch = 1;
        cfg.batch_size = 120;
        const auto r = train(ref, ref, pairs, cfg);
        for (std::size_t i = 1; i < r.curve.size(); ++i) CHECK(r.curve[i].loss <= r.curve[i - 1].loss + 1e-15);
    }
    SUBCASE("reference stays frozen and the final mean moves toward x > 0") {
        const auto copy = ref;
        const auto r = train(ref, ref, pairs, TrainerConfig{});
        CHECK(ref == copy);
        CHECK(r.params.bias.sum() > 0.0);
        CHECK(win_rate(r.params, ref, prefer_positive_region, 2000, 99) > 0.6);
    }
    SUBCASE("observer sees every step") {
        TrainerConfig cfg;
        cfg.epochs = 3;
        int calls = 0;
        train(ref, ref, pairs, cfg, [&](const TrainingStep&, const Policy&) { ++calls; });
        CHECK(calls == 9);
    }
    SUBCASE("empty store") {
        try {
            train(ref, ref, {}, TrainerConfig{});
            FAIL("expected EmptyStore");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyStore);
        }
    }
}

TEST_CASE("larger beta keeps the policy closer to ref") {
    const auto ref = default_reference_policy();
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto pairs = synthesize_pairs(ref, prefer_positive_region, 120, seed);
        std::vector<double> kl;
        for (double beta : {0.1, 1.0, 10.0}) {
            TrainerConfig cfg;
            cfg.beta = beta;
            cfg.epochs = 500;
            kl.push_back(policy_kl(train(ref, ref, pairs, cfg).params, ref));
        }
        CHECK(kl[0] >= kl[1]);
        CHECK(kl[1] >= kl[2]);
    }
}

TEST_CASE("win_rate") {
    const auto ref = default_reference_policy();
    SUBCASE("theta == ref is a coin flip") {
        const double w = win_rate(ref, ref, prefer_positive_region, 2000, 5);
        CHECK(std::abs(w - 0.5) < 3.0 * std::sqrt(0.25 / 2000));
    }
    SUBCASE("an oracle that always prefers ref") {
        auto theta = ref;
        theta.bias.array() += 1.0;
        const auto prefer_second = [](const DenoisingTrajectory&, const DenoisingTrajectory&) { return -1; };
        CHECK(win_rate(theta, ref, prefer_second, 500, 5) == 0.0);
        CHECK(win_rate(theta, ref, prefer_positive_region, 500, 5) == 1.0);
    }
}

TEST_CASE("pair store and policy files") {
    const auto dir = testing::scratch_dir("dpo");
    const auto ref = default_reference_policy();
    const auto pairs = synthesize_pairs(ref, prefer_positive_region, 5, 3);
    PairStore store(dir / "pairs" / "A.jsonl");
    CHECK(store.count() == 0);
    CHECK(store.load().empty());
    for (std::size_t i = 0; i < pairs.size(); ++i) CHECK(store.append(pairs[i]) == i + 1);
    CHECK(store.load() == pairs);

    auto theta = ref;
    theta.bias(3, 1) = 0.125;
    save_policy(dir / "policy.json", theta);
    CHECK(load_policy(dir / "policy.json") == theta);
    std::filesystem::remove_all(dir);
}
