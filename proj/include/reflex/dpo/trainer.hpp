#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "reflex/core/json.hpp"
#include "reflex/dpo/policy.hpp"

namespace reflex::dpo {

struct TrainerConfig {
    double beta = 1.0;
    double learning_rate = 1e-2;
    int epochs = 50;            // N
    int prompts_per_epoch = 3;  // K, inner steps per epoch
    int batch_size = 40;        // pairs per gradient step
};

void validate_config(const TrainerConfig& cfg);

struct TrainingStep {
    int epoch = 0;
    int step = 0;
    std::size_t batch = 0;
    double loss = 0.0;
};

struct TrainResult {
    Policy params;
    std::vector<TrainingStep> curve;
};

/// Called after each gradient step (e.g. to emit training_update events).
using StepObserver = std::function<void(const TrainingStep&, const Policy&)>;

/// Plain gradient descent on the preference loss. `ref` is never modified.
/// Pairs are split into consecutive batches of cfg.batch_size (the last may be
/// shorter); inner step k of epoch n uses batch (n*K + k) mod #batches.
TrainResult train(const Policy& initial, const Policy& ref, std::span<const PreferencePair> pairs,
                  const TrainerConfig& cfg, const StepObserver& observer = {});

/// Judges two trajectories: > 0 prefers `a`, < 0 prefers `b`, 0 is a tie.
using PreferenceOracle = std::function<int(const DenoisingTrajectory& a, const DenoisingTrajectory& b)>;

/// Prefers the trajectory whose final latent has the larger mean, i.e. the
/// sample lying further into the region x > 0.
int prefer_positive_region(const DenoisingTrajectory& a, const DenoisingTrajectory& b);

/// Fraction of `n` seed-paired samples where the oracle prefers theta's
/// sample over ref's. Ties are settled by a fair coin.
double win_rate(const Policy& theta, const Policy& ref, const PreferenceOracle& oracle, int n, std::uint64_t seed);

/// n pairs drawn from `policy`, each labelled by `oracle` (ties skipped and redrawn).
std::vector<PreferencePair> synthesize_pairs(const Policy& policy, const PreferenceOracle& oracle, int n,
                                             std::uint64_t seed);

void to_json(Json& j, const Schedule& s);
void from_json(const Json& j, Schedule& s);
void to_json(Json& j, const Policy& p);
void from_json(const Json& j, Policy& p);
void to_json(Json& j, const PreferencePair& p);
void from_json(const Json& j, PreferencePair& p);
void to_json(Json& j, const TrainerConfig& c);
void from_json(const Json& j, TrainerConfig& c);
void to_json(Json& j, const TrainingStep& s);

/// Append-only JSON-lines file of preference pairs.
class PairStore {
public:
    explicit PairStore(std::filesystem::path path);

    /// Appends one record; returns the new pair count.
    std::size_t append(const PreferencePair& pair);
    std::vector<PreferencePair> load() const;
    std::size_t count() const;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

void save_policy(const std::filesystem::path& path, const Policy& params);
Policy load_policy(const std::filesystem::path& path);

} // namespace reflex::dpo
