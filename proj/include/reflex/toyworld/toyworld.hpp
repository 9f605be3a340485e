#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "reflex/core/rng.hpp"
#include "reflex/core/types.hpp"

namespace reflex::toy {

/// Analytic generative world. The vocabulary size comes from the schema.
struct WorldConfig {
    AspectSchema schema = default_schema();
    /// Probability that a specified slot is not realized ("catastrophic neglect").
    double neglect_prob = 0.0;
    std::uint64_t seed = 0;

    int vocab_size() const noexcept { return schema.vocab_size; }
};

void validate_config(const WorldConfig& cfg);

/**
 * Toy text-to-image generator.
 *
 * Slot i draws from Rng::derive(seed, "toy_generate", {i}). A specified slot
 * is copied with probability 1 - neglect_prob, otherwise replaced by one of the
 * V - 1 other values; an unspecified slot is uniform over V. Slots listed in
 * `forced` are never neglected.
 */
AspectVector toy_generate(const AspectVector& prompt, std::uint64_t seed, const WorldConfig& cfg,
                          const std::vector<std::size_t>& forced = {});

/// Fraction of slots on which two fully specified vectors agree.
double alignment(const AspectVector& a, const AspectVector& b);

/// Exact E[alignment(image, target)] when `pinned` target aspects are fixed in
/// the prompt and the others fill uniformly: (p + (A - p)/V) / A. Requires
/// neglect_prob == 0.
double expected_alignment(int pinned, const WorldConfig& cfg);

/// Uniformly random fully specified vector.
AspectVector random_vector(const AspectSchema& schema, Rng& rng);

/// Simulated user holding a hidden target image.
struct SimulatedUser {
    AspectVector target;
    std::vector<std::size_t> initial_aspects{0};
    double reply_prob = 1.0;
};

void validate_user(const SimulatedUser& user, const AspectSchema& schema);

/// The target's values on the initially revealed aspects.
AspectVector initial_message(const SimulatedUser& user, const AspectSchema& schema);

/// With probability reply_prob, the target value for the asked aspect;
/// otherwise silence (nullopt).
std::optional<AspectVector> user_reply(const SimulatedUser& user, const Question& question,
                                       const AspectSchema& schema, Rng& rng);

} // namespace reflex::toy
