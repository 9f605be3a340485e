#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reflex/core/json.hpp"
#include "reflex/toyworld/toyworld.hpp"

namespace reflex::aae {

enum class SimBackend { Toy, Remote };

struct ToolConfig {
    double threshold = 0.7; // k: the image passes when Sim > k
    int max_iterations = 5; // N
    SimBackend sim_backend = SimBackend::Toy;
};

void validate_config(const ToolConfig& cfg);

struct NeglectReport {
    double initial_sim = 0.0;
    double sim = 0.0; // Sim of the returned image
    std::vector<std::string> token_list;
    int iterations_used = 0;
    bool invoked = false;
};

/// Fraction of the prompt's specified slots that the image realizes.
/// Throws EmptyPrompt when nothing is specified.
double compute_sim(const AspectVector& image, const AspectVector& prompt);

/// Index of the first specified-but-unrealized aspect in schema order.
/// Throws NothingNeglected when every specified slot is realized.
std::size_t attribute_neglect(const AspectVector& image, const AspectVector& prompt);

struct ToolResult {
    AspectVector image;
    NeglectReport report;
};

/**
 * Check-and-regenerate loop. Each failed check (Sim <= k) adds the most
 * neglected aspect to the token list and regenerates with every listed aspect
 * forced, using sub-seed derive(seed, "aae", {iteration}). Returns the
 * highest-Sim image seen (latest on ties).
 */
ToolResult run_tool(const AspectVector& prompt, std::uint64_t seed, const ToolConfig& cfg,
                    const toy::WorldConfig& world);

struct SweepRow {
    double threshold = 0.0;
    double frequency = 0.0; // fraction of trials where the tool regenerated
    double initial_sim = 0.0;
    double final_sim = 0.0;
    double delta = 0.0;
};

struct SweepConfig {
    std::vector<double> thresholds{0.8, 0.75, 0.72, 0.7, 0.68, 0.66};
    int trials = 2000;
    int specified = 3; // prompt slots specified per trial
    int max_iterations = 5;
    std::uint64_t seed = 1;
};

/// Trial t uses the same random prompt and seed at every threshold.
std::vector<SweepRow> threshold_sweep(const SweepConfig& cfg, const toy::WorldConfig& world);

/// Random prompt with `specified` slots (chosen uniformly) set to uniform values.
AspectVector random_prompt(const AspectSchema& schema, int specified, Rng& rng);

std::string to_csv(const std::vector<SweepRow>& rows);
std::string to_text(const std::vector<SweepRow>& rows);

void to_json(Json& j, const NeglectReport& r);
void from_json(const Json& j, NeglectReport& r);
void to_json(Json& j, const SweepRow& r);

} // namespace reflex::aae
