#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reflex/core/json.hpp"
#include "reflex/toyworld/toyworld.hpp"

namespace reflex::toy {

struct SimulationConfig {
    int dialogues = 500;
    int rounds = 4;
    std::uint64_t seed = 1;
    WorldConfig world;
    double reply_prob = 1.0;
    std::vector<std::size_t> initial_aspects{0};
    /// 0 = hardware concurrency.
    unsigned threads = 0;
};

struct SimulationRow {
    int round = 0;
    double mean = 0.0;  // mean alignment(image_r, target)
    double delta = 0.0; // mean - round-1 mean
};

struct SimulationTable {
    int dialogues = 0;
    std::vector<SimulationRow> rows;
};

/// Runs `dialogues` independent engine sessions against simulated users and
/// tabulates mean image-target alignment per round. Dialogue d draws its
/// target and session seed from derive(seed, "dialogue", {d}), so results do
/// not depend on the thread count.
SimulationTable run_simulation(const SimulationConfig& cfg);

std::string to_csv(const SimulationTable& table);
std::string to_text(const SimulationTable& table);
void to_json(Json& j, const SimulationTable& t);

} // namespace reflex::toy
