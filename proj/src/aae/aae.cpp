#include "reflex/aae/aae.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "reflex/core/error.hpp"

namespace reflex::aae {

void validate_config(const ToolConfig& cfg) {
    if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0))
        throw Error(ErrorCode::InvalidArgument, "threshold k must lie in (0, 1)");
    if (cfg.max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
}

double compute_sim(const AspectVector& image, const AspectVector& prompt) {
    if (image.schema != prompt.schema || image.size() != prompt.size())
        throw Error(ErrorCode::SchemaMismatch, "image and prompt use different schemas");
    std::size_t specified = 0, realized = 0;
    for (std::size_t i = 0; i < prompt.size(); ++i) {
        if (!prompt.slots[i]) continue;
        ++specified;
        realized += image.slots[i] == prompt.slots[i];
    }
    if (specified == 0) throw Error(ErrorCode::EmptyPrompt, "prompt specifies no aspect");
    return static_cast<double>(realized) / static_cast<double>(specified);
}

std::size_t attribute_neglect(const AspectVector& image, const AspectVector& prompt) {
    if (image.size() != prompt.size()) throw Error(ErrorCode::SchemaMismatch, "image and prompt sizes differ");
    for (std::size_t i = 0; i < prompt.size(); ++i)
        if (prompt.slots[i] && image.slots[i] != prompt.slots[i]) return i;
    throw Error(ErrorCode::NothingNeglected, "every specified aspect is realized");
}

ToolResult run_tool(const AspectVector& prompt, std::uint64_t seed, const ToolConfig& cfg,
                    const toy::WorldConfig& world) {
    validate_config(cfg);
    if (cfg.sim_backend != SimBackend::Toy)
        throw Error(ErrorCode::ToolUnavailable, "regeneration needs the toy generator");

    auto image = toy::toy_generate(prompt, seed, world);
    double sim = compute_sim(image, prompt);

    ToolResult best{image, {}};
    best.report.initial_sim = sim;
    best.report.sim = sim;

    std::vector<std::size_t> forced;
    for (int n = 1; n <= cfg.max_iterations && sim <= cfg.threshold; ++n) {
        forced.push_back(attribute_neglect(image, prompt));
        image = toy::toy_generate(prompt, Rng::derive_seed(seed, "aae", {static_cast<std::uint64_t>(n)}), world, forced);
        sim = compute_sim(image, prompt);
        best.report.iterations_used = n;
        if (sim >= best.report.sim) {
            best.image = image;
            best.report.sim = sim;
        }
    }
    for (auto i : forced) best.report.token_list.push_back(world.schema.aspects.at(i));
    best.report.invoked = best.report.iterations_used > 0;
    return best;
}

AspectVector random_prompt(const AspectSchema& schema, int specified, Rng& rng) {
    if (specified < 1 || static_cast<std::size_t>(specified) > schema.size())
        throw Error(ErrorCode::OutOfRange, "specified must lie in [1, A]");
    std::vector<std::size_t> order(schema.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `specified` entries are a uniform subset.
    for (std::size_t i = 0; i < static_cast<std::size_t>(specified); ++i)
        std::swap(order[i], order[i + rng.below(order.size() - i)]);
    auto out = AspectVector::empty_for(schema);
    for (std::size_t i = 0; i < static_cast<std::size_t>(specified); ++i)
        out.slots[order[i]] = static_cast<int>(rng.below(static_cast<std::uint64_t>(schema.vocab_size)));
    return out;
}

std::vector<SweepRow> threshold_sweep(const SweepConfig& cfg, const toy::WorldConfig& world) {
    if (cfg.trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
    toy::validate_config(world);
    std::vector<SweepRow> rows;
    for (double k : cfg.thresholds) {
        const ToolConfig tool{k, cfg.max_iterations, SimBackend::Toy};
        SweepRow row{k, 0.0, 0.0, 0.0, 0.0};
        int invoked = 0;
        for (int t = 0; t < cfg.trials; ++t) {
            auto rng = Rng::derive(cfg.seed, "sweep.prompt", {static_cast<std::uint64_t>(t)});
            const auto prompt = random_prompt(world.schema, cfg.specified, rng);
            const auto result = run_tool(prompt, Rng::derive_seed(cfg.seed, "sweep.seed", {static_cast<std::uint64_t>(t)}), tool, world);
            invoked += result.report.invoked;
            row.initial_sim += result.report.initial_sim;
            row.final_sim += result.report.sim;
        }
        row.frequency = static_cast<double>(invoked) / cfg.trials;
        row.initial_sim /= cfg.trials;
        row.final_sim /= cfg.trials;
        row.delta = row.final_sim - row.initial_sim;
        rows.push_back(row);
    }
    return rows;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "k,frequency,initial_sim,final_sim,delta\n";
    char line[128];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%g,%.6f,%.6f,%.6f,%.6f\n", r.threshold, r.frequency, r.initial_sim,
                      r.final_sim, r.delta);
        out += line;
    }
    return out;
}

std::string to_text(const std::vector<SweepRow>& rows) {
    std::string out = "    k  usage    initial  final    delta\n";
    char line[128];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%5.2f  %5.1f%%  %.4f   %.4f   %+.4f\n", r.threshold, 100.0 * r.frequency,
                      r.initial_sim, r.final_sim, r.delta);
        out += line;
    }
    return out;
}

void to_json(Json& j, const NeglectReport& r) {
    j = Json{{"initial_sim", r.initial_sim},
             {"sim", r.sim},
             {"token_list", r.token_list},
             {"iterations_used", r.iterations_used},
             {"invoked", r.invoked}};
}

void from_json(const Json& j, NeglectReport& r) {
    j.at("initial_sim").get_to(r.initial_sim);
    j.at("sim").get_to(r.sim);
    j.at("token_list").get_to(r.token_list);
    j.at("iterations_used").get_to(r.iterations_used);
    j.at("invoked").get_to(r.invoked);
}

void to_json(Json& j, const SweepRow& r) {
    j = Json{{"k", r.threshold},
             {"frequency", r.frequency},
             {"initial_sim", r.initial_sim},
             {"final_sim", r.final_sim},
             {"delta", r.delta}};
}

} // namespace reflex::aae
