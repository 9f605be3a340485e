#include "reflex/toyworld/toyworld.hpp"

#include <algorithm>

#include "reflex/core/error.hpp"

namespace reflex::toy {

void validate_config(const WorldConfig& cfg) {
    validate_schema(cfg.schema);
    if (!(cfg.neglect_prob >= 0.0 && cfg.neglect_prob <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "neglect_prob must lie in [0, 1]");
}

AspectVector toy_generate(const AspectVector& prompt, std::uint64_t seed, const WorldConfig& cfg,
                          const std::vector<std::size_t>& forced) {
    validate_vector(prompt, cfg.schema);
    const auto v = static_cast<std::uint64_t>(cfg.vocab_size());
    AspectVector image(prompt.schema, prompt.size());
    for (std::size_t i = 0; i < prompt.size(); ++i) {
        auto rng = Rng::derive(seed, "toy_generate", {i});
        const auto& slot = prompt.slots[i];
        if (!slot) {
            image.slots[i] = static_cast<int>(rng.below(v));
            continue;
        }
        const bool is_forced = std::find(forced.begin(), forced.end(), i) != forced.end();
        if (is_forced || !rng.bernoulli(cfg.neglect_prob)) {
            image.slots[i] = *slot;
        } else {
            // Any value but the requested one.
            const auto other = static_cast<int>(rng.below(v - 1));
            image.slots[i] = other >= *slot ? other + 1 : other;
        }
    }
    return image;
}

double alignment(const AspectVector& a, const AspectVector& b) {
    if (a.schema != b.schema || a.size() != b.size() || a.size() == 0)
        throw Error(ErrorCode::SchemaMismatch, "alignment needs two vectors of the same schema");
    if (!a.fully_specified() || !b.fully_specified())
        throw Error(ErrorCode::InvalidArgument, "alignment needs fully specified vectors");
    std::size_t matches = 0;
    for (std::size_t i = 0; i < a.size(); ++i) matches += a.slots[i] == b.slots[i];
    return static_cast<double>(matches) / static_cast<double>(a.size());
}

double expected_alignment(int pinned, const WorldConfig& cfg) {
    const auto aspects = static_cast<int>(cfg.schema.size());
    if (pinned < 0 || pinned > aspects)
        throw Error(ErrorCode::OutOfRange, "pinned = " + std::to_string(pinned) + " outside [0, " +
                                               std::to_string(aspects) + "]");
    if (cfg.neglect_prob != 0.0) throw Error(ErrorCode::InvalidArgument, "expected_alignment assumes neglect_prob = 0");
    const double a = aspects;
    return (pinned + (a - pinned) / cfg.vocab_size()) / a;
}

AspectVector random_vector(const AspectSchema& schema, Rng& rng) {
    auto out = AspectVector::empty_for(schema);
    for (auto& s : out.slots) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(schema.vocab_size)));
    return out;
}

void validate_user(const SimulatedUser& user, const AspectSchema& schema) {
    validate_vector(user.target, schema);
    if (!user.target.fully_specified()) throw Error(ErrorCode::InvalidArgument, "user target must be fully specified");
    if (user.initial_aspects.empty()) throw Error(ErrorCode::InvalidArgument, "user must reveal at least one aspect");
    for (auto i : user.initial_aspects)
        if (i >= schema.size()) throw Error(ErrorCode::InvalidArgument, "initial aspect index out of range");
    if (!(user.reply_prob >= 0.0 && user.reply_prob <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "reply_prob must lie in [0, 1]");
}

AspectVector initial_message(const SimulatedUser& user, const AspectSchema& schema) {
    auto out = AspectVector::empty_for(schema);
    for (auto i : user.initial_aspects) out.slots.at(i) = user.target.slots.at(i);
    return out;
}

std::optional<AspectVector> user_reply(const SimulatedUser& user, const Question& question,
                                       const AspectSchema& schema, Rng& rng) {
    const auto idx = schema.require_index(question.aspect);
    if (!rng.bernoulli(user.reply_prob)) return std::nullopt;
    auto out = AspectVector::empty_for(schema);
    out.slots[idx] = user.target.slots.at(idx);
    return out;
}

} // namespace reflex::toy
