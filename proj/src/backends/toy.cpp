#include "reflex/backends/toy.hpp"

#include "reflex/core/error.hpp"

namespace reflex::backends {

PromptRecord ToySummarizer::summarize(const DialogueMemory& memory, const AspectSchema& schema, int round) const {
    if (!memory.has_user_turn()) throw Error(ErrorCode::EmptyMemory, "no user turn to summarize");
    auto merged = AspectVector::empty_for(schema);
    for (const auto& turn : memory.turns)
        if (turn.speaker == Speaker::User && turn.structured) merged.merge_from(*turn.structured);
    PromptRecord prompt;
    prompt.round = round;
    prompt.text = phrase_stack(merged, schema);
    prompt.structured = std::move(merged);
    return prompt;
}

ToyGenerator::ToyGenerator(toy::WorldConfig world, std::shared_ptr<const dpo::PolicyHandle> policy)
    : world_(std::move(world)), policy_(std::move(policy)) {
    toy::validate_config(world_);
}

GeneratedImage ToyGenerator::generate(const PromptRecord& prompt, std::uint64_t seed, const AspectSchema& schema) const {
    if (!prompt.structured) throw Error(ErrorCode::InvalidPrompt, "toy generation needs a structured prompt");
    if (schema.name != world_.schema.name) throw Error(ErrorCode::SchemaMismatch, "generator built for another schema");
    GeneratedImage out;
    out.record.round = prompt.round;
    out.record.seed = seed;
    out.record.payload = toy::toy_generate(*prompt.structured, seed, world_);
    if (policy_) {
        auto rng = Rng::derive(seed, "trajectory");
        out.record.trajectory = dpo::sample_trajectory(policy_->snapshot(), rng);
    }
    return out;
}

CaptionSet ToyEvaluator::caption(const GeneratedImage& image, const AspectSchema& schema) const {
    const auto* vec = image.record.toy();
    if (!vec) throw Error(ErrorCode::InvalidArgument, "toy evaluator needs a toy image");
    validate_vector(*vec, schema);
    if (!vec->fully_specified()) throw Error(ErrorCode::InvalidArgument, "toy image must be fully specified");
    CaptionSet out;
    out.round = image.record.round;
    for (std::size_t i = 0; i < schema.size(); ++i) out.captions[schema.aspects[i]] = schema.value_name(i, *vec->slots[i]);
    out.structured = *vec;
    return out;
}

double ToyEmbedder::similarity(std::string_view a, std::string_view b) const {
    if (a.empty() || b.empty()) return 0.0;
    while (!a.empty()) {
        const auto comma = a.find(", ");
        if (a.substr(0, comma) == b) return 1.0;
        if (comma == std::string_view::npos) break;
        a.remove_prefix(comma + 2);
    }
    return 0.0;
}

Backends make_toy_backends(toy::WorldConfig world, std::shared_ptr<const dpo::PolicyHandle> policy) {
    Backends b;
    b.kind = Kind::Toy;
    b.summarizer = std::make_shared<ToySummarizer>();
    b.generator = std::make_shared<ToyGenerator>(std::move(world), std::move(policy));
    b.evaluator = std::make_shared<ToyEvaluator>();
    b.embedder = std::make_shared<ToyEmbedder>();
    return b;
}

} // namespace reflex::backends
