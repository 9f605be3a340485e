#pragma once

#include <memory>

#include "reflex/backends/backend.hpp"
#include "reflex/dpo/policy_store.hpp"
#include "reflex/toyworld/toyworld.hpp"

namespace reflex::backends {

/// Structured prompt = union of the structured user turns (later turns win);
/// text = phrase stacking of the specified values.
class ToySummarizer final : public Summarizer {
public:
    PromptRecord summarize(const DialogueMemory& memory, const AspectSchema& schema, int round) const override;
};

/// Delegates to toy::toy_generate. With a policy attached, also samples a
/// denoising trajectory from the policy's current parameters.
class ToyGenerator final : public ImageGenerator {
public:
    explicit ToyGenerator(toy::WorldConfig world, std::shared_ptr<const dpo::PolicyHandle> policy = nullptr);

    GeneratedImage generate(const PromptRecord& prompt, std::uint64_t seed, const AspectSchema& schema) const override;

private:
    toy::WorldConfig world_;
    std::shared_ptr<const dpo::PolicyHandle> policy_;
};

/// Exact evaluator: captions are the display names of the image's slots.
class ToyEvaluator final : public Evaluator {
public:
    CaptionSet caption(const GeneratedImage& image, const AspectSchema& schema) const override;
};

/// 1 when `b` equals `a` or one of the comma-stacked phrases of `a`, else 0.
class ToyEmbedder final : public Embedder {
public:
    double similarity(std::string_view a, std::string_view b) const override;
};

Backends make_toy_backends(toy::WorldConfig world, std::shared_ptr<const dpo::PolicyHandle> policy = nullptr);

} // namespace reflex::backends
