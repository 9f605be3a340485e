#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "reflex/core/types.hpp"

namespace reflex::backends {

/// Generator output: the record plus, for remote images, the raw bytes that
/// belong in the blob store (empty for toy images).
struct GeneratedImage {
    ImageRecord record;
    std::string bytes;
};

// The five model roles. Implementations must be safe to call concurrently;
// any transport failure surfaces as Error{BackendUnavailable}.

class Summarizer {
public:
    virtual ~Summarizer() = default;
    /// Prompt for `round` from the whole dialogue. Throws EmptyMemory.
    virtual PromptRecord summarize(const DialogueMemory& memory, const AspectSchema& schema, int round) const = 0;
};

class ImageGenerator {
public:
    virtual ~ImageGenerator() = default;
    virtual GeneratedImage generate(const PromptRecord& prompt, std::uint64_t seed, const AspectSchema& schema) const = 0;
};

class Evaluator {
public:
    virtual ~Evaluator() = default;
    /// One caption per schema aspect. Throws MissingAspect.
    virtual CaptionSet caption(const GeneratedImage& image, const AspectSchema& schema) const = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    /// Text-text similarity in [0, 1].
    virtual double similarity(std::string_view a, std::string_view b) const = 0;
};

class QuestionWriter {
public:
    virtual ~QuestionWriter() = default;
    virtual std::string write(const AmbiguityLabel& label, const CaptionSet& captions,
                              const AspectSchema& schema) const = 0;
};

enum class Kind { Toy, Remote };

/// The role implementations one session runs with. A null `questioner`
/// means questions come from the schema templates.
struct Backends {
    Kind kind = Kind::Toy;
    std::shared_ptr<const Summarizer> summarizer;
    std::shared_ptr<const ImageGenerator> generator;
    std::shared_ptr<const Evaluator> evaluator;
    std::shared_ptr<const Embedder> embedder;
    std::shared_ptr<const QuestionWriter> questioner;
};

} // namespace reflex::backends
