#pragma once

#include <memory>
#include <string>
#include <vector>

#include "reflex/backends/backend.hpp"
#include "reflex/backends/config.hpp"
#include "reflex/backends/http.hpp"

namespace reflex::backends {

struct ChatMessage {
    std::string role; // "user" | "assistant"
    Json content;     // string, or an array of content parts
};

struct ChatRequest {
    std::string system;
    std::vector<ChatMessage> messages;
};

struct ChatResponse {
    std::string text;
    std::string finish_reason;
};

/// Chat-completions style client: POST {base}/chat/completions.
class ChatClient {
public:
    explicit ChatClient(const BackendConfig& cfg);

    /// Throws InvalidArgument for an empty message list.
    ChatResponse complete(const ChatRequest& request) const;

private:
    JsonHttpClient http_;
    std::string model_;
};

class RemoteSummarizer final : public Summarizer {
public:
    explicit RemoteSummarizer(std::shared_ptr<const ChatClient> chat) : chat_(std::move(chat)) {}
    PromptRecord summarize(const DialogueMemory& memory, const AspectSchema& schema, int round) const override;

private:
    std::shared_ptr<const ChatClient> chat_;
};

/// POST {base}/images/generations {prompt, seed, size, model}; the reply
/// carries base64 bytes as "b64_json" (top level or data[0]).
class RemoteGenerator final : public ImageGenerator {
public:
    explicit RemoteGenerator(const BackendConfig& cfg);
    GeneratedImage generate(const PromptRecord& prompt, std::uint64_t seed, const AspectSchema& schema) const override;

private:
    JsonHttpClient http_;
    std::string model_;
    std::string size_;
};

/// Vision-chat captioner. Asks for a JSON object keyed by aspect; one
/// re-prompt on a malformed or incomplete reply, then MissingAspect.
class RemoteEvaluator final : public Evaluator {
public:
    explicit RemoteEvaluator(std::shared_ptr<const ChatClient> chat) : chat_(std::move(chat)) {}
    CaptionSet caption(const GeneratedImage& image, const AspectSchema& schema) const override;

private:
    std::shared_ptr<const ChatClient> chat_;
};

/// POST {base}/embeddings {model, input: [a, b]}; cosine clamped to [0, 1].
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(const BackendConfig& cfg);
    double similarity(std::string_view a, std::string_view b) const override;

private:
    JsonHttpClient http_;
    std::string model_;
};

class RemoteQuestionWriter final : public QuestionWriter {
public:
    explicit RemoteQuestionWriter(std::shared_ptr<const ChatClient> chat) : chat_(std::move(chat)) {}
    std::string write(const AmbiguityLabel& label, const CaptionSet& captions, const AspectSchema& schema) const override;

private:
    std::shared_ptr<const ChatClient> chat_;
};

/// Cosine similarity clamped to [0, 1] (negative cosines score 0).
double clamp_cosine(double cosine);

/// Remote backends for cfg; the question writer is attached only when
/// cfg.backend_questions is set.
Backends make_remote_backends(const BackendConfig& cfg);

} // namespace reflex::backends
