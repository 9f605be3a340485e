#include "reflex/backends/remote.hpp"

#include <algorithm>
#include <cmath>

#include "reflex/backends/digest.hpp"

namespace reflex::backends {

ChatClient::ChatClient(const BackendConfig& cfg)
    : http_(cfg.base_url.value_or(""), cfg.api_key, cfg.timeout_ms), model_(cfg.chat_model.value_or("gpt-4o")) {}

ChatResponse ChatClient::complete(const ChatRequest& request) const {
    if (request.messages.empty()) throw Error(ErrorCode::InvalidArgument, "chat request needs at least one message");
    Json messages = Json::array();
    if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    const auto reply = http_.post("/chat/completions", {{"model", model_}, {"messages", std::move(messages)}});
    try {
        const auto& choice = reply.at("choices").at(0);
        ChatResponse out;
        out.text = choice.at("message").at("content").get<std::string>();
        out.finish_reason = choice.value("finish_reason", "");
        return out;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::BackendUnavailable, std::string("unexpected chat reply: ") + e.what());
    }
}

namespace {

std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r\n\"") - b + 1);
}

std::string aspect_list(const AspectSchema& schema) {
    std::string out;
    for (const auto& a : schema.aspects) out += (out.empty() ? "" : ", ") + a;
    return out;
}

/// Pulls the outermost {...} out of a reply (tolerates code fences and chatter).
std::optional<Json> extract_object(const std::string& text) {
    const auto open = text.find('{');
    const auto close = text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
    try {
        auto j = Json::parse(text.substr(open, close - open + 1));
        if (j.is_object()) return j;
    } catch (const Json::exception&) {
    }
    return std::nullopt;
}

} // namespace

PromptRecord RemoteSummarizer::summarize(const DialogueMemory& memory, const AspectSchema& schema, int round) const {
    if (!memory.has_user_turn()) throw Error(ErrorCode::EmptyMemory, "no user turn to summarize");
    ChatRequest req;
    req.system = "You are the summarizer of an image-generation assistant. Merge everything the user has said "
                 "into one concise text-to-image prompt that covers " + aspect_list(schema) +
                 " where the user specified them. Reply with the prompt only.";
    for (const auto& t : memory.turns) req.messages.push_back({t.speaker == Speaker::User ? "user" : "assistant", t.text});
    const auto text = trimmed(chat_->complete(req).text);
    if (text.empty()) throw Error(ErrorCode::BackendUnavailable, "summarizer returned an empty prompt");
    return {round, text, std::nullopt};
}

RemoteGenerator::RemoteGenerator(const BackendConfig& cfg)
    : http_(cfg.base_url.value_or(""), cfg.api_key, cfg.timeout_ms),
      model_(cfg.model_name.value_or("stable-diffusion-v1-4")), size_(cfg.image_size) {}

GeneratedImage RemoteGenerator::generate(const PromptRecord& prompt, std::uint64_t seed, const AspectSchema&) const {
    if (prompt.text.empty()) throw Error(ErrorCode::InvalidPrompt, "empty prompt text");
    const auto reply = http_.post("/images/generations",
                                  {{"prompt", prompt.text}, {"seed", seed}, {"size", size_}, {"model", model_}});
    std::string b64;
    if (reply.contains("b64_json")) b64 = reply.at("b64_json").get<std::string>();
    else if (reply.contains("data") && !reply.at("data").empty()) b64 = reply.at("data").at(0).value("b64_json", "");
    if (b64.empty()) throw Error(ErrorCode::BackendUnavailable, "image reply carried no b64_json");
    GeneratedImage out;
    try {
        out.bytes = base64_decode(b64);
    } catch (const Error& e) {
        throw Error(ErrorCode::BackendUnavailable, e.what());
    }
    out.record.round = prompt.round;
    out.record.seed = seed;
    out.record.payload = ImageBlob{sha256_hex(out.bytes), sniff_media_type(out.bytes), out.bytes.size()};
    return out;
}

CaptionSet RemoteEvaluator::caption(const GeneratedImage& image, const AspectSchema& schema) const {
    const auto* blob = image.record.blob();
    if (!blob || image.bytes.empty()) throw Error(ErrorCode::InvalidArgument, "remote evaluator needs image bytes");
    const auto instruction = "Describe this image. Reply with a JSON object whose keys are exactly: " +
                             aspect_list(schema) + ". Each value is a short phrase describing that aspect.";
    ChatRequest req;
    req.system = "You are the evaluator of an image-generation assistant.";
    req.messages.push_back(
        {"user", Json::array({{{"type", "text"}, {"text", instruction}},
                              {{"type", "image_url"},
                               {"image_url", {{"url", "data:" + blob->media_type + ";base64," + base64_encode(image.bytes)}}}}})});

    std::vector<std::string> missing;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto reply = chat_->complete(req);
        missing.clear();
        CaptionSet out;
        out.round = image.record.round;
        const auto obj = extract_object(reply.text);
        for (const auto& a : schema.aspects) {
            if (obj && obj->contains(a) && (*obj)[a].is_string() && !(*obj)[a].get<std::string>().empty())
                out.captions[a] = (*obj)[a].get<std::string>();
            else
                missing.push_back(a);
        }
        if (missing.empty()) return out;
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        req.messages.push_back({"assistant", reply.text});
        req.messages.push_back({"user", "Your reply is missing: " + list + ". " + instruction});
    }
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::MissingAspect, "caption reply lacked " + list + " after one re-prompt");
}

double clamp_cosine(double cosine) { return std::clamp(cosine, 0.0, 1.0); }

RemoteEmbedder::RemoteEmbedder(const BackendConfig& cfg)
    : http_(cfg.base_url.value_or(""), cfg.api_key, cfg.timeout_ms),
      model_(cfg.embedding_model.value_or("clip-vit-large-patch14")) {}

double RemoteEmbedder::similarity(std::string_view a, std::string_view b) const {
    if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "similarity needs non-empty texts");
    const auto reply = http_.post("/embeddings", {{"model", model_}, {"input", {std::string(a), std::string(b)}}});
    std::vector<double> ea;
    std::vector<double> eb;
    try {
        ea = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
        eb = reply.at("data").at(1).at("embedding").get<std::vector<double>>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::BackendUnavailable, std::string("unexpected embedding reply: ") + e.what());
    }
    if (ea.size() != eb.size() || ea.empty()) throw Error(ErrorCode::BackendUnavailable, "embedding sizes differ");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < ea.size(); ++i) {
        dot += ea[i] * eb[i];
        na += ea[i] * ea[i];
        nb += eb[i] * eb[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return clamp_cosine(dot / std::sqrt(na * nb));
}

std::string RemoteQuestionWriter::write(const AmbiguityLabel& label, const CaptionSet& captions,
                                        const AspectSchema&) const {
    std::string described;
    for (const auto& [aspect, text] : captions.captions) described += "- " + aspect + ": " + text + "\n";
    ChatRequest req;
    req.system = "You are the action module of an image-generation assistant. Ask the user exactly one short "
                 "question that helps pin down the " + label.chosen + " of the image they want. Mention the word '" +
                 label.chosen + "'. Reply with the question only.";
    req.messages.push_back({"user", "Current image description:\n" + described + "Aspect to ask about: " + label.chosen});
    return trimmed(chat_->complete(req).text);
}

Backends make_remote_backends(const BackendConfig& cfg) {
    validate_config(cfg);
    if (cfg.kind != Kind::Remote) throw Error(ErrorCode::InvalidArgument, "config kind is not remote");
    auto chat = std::make_shared<const ChatClient>(cfg);
    Backends b;
    b.kind = Kind::Remote;
    b.summarizer = std::make_shared<RemoteSummarizer>(chat);
    b.generator = std::make_shared<RemoteGenerator>(cfg);
    b.evaluator = std::make_shared<RemoteEvaluator>(chat);
    b.embedder = std::make_shared<RemoteEmbedder>(cfg);
    if (cfg.backend_questions) b.questioner = std::make_shared<RemoteQuestionWriter>(chat);
    return b;
}

} // namespace reflex::backends
