#include "reflex/backends/config.hpp"

#include <cstdlib>
#include <fstream>

namespace reflex::backends {

void validate_config(const BackendConfig& cfg) {
    if (cfg.kind == Kind::Remote && (!cfg.base_url || cfg.base_url->empty()))
        throw Error(ErrorCode::InvalidArgument, "remote backend requires base_url");
    if (cfg.timeout_ms <= 0) throw Error(ErrorCode::InvalidArgument, "timeout_ms must be > 0");
}

void to_json(Json& j, const Kind& k) { j = k == Kind::Toy ? "toy" : "remote"; }

void from_json(const Json& j, Kind& k) {
    const auto s = j.get<std::string>();
    if (s == "toy") k = Kind::Toy;
    else if (s == "remote") k = Kind::Remote;
    else throw Error(ErrorCode::InvalidArgument, "kind must be toy or remote, got '" + s + "'");
}

namespace {

template <typename T>
Json opt(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

std::optional<std::string> opt_string(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

} // namespace

void to_json(Json& j, const BackendConfig& c) {
    j = Json{{"kind", c.kind},
             {"base_url", opt(c.base_url)},
             {"api_key", opt(c.api_key)},
             {"model_name", opt(c.model_name)},
             {"chat_model", opt(c.chat_model)},
             {"embedding_model", opt(c.embedding_model)},
             {"timeout_ms", c.timeout_ms},
             {"persona", opt(c.persona)},
             {"image_size", c.image_size},
             {"backend_questions", c.backend_questions}};
}

void from_json(const Json& j, BackendConfig& c) {
    c.kind = j.value("kind", Kind::Toy);
    c.base_url = opt_string(j, "base_url");
    c.api_key = opt_string(j, "api_key");
    c.model_name = opt_string(j, "model_name");
    c.chat_model = opt_string(j, "chat_model");
    c.embedding_model = opt_string(j, "embedding_model");
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.persona = opt_string(j, "persona");
    c.image_size = j.value("image_size", c.image_size);
    c.backend_questions = j.value("backend_questions", c.backend_questions);
}

void apply_env_overrides(BackendConfig& cfg) {
    if (const char* url = std::getenv("REFLEX_BASE_URL"); url && *url) cfg.base_url = url;
    if (const char* key = std::getenv("REFLEX_API_KEY"); key && *key) cfg.api_key = key;
}

BackendConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
    BackendConfig cfg;
    try {
        cfg = Json::parse(in).get<BackendConfig>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
    }
    apply_env_overrides(cfg);
    validate_config(cfg);
    return cfg;
}

PersonaTable default_personas() {
    return {
        {"A", "fashion-sdxl-lora-a"}, {"B", "fashion-sdxl-lora-b"}, {"C", "fashion-sdxl-lora-c"},
        {"D", "fashion-sdxl-lora-d"}, {"E", "fashion-sdxl-lora-e"}, {"F", "fashion-sdxl-lora-f"},
    };
}

void select_persona(BackendConfig& cfg, const std::string& persona, const PersonaTable& table) {
    auto it = table.find(persona);
    if (it == table.end()) throw Error(ErrorCode::InvalidArgument, "unknown persona '" + persona + "'");
    cfg.persona = persona;
    if (cfg.kind == Kind::Remote) cfg.model_name = it->second;
}

} // namespace reflex::backends
