#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "reflex/backends/backend.hpp"
#include "reflex/core/json.hpp"

namespace reflex::backends {

struct BackendConfig {
    Kind kind = Kind::Toy;
    std::optional<std::string> base_url;
    std::optional<std::string> api_key;
    /// Image model; personas resolve to one of these.
    std::optional<std::string> model_name;
    std::optional<std::string> chat_model;
    std::optional<std::string> embedding_model;
    int timeout_ms = 30000;
    std::optional<std::string> persona;
    std::string image_size = "1024x1024";
    /// Ask the chat backend to phrase questions instead of using templates.
    bool backend_questions = false;
};

void validate_config(const BackendConfig& cfg);

void to_json(Json& j, const Kind& k);
void from_json(const Json& j, Kind& k);
void to_json(Json& j, const BackendConfig& c);
void from_json(const Json& j, BackendConfig& c);

/// REFLEX_BASE_URL and REFLEX_API_KEY take precedence over file values.
void apply_env_overrides(BackendConfig& cfg);

/// Reads a JSON config file, applies env overrides and validates.
BackendConfig load_config(const std::filesystem::path& path);

/// persona -> image model name. Each persona is one per-user starting model.
using PersonaTable = std::map<std::string, std::string, std::less<>>;

PersonaTable default_personas();

/// Sets cfg.persona and, for remote configs, model_name from the table.
/// Throws InvalidArgument for unknown personas.
void select_persona(BackendConfig& cfg, const std::string& persona, const PersonaTable& table);

} // namespace reflex::backends
