#pragma once

#include "reflex/core/json.hpp"
#include "reflex/engine/engine.hpp"

namespace reflex::service {

/// Card layout for a toy image: one cell per aspect with its value label and a
/// color derived from the label.
Json toy_card(const AspectVector& image, const AspectSchema& schema);

/// Client view of an image: the toy vector plus its card, or a blob URL.
Json render_image(const ImageRecord& image, const AspectSchema& schema);

Json render_round(const engine::RoundRecord& round, const AspectSchema& schema);

/// Session summary: id, persona, model, schema, mode, round, open question, status.
Json render_session(const engine::SessionState& s, const std::optional<std::string>& model);

} // namespace reflex::service
