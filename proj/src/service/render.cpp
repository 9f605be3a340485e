#include "reflex/service/render.hpp"

#include "reflex/backends/config.hpp"
#include "reflex/backends/digest.hpp"

namespace reflex::service {

Json toy_card(const AspectVector& image, const AspectSchema& schema) {
    Json cells = Json::array();
    for (std::size_t i = 0; i < schema.size() && i < image.size(); ++i) {
        const auto& slot = image.slots[i];
        const auto label = slot ? schema.value_name(i, *slot) : std::string("?");
        cells.push_back({{"aspect", schema.aspects[i]},
                         {"value", slot ? Json(*slot) : Json(nullptr)},
                         {"label", label},
                         {"color", "#" + sha256_hex(schema.aspects[i] + "=" + label).substr(0, 6)}});
    }
    return cells;
}

Json render_image(const ImageRecord& image, const AspectSchema& schema) {
    Json out{{"round", image.round}, {"seed", image.seed}, {"has_trajectory", image.trajectory.has_value()}};
    if (const auto* v = image.toy()) {
        out["kind"] = "toy";
        out["vector"] = *v;
        out["card"] = toy_card(*v, schema);
    } else if (const auto* b = image.blob()) {
        out["kind"] = "blob";
        out["hash"] = b->hash;
        out["media_type"] = b->media_type;
        out["size"] = b->size;
        out["url"] = "/images/" + b->hash;
    }
    return out;
}

Json render_round(const engine::RoundRecord& r, const AspectSchema& schema) {
    return Json{{"round", r.round},
                {"prompt", r.prompt},
                {"image", render_image(r.image, schema)},
                {"captions", r.captions.captions},
                {"ambiguity", r.ambiguity},
                {"question", r.question}};
}

Json render_session(const engine::SessionState& s, const std::optional<std::string>& model) {
    return Json{{"id", s.id},
                {"persona", s.persona ? Json(*s.persona) : Json(nullptr)},
                {"model", model ? Json(*model) : Json(nullptr)},
                {"schema", s.schema.name},
                {"mode", s.mode},
                {"round", s.current_round()},
                {"open_question", s.rounds.empty() ? Json(nullptr) : Json(s.rounds.back().question)},
                {"status", s.status}};
}

} // namespace reflex::service
