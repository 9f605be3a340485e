#include "reflex/core/schema.hpp"

#include <charconv>
#include <set>
#include <utility>

#include "reflex/core/error.hpp"

namespace reflex {

std::optional<std::size_t> AspectSchema::index_of(std::string_view aspect) const {
    for (std::size_t i = 0; i < aspects.size(); ++i)
        if (aspects[i] == aspect) return i;
    return std::nullopt;
}

std::size_t AspectSchema::require_index(std::string_view aspect) const {
    if (auto i = index_of(aspect)) return *i;
    throw Error(ErrorCode::InvalidArgument, "aspect '" + std::string(aspect) + "' not in schema " + name);
}

std::string AspectSchema::value_name(std::size_t aspect, int value) const {
    if (aspect < value_names.size() && value >= 0 && static_cast<std::size_t>(value) < value_names[aspect].size())
        return value_names[aspect][static_cast<std::size_t>(value)];
    return aspects.at(aspect) + "_" + std::to_string(value);
}

std::optional<int> AspectSchema::parse_value(std::size_t aspect, std::string_view text) const {
    for (int v = 0; v < vocab_size; ++v)
        if (value_name(aspect, v) == text) return v;
    int id = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
    if (ec == std::errc() && end == text.data() + text.size() && id >= 0 && id < vocab_size) return id;
    return std::nullopt;
}

std::string AspectSchema::question_for(std::size_t aspect) const {
    std::string text = question_templates.at(aspect);
    const std::string_view key = "{aspect}";
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos))
        text.replace(pos, key.size(), aspects.at(aspect));
    return text;
}

void validate_schema(const AspectSchema& schema) {
    if (schema.aspects.empty()) throw Error(ErrorCode::EmptyAspects, "schema '" + schema.name + "' has no aspects");
    if (schema.question_templates.size() != schema.aspects.size())
        throw Error(ErrorCode::MissingTemplate, "schema '" + schema.name + "' has " +
                                                    std::to_string(schema.aspects.size()) + " aspects but " +
                                                    std::to_string(schema.question_templates.size()) + " templates");
    if (schema.vocab_size < 2)
        throw Error(ErrorCode::VocabTooSmall, "vocab_size must be >= 2, got " + std::to_string(schema.vocab_size));
    std::set<std::string> seen;
    for (const auto& a : schema.aspects)
        if (a.empty() || !seen.insert(a).second)
            throw Error(ErrorCode::EmptyAspects, "aspect names must be non-empty and distinct");
    if (schema.value_names.empty()) return;
    if (schema.value_names.size() != schema.aspects.size())
        throw Error(ErrorCode::BadValueNames, "value_names must have one row per aspect");
    // Display names double as caption text, so they must identify (aspect, value) uniquely.
    std::set<std::string> names;
    for (const auto& row : schema.value_names) {
        if (row.size() != static_cast<std::size_t>(schema.vocab_size))
            throw Error(ErrorCode::BadValueNames, "each value_names row must have vocab_size entries");
        for (const auto& n : row)
            if (n.empty() || n.find(',') != std::string::npos || !names.insert(n).second)
                throw Error(ErrorCode::BadValueNames, "value name '" + n + "' is empty, contains ',' or repeats");
    }
}

namespace {

AspectSchema make_schema(std::string name, std::vector<std::string> aspects,
                         std::vector<std::vector<std::string>> values) {
    AspectSchema s;
    s.name = std::move(name);
    s.vocab_size = 16;
    s.question_templates.assign(aspects.size(), std::string(kDefaultQuestionTemplate));
    s.aspects = std::move(aspects);
    s.value_names = std::move(values);
    return s;
}

} // namespace

AspectSchema default_schema() {
    return make_schema(
        "default", {"Content", "Style", "Background", "Size", "Color", "Perspective", "Other"},
        {
            {"parrot", "cat", "teenage girl", "asian temple", "cherry blossom tea", "lighthouse", "fox", "castle",
             "sailboat", "robot", "horse", "owl", "bicycle", "mushroom", "astronaut", "violin"},
            {"photorealistic", "watercolor", "oil painting", "anime", "pixel art", "pencil sketch", "cyberpunk",
             "impressionist", "low poly", "ukiyo-e", "art deco", "surrealist", "cartoon", "charcoal", "pop art",
             "baroque"},
            {"forest", "beach", "city street", "snowy mountains", "desert", "night sky", "garden", "library",
             "underwater", "meadow", "studio backdrop", "rainy alley", "space station", "waterfall", "market",
             "cloudscape"},
            {"tiny", "small", "medium-sized", "large", "huge", "close-up", "full-body", "half-body", "miniature",
             "life-size", "towering", "wide framing", "tight framing", "centered small", "oversized", "macro"},
            {"red", "blue", "green", "yellow", "purple", "orange", "black and white", "pastel", "golden", "teal",
             "pink", "brown", "silver", "neon", "sepia", "crimson"},
            {"front view", "side view", "top-down view", "low angle", "high angle", "isometric", "wide angle",
             "fisheye", "over-the-shoulder", "three-quarter view", "eye level", "bird's-eye view", "worm's-eye view",
             "dutch angle", "panoramic", "telephoto"},
            {"soft lighting", "dramatic shadows", "fog", "bokeh", "film grain", "lens flare", "sunset glow",
             "rim light", "motion blur", "high detail", "vignette", "glitter", "smoke", "reflections", "rain drops",
             "volumetric light"},
        });
}

AspectSchema fashion_schema() {
    return make_schema(
        "fashion", {"Appearance", "Function", "Material", "Style", "Details", "Occasion", "Other"},
        {
            {"a-line dress", "blazer", "trench coat", "bomber jacket", "maxi skirt", "wrap dress", "denim jacket",
             "cardigan", "jumpsuit", "pleated skirt", "puffer jacket", "shirt dress", "leather jacket", "tunic",
             "slip dress", "peacoat"},
            {"everyday wear", "outerwear", "sportswear", "workwear", "evening wear", "loungewear", "rainwear",
             "travel wear", "layering piece", "statement piece", "uniform", "beachwear", "winter wear",
             "summer wear", "formal wear", "maternity wear"},
            {"cotton", "silk", "wool", "linen", "denim fabric", "leather", "chiffon", "velvet", "polyester",
             "cashmere", "satin", "tweed", "corduroy", "jersey", "organza", "suede"},
            {"minimalist", "bohemian", "preppy", "streetwear", "vintage", "romantic", "avant-garde", "classic",
             "sporty", "gothic", "y2k", "business casual", "grunge", "coastal", "western", "military"},
            {"ruffles", "pleats", "embroidery", "sequins", "lace trim", "belted waist", "puff sleeves",
             "asymmetric hem", "pockets", "buttons", "zipper front", "cut-outs", "fringe", "bow", "collar",
             "slit"},
            {"wedding", "office", "party", "vacation", "date night", "gala", "brunch", "festival", "interview",
             "graduation", "funeral", "concert", "picnic", "ski trip", "cocktail", "commute"},
            {"oversized fit", "slim fit", "cropped", "high-waisted", "monochrome", "color-blocked", "floral print",
             "striped", "plaid", "polka dot", "animal print", "metallic sheen", "sheer", "layered", "reversible",
             "distressed"},
        });
}

SchemaRegistry::SchemaRegistry() {
    add(default_schema());
    add(fashion_schema());
}

void SchemaRegistry::add(AspectSchema schema) {
    validate_schema(schema);
    auto key = schema.name;
    schemas_.insert_or_assign(std::move(key), std::move(schema));
}

const AspectSchema* SchemaRegistry::find(std::string_view name) const {
    auto it = schemas_.find(name);
    return it == schemas_.end() ? nullptr : &it->second;
}

const AspectSchema& SchemaRegistry::get(std::string_view name) const {
    if (const auto* s = find(name)) return *s;
    throw Error(ErrorCode::UnknownSchema, "no schema named '" + std::string(name) + "'");
}

std::vector<std::string> SchemaRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : schemas_) out.push_back(k);
    return out;
}

} // namespace reflex
