#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reflex {

/// The caption aspects a session reasons about, their value vocabulary, and
/// the question asked for each aspect.
struct AspectSchema {
    std::string name;
    std::vector<std::string> aspects;
    int vocab_size = 16;
    /// One template per aspect; "{aspect}" is replaced by the aspect name.
    std::vector<std::string> question_templates;
    /// value_names[aspect][id]: display name of value `id`. Empty means
    /// generated names ("<aspect>_<id>").
    std::vector<std::vector<std::string>> value_names;

    std::size_t size() const noexcept { return aspects.size(); }

    /// Index of `aspect` in schema order.
    std::optional<std::size_t> index_of(std::string_view aspect) const;
    /// Like index_of but throws InvalidArgument.
    std::size_t require_index(std::string_view aspect) const;

    std::string value_name(std::size_t aspect, int value) const;
    /// Accepts a display name or a decimal id; nullopt if neither matches.
    std::optional<int> parse_value(std::size_t aspect, std::string_view text) const;

    std::string question_for(std::size_t aspect) const;

    bool operator==(const AspectSchema&) const = default;
};

inline constexpr std::string_view kDefaultQuestionTemplate = "What should the {aspect} of the image be?";

/// Throws Error{EmptyAspects | MissingTemplate | VocabTooSmall | BadValueNames}
/// naming the violated invariant.
void validate_schema(const AspectSchema& schema);

/// Content, Style, Background, Size, Color, Perspective, Other; V = 16.
AspectSchema default_schema();
/// Appearance, Function, Material, Style, Details, Occasion, Other; V = 16.
AspectSchema fashion_schema();

/// Name -> schema table. Ships with "default" and "fashion".
class SchemaRegistry {
public:
    SchemaRegistry();

    void add(AspectSchema schema);
    const AspectSchema* find(std::string_view name) const;
    /// Throws Error{UnknownSchema}.
    const AspectSchema& get(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, AspectSchema, std::less<>> schemas_;
};

} // namespace reflex
