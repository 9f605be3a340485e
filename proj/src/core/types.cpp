#include "reflex/core/types.hpp"

#include <algorithm>

#include "reflex/core/error.hpp"

namespace reflex {

bool AspectVector::fully_specified() const noexcept {
    return std::all_of(slots.begin(), slots.end(), [](const auto& s) { return s.has_value(); });
}

std::size_t AspectVector::specified_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(slots.begin(), slots.end(), [](const auto& s) { return s.has_value(); }));
}

void AspectVector::merge_from(const AspectVector& other) {
    if (other.slots.size() != slots.size())
        throw Error(ErrorCode::SchemaMismatch, "cannot merge vectors of different length");
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (other.slots[i]) slots[i] = other.slots[i];
}

void validate_vector(const AspectVector& v, const AspectSchema& schema) {
    if (v.schema != schema.name)
        throw Error(ErrorCode::SchemaMismatch, "vector schema '" + v.schema + "' != '" + schema.name + "'");
    if (v.slots.size() != schema.size())
        throw Error(ErrorCode::SchemaMismatch, "vector has " + std::to_string(v.slots.size()) + " slots, schema " +
                                                   std::to_string(schema.size()));
    for (const auto& s : v.slots)
        if (s && (*s < 0 || *s >= schema.vocab_size))
            throw Error(ErrorCode::InvalidArgument, "slot value " + std::to_string(*s) + " outside vocab");
}

std::string phrase_stack(const AspectVector& v, const AspectSchema& schema) {
    std::string out;
    for (std::size_t i = 0; i < v.slots.size(); ++i) {
        if (!v.slots[i]) continue;
        if (!out.empty()) out += ", ";
        out += schema.value_name(i, *v.slots[i]);
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

} // namespace

std::optional<AspectVector> parse_assignment(std::string_view text, const AspectSchema& schema) {
    auto out = AspectVector::empty_for(schema);
    bool any = false;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) return std::nullopt;
        const auto idx = schema.index_of(trim(item.substr(0, eq)));
        if (!idx) return std::nullopt;
        const auto value = schema.parse_value(*idx, trim(item.substr(eq + 1)));
        if (!value) return std::nullopt;
        out.slots[*idx] = *value;
        any = true;
    }
    if (!any) return std::nullopt;
    return out;
}

void DialogueMemory::append(Turn turn) {
    if (turns.empty() && turn.speaker != Speaker::User)
        throw Error(ErrorCode::InvalidArgument, "first turn must be a user turn");
    if (turn.round < 1) throw Error(ErrorCode::InvalidArgument, "round must be >= 1");
    if (!turns.empty() && turn.round < turns.back().round)
        throw Error(ErrorCode::InvalidArgument, "rounds must be non-decreasing");
    turns.push_back(std::move(turn));
}

bool DialogueMemory::has_user_turn() const noexcept {
    return std::any_of(turns.begin(), turns.end(), [](const Turn& t) { return t.speaker == Speaker::User; });
}

void validate_captions(const CaptionSet& captions, const AspectSchema& schema) {
    for (const auto& a : schema.aspects)
        if (!captions.captions.contains(a)) throw Error(ErrorCode::MissingAspect, "no caption for aspect " + a);
    if (captions.captions.size() != schema.size())
        throw Error(ErrorCode::MissingAspect, "caption set has aspects outside the schema");
}

} // namespace reflex
