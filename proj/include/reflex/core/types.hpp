#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "reflex/core/schema.hpp"
#include "reflex/dpo/trajectory.hpp"

namespace reflex {

/// Structured stand-in for an image, a prompt, a caption set or an intent:
/// one optional value id per schema aspect.
struct AspectVector {
    std::string schema;
    std::vector<std::optional<int>> slots;

    AspectVector() = default;
    AspectVector(std::string schema_name, std::size_t aspects)
        : schema(std::move(schema_name)), slots(aspects) {}
    static AspectVector empty_for(const AspectSchema& s) { return AspectVector(s.name, s.size()); }

    std::size_t size() const noexcept { return slots.size(); }
    bool fully_specified() const noexcept;
    std::size_t specified_count() const noexcept;

    /// Overwrites every slot that `other` specifies.
    void merge_from(const AspectVector& other);

    bool operator==(const AspectVector&) const = default;
};

/// Throws InvalidArgument/SchemaMismatch unless `v` fits `schema`.
void validate_vector(const AspectVector& v, const AspectSchema& schema);

/// Comma-joined display names of the specified slots, in schema order.
std::string phrase_stack(const AspectVector& v, const AspectSchema& schema);

/// Parses "Color=red, Content=parrot" (names or ids). Returns nullopt when the
/// text is not an assignment list.
std::optional<AspectVector> parse_assignment(std::string_view text, const AspectSchema& schema);

enum class Speaker { User, Agent };

struct Turn {
    int round = 1;
    Speaker speaker = Speaker::User;
    std::string text;
    std::optional<AspectVector> structured;

    bool operator==(const Turn&) const = default;
};

struct DialogueMemory {
    std::vector<Turn> turns;

    /// Throws InvalidArgument if the turn would break ordering invariants.
    void append(Turn turn);
    bool has_user_turn() const noexcept;

    bool operator==(const DialogueMemory&) const = default;
};

struct PromptRecord {
    int round = 0;
    std::string text;
    std::optional<AspectVector> structured;

    bool operator==(const PromptRecord&) const = default;
};

/// Reference to remote image bytes held in the content-addressed blob store.
struct ImageBlob {
    std::string hash;
    std::string media_type = "image/png";
    std::uint64_t size = 0;

    bool operator==(const ImageBlob&) const = default;
};

struct ImageRecord {
    int round = 0;
    std::variant<AspectVector, ImageBlob> payload;
    std::uint64_t seed = 0;
    std::optional<dpo::DenoisingTrajectory> trajectory;

    const AspectVector* toy() const noexcept { return std::get_if<AspectVector>(&payload); }
    const ImageBlob* blob() const noexcept { return std::get_if<ImageBlob>(&payload); }

    bool operator==(const ImageRecord&) const = default;
};

struct CaptionSet {
    int round = 0;
    std::map<std::string, std::string> captions;
    std::optional<AspectVector> structured;

    bool operator==(const CaptionSet&) const = default;
};

/// Throws MissingAspect unless `captions` covers every schema aspect exactly.
void validate_captions(const CaptionSet& captions, const AspectSchema& schema);

struct AmbiguityLabel {
    int round = 0;
    std::map<std::string, double> scores;
    std::vector<std::string> candidates;
    std::string chosen;

    bool operator==(const AmbiguityLabel&) const = default;
};

enum class QuestionSource { Template, Backend };

struct Question {
    int round = 0;
    std::string aspect;
    std::string text;
    QuestionSource source = QuestionSource::Template;

    bool operator==(const Question&) const = default;
};

} // namespace reflex
