#pragma once

// Canonical JSON encodings of the core types. Objects use sorted keys (the
// default nlohmann::json map), so dump() output is canonical and doubles
// round-trip exactly.

#include <json.hpp>

#include "reflex/core/schema.hpp"
#include "reflex/core/types.hpp"
#include "reflex/dpo/trajectory.hpp"

namespace reflex {

using Json = nlohmann::json;

void to_json(Json& j, const AspectSchema& s);
void from_json(const Json& j, AspectSchema& s);
void to_json(Json& j, const AspectVector& v);
void from_json(const Json& j, AspectVector& v);
void to_json(Json& j, const Speaker& s);
void from_json(const Json& j, Speaker& s);
void to_json(Json& j, const Turn& t);
void from_json(const Json& j, Turn& t);
void to_json(Json& j, const DialogueMemory& m);
void from_json(const Json& j, DialogueMemory& m);
void to_json(Json& j, const PromptRecord& p);
void from_json(const Json& j, PromptRecord& p);
void to_json(Json& j, const ImageBlob& b);
void from_json(const Json& j, ImageBlob& b);
void to_json(Json& j, const ImageRecord& r);
void from_json(const Json& j, ImageRecord& r);
void to_json(Json& j, const CaptionSet& c);
void from_json(const Json& j, CaptionSet& c);
void to_json(Json& j, const AmbiguityLabel& a);
void from_json(const Json& j, AmbiguityLabel& a);
void to_json(Json& j, const QuestionSource& s);
void from_json(const Json& j, QuestionSource& s);
void to_json(Json& j, const Question& q);
void from_json(const Json& j, Question& q);

/// Compact canonical text of any encodable value.
template <typename T>
std::string canonical(const T& value) {
    return Json(value).dump();
}

/// Decodes `j` as T, rethrowing decoding failures as Error{InvalidArgument}.
template <typename T>
T decode(const Json& j);

} // namespace reflex

namespace reflex::dpo {

void to_json(reflex::Json& j, const DenoisingTrajectory& t);
void from_json(const reflex::Json& j, DenoisingTrajectory& t);

} // namespace reflex::dpo

#include "reflex/core/json_impl.hpp"
