#include "reflex/core/json.hpp"

namespace reflex {

namespace {

template <typename T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

} // namespace

void to_json(Json& j, const AspectSchema& s) {
    j = Json{{"name", s.name},
             {"aspects", s.aspects},
             {"vocab_size", s.vocab_size},
             {"question_templates", s.question_templates},
             {"value_names", s.value_names}};
}

void from_json(const Json& j, AspectSchema& s) {
    j.at("name").get_to(s.name);
    j.at("aspects").get_to(s.aspects);
    j.at("vocab_size").get_to(s.vocab_size);
    j.at("question_templates").get_to(s.question_templates);
    s.value_names = j.value("value_names", std::vector<std::vector<std::string>>{});
}

void to_json(Json& j, const AspectVector& v) {
    Json slots = Json::array();
    for (const auto& s : v.slots) slots.push_back(optional_json(s));
    j = Json{{"schema", v.schema}, {"slots", std::move(slots)}};
}

void from_json(const Json& j, AspectVector& v) {
    j.at("schema").get_to(v.schema);
    v.slots.clear();
    for (const auto& s : j.at("slots")) v.slots.push_back(s.is_null() ? std::nullopt : std::optional<int>(s.get<int>()));
}

void to_json(Json& j, const Speaker& s) { j = s == Speaker::User ? "user" : "agent"; }

void from_json(const Json& j, Speaker& s) {
    const auto text = j.get<std::string>();
    if (text == "user") s = Speaker::User;
    else if (text == "agent") s = Speaker::Agent;
    else throw Error(ErrorCode::InvalidArgument, "unknown speaker '" + text + "'");
}

void to_json(Json& j, const Turn& t) {
    j = Json{{"round", t.round}, {"speaker", t.speaker}, {"text", t.text}, {"structured", optional_json(t.structured)}};
}

void from_json(const Json& j, Turn& t) {
    j.at("round").get_to(t.round);
    j.at("speaker").get_to(t.speaker);
    j.at("text").get_to(t.text);
    t.structured = optional_from<AspectVector>(j, "structured");
}

void to_json(Json& j, const DialogueMemory& m) { j = Json{{"turns", m.turns}}; }

void from_json(const Json& j, DialogueMemory& m) { j.at("turns").get_to(m.turns); }

void to_json(Json& j, const PromptRecord& p) {
    j = Json{{"round", p.round}, {"text", p.text}, {"structured", optional_json(p.structured)}};
}

void from_json(const Json& j, PromptRecord& p) {
    j.at("round").get_to(p.round);
    j.at("text").get_to(p.text);
    p.structured = optional_from<AspectVector>(j, "structured");
}

void to_json(Json& j, const ImageBlob& b) {
    j = Json{{"hash", b.hash}, {"media_type", b.media_type}, {"size", b.size}};
}

void from_json(const Json& j, ImageBlob& b) {
    j.at("hash").get_to(b.hash);
    j.at("media_type").get_to(b.media_type);
    j.at("size").get_to(b.size);
}

void to_json(Json& j, const ImageRecord& r) {
    Json payload;
    if (const auto* toy = r.toy()) payload = Json{{"kind", "toy"}, {"vector", *toy}};
    else payload = Json{{"kind", "blob"}, {"blob", *r.blob()}};
    j = Json{{"round", r.round}, {"payload", std::move(payload)}, {"seed", r.seed}, {"trajectory", optional_json(r.trajectory)}};
}

void from_json(const Json& j, ImageRecord& r) {
    j.at("round").get_to(r.round);
    const auto& payload = j.at("payload");
    const auto kind = payload.at("kind").get<std::string>();
    if (kind == "toy") r.payload = payload.at("vector").get<AspectVector>();
    else if (kind == "blob") r.payload = payload.at("blob").get<ImageBlob>();
    else throw Error(ErrorCode::InvalidArgument, "unknown image payload kind '" + kind + "'");
    j.at("seed").get_to(r.seed);
    r.trajectory = optional_from<dpo::DenoisingTrajectory>(j, "trajectory");
}

void to_json(Json& j, const CaptionSet& c) {
    j = Json{{"round", c.round}, {"captions", c.captions}, {"structured", optional_json(c.structured)}};
}

void from_json(const Json& j, CaptionSet& c) {
    j.at("round").get_to(c.round);
    j.at("captions").get_to(c.captions);
    c.structured = optional_from<AspectVector>(j, "structured");
}

void to_json(Json& j, const AmbiguityLabel& a) {
    j = Json{{"round", a.round}, {"scores", a.scores}, {"candidates", a.candidates}, {"chosen", a.chosen}};
}

void from_json(const Json& j, AmbiguityLabel& a) {
    j.at("round").get_to(a.round);
    j.at("scores").get_to(a.scores);
    j.at("candidates").get_to(a.candidates);
    j.at("chosen").get_to(a.chosen);
}

void to_json(Json& j, const QuestionSource& s) { j = s == QuestionSource::Template ? "template" : "backend"; }

void from_json(const Json& j, QuestionSource& s) {
    const auto text = j.get<std::string>();
    if (text == "template") s = QuestionSource::Template;
    else if (text == "backend") s = QuestionSource::Backend;
    else throw Error(ErrorCode::InvalidArgument, "unknown question source '" + text + "'");
}

void to_json(Json& j, const Question& q) {
    j = Json{{"round", q.round}, {"aspect", q.aspect}, {"text", q.text}, {"source", q.source}};
}

void from_json(const Json& j, Question& q) {
    j.at("round").get_to(q.round);
    j.at("aspect").get_to(q.aspect);
    j.at("text").get_to(q.text);
    j.at("source").get_to(q.source);
}

} // namespace reflex

namespace reflex::dpo {

void to_json(reflex::Json& j, const DenoisingTrajectory& t) {
    using reflex::Json;
    Json states = Json::array();
    Json actions = Json::array();
    for (Eigen::Index k = 0; k < t.steps(); ++k) {
        std::vector<double> s(t.state(k).begin(), t.state(k).end());
        std::vector<double> a(t.action(k).begin(), t.action(k).end());
        states.push_back(Json{{"step", k}, {"latent", std::move(s)}});
        actions.push_back(std::move(a));
    }
    j = Json{{"states", std::move(states)}, {"actions", std::move(actions)}};
}

void from_json(const reflex::Json& j, DenoisingTrajectory& t) {
    const auto& states = j.at("states");
    const auto& actions = j.at("actions");
    if (states.size() != actions.size() || states.empty())
        throw reflex::Error(reflex::ErrorCode::ShapeMismatch, "trajectory needs equal, non-zero state/action counts");
    const auto steps = static_cast<Eigen::Index>(states.size());
    const auto dim = static_cast<Eigen::Index>(states.at(0).at("latent").size());
    t.latents.resize(steps + 1, dim);
    for (Eigen::Index k = 0; k < steps; ++k) {
        const auto s = states.at(k).at("latent").get<std::vector<double>>();
        const auto a = actions.at(k).get<std::vector<double>>();
        if (static_cast<Eigen::Index>(s.size()) != dim || static_cast<Eigen::Index>(a.size()) != dim ||
            states.at(k).at("step").get<Eigen::Index>() != k)
            throw reflex::Error(reflex::ErrorCode::ShapeMismatch, "trajectory step " + std::to_string(k) + " malformed");
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (k > 0 && t.latents(k, i) != s[static_cast<std::size_t>(i)])
                throw reflex::Error(reflex::ErrorCode::ShapeMismatch,
                                    "state " + std::to_string(k) + " does not continue action " + std::to_string(k - 1));
            t.latents(k, i) = s[static_cast<std::size_t>(i)];
            t.latents(k + 1, i) = a[static_cast<std::size_t>(i)];
        }
    }
}

} // namespace reflex::dpo
