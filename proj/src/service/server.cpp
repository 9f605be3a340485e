#include "reflex/service/server.hpp"

#include <httplib.h>

#include "reflex/backends/digest.hpp"
#include "reflex/core/error.hpp"
#include "reflex/service/render.hpp"

namespace reflex::service {

int http_status(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::RoundInFlight:
    case ErrorCode::SessionClosed: return 409;
    case ErrorCode::BackendUnavailable:
    case ErrorCode::MissingAspect: return 502;
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidPrompt:
    case ErrorCode::MissingTrajectory:
    case ErrorCode::ToolUnavailable:
    case ErrorCode::EmptyStore:
    case ErrorCode::EmptyPrompt:
    case ErrorCode::OutOfRange:
    case ErrorCode::SchemaMismatch:
    case ErrorCode::NothingNeglected: return 422;
    case ErrorCode::IoError:
    case ErrorCode::CorruptLog: return 500;
    default: return 400;
    }
}

ListenAddress parse_listen(const std::string& text) {
    ListenAddress out;
    const auto colon = text.rfind(':');
    std::string port = text;
    if (colon != std::string::npos) {
        if (colon > 0) out.host = text.substr(0, colon);
        port = text.substr(colon + 1);
    }
    try {
        std::size_t used = 0;
        out.port = std::stoi(port, &used);
        if (used != port.size() || out.port < 0 || out.port > 65535) throw std::invalid_argument(port);
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "bad listen address '" + text + "'");
    }
    return out;
}

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
    send_json(res, http_status(code), Json{{"error", to_string(code)}, {"message", message}});
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            send_error(res, e.code(), e.what());
        } catch (const Json::exception& e) {
            send_json(res, 400, Json{{"error", "BadRequest"}, {"message", e.what()}});
        }
    };
}

Json body_of(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    auto j = Json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    return j;
}

engine::UserInput user_input(const Json& body, const AspectSchema& schema, backends::Kind mode) {
    std::string text = body.value("text", "");
    std::optional<std::string> assignment;
    if (body.contains("assignment")) {
        const auto& a = body.at("assignment");
        if (a.is_string()) {
            assignment = a.get<std::string>();
        } else if (a.is_object()) {
            std::string joined;
            for (const auto& [aspect, value] : a.items())
                joined += (joined.empty() ? "" : ", ") + aspect + "=" + (value.is_string() ? value.get<std::string>() : value.dump());
            assignment = joined;
        } else {
            throw Error(ErrorCode::InvalidArgument, "assignment must be a string or an object");
        }
    }
    engine::UserInput input;
    if (assignment) {
        input.structured = parse_assignment(*assignment, schema);
        if (!input.structured) throw Error(ErrorCode::InvalidArgument, "cannot parse assignment '" + *assignment + "'");
        input.text = text.empty() ? *assignment : text;
    } else if (mode == backends::Kind::Toy) {
        input = engine::parse_user_input(text, schema);
    } else {
        input.text = text;
    }
    if (input.text.empty()) throw Error(ErrorCode::InvalidArgument, "message needs text or assignment");
    return input;
}

} // namespace

HttpServer::HttpServer(SessionManager& manager) : manager_(manager), server_(std::make_unique<httplib::Server>()) {
    routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port))
        throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::serve() { server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_ && server_->is_running()) server_->stop();
}

void HttpServer::wait_until_ready() { server_->wait_until_ready(); }

void HttpServer::routes() {
    auto& s = *server_;
    auto& m = manager_;

    s.Get("/schema", guarded([&m](const httplib::Request&, httplib::Response& res) {
        Json schemas = Json::array();
        for (const auto& name : m.schemas().names()) schemas.push_back(m.schemas().get(name));
        send_json(res, 200, Json{{"schemas", schemas}});
    }));

    s.Post("/sessions", guarded([&m](const httplib::Request& req, httplib::Response& res) {
        const auto body = body_of(req);
        CreateRequest cr;
        cr.schema = body.value("schema", cr.schema);
        if (body.contains("persona") && !body.at("persona").is_null()) cr.persona = body.at("persona").get<std::string>();
        if (body.contains("mode")) cr.mode = body.at("mode").get<backends::Kind>();
        if (body.contains("seed") && !body.at("seed").is_null()) cr.seed = body.at("seed").get<std::uint64_t>();
        const auto state = m.create(cr);
        send_json(res, 201, render_session(state, m.model_for(state)));
    }));

    s.Get("/sessions", guarded([&m](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, Json{{"sessions", m.session_ids()}});
    }));

    s.Get(R"(/sessions/([^/]+))", guarded([&m](const httplib::Request& req, httplib::Response& res) {
        const auto state = m.state(req.matches[1]);
        auto out = render_session(state, m.model_for(state));
        Json rounds = Json::array();
        for (const auto& r : state.rounds) rounds.push_back(render_round(r, state.schema));
        out["rounds"] = rounds;
        send_json(res, 200, out);
    }));

    s.Post(R"(/sessions/([^/]+)/message)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const auto before = m.state(id);
        const auto input = user_input(body_of(req), before.schema, before.mode);
        const auto outcome = m.message(id, input);
        const auto after = m.state(id);
        send_json(res, 200,
                  Json{{"session", render_session(after, m.model_for(after))},
                       {"round", render_round(outcome.record, after.schema)},
                       {"last_seq", outcome.events.back().seq}});
    }));

    s.Post(R"(/sessions/([^/]+)/preference)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
        const auto body = body_of(req);
        const auto out = m.preference(req.matches[1], body.at("winner_round").get<int>(), body.at("loser_round").get<int>());
        send_json(res, 200,
                  Json{{"pair_count", out.pair_count},
                       {"pairs_until_training", out.pairs_until_training},
                       {"trained", out.trained},
                       {"last_seq", out.events.back().seq}});
    }));

    s.Post(R"(/sessions/([^/]+)/refine)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
        const auto body = body_of(req);
        const auto tool = body.value("tool", "");
        const auto params = body.value("params", Json::object());
        if (tool == "dpo") {
            const auto out = m.refine_dpo(req.matches[1]);
            send_json(res, 200,
                      Json{{"tool", "dpo"},
                           {"pair_count", out.pair_count},
                           {"steps", out.curve.size()},
                           {"initial_loss", out.curve.front().loss},
                           {"final_loss", out.curve.back().loss},
                           {"kl", out.kl},
                           {"last_seq", out.events.back().seq}});
        } else if (tool == "aae") {
            aae::ToolConfig cfg;
            cfg.threshold = params.value("threshold", cfg.threshold);
            cfg.max_iterations = params.value("max_iterations", cfg.max_iterations);
            std::optional<double> neglect;
            if (params.contains("neglect_prob")) neglect = params.at("neglect_prob").get<double>();
            const std::string id = req.matches[1];
            const auto out = m.refine_aae(id, cfg, neglect);
            const auto schema = m.state(id).schema;
            send_json(res, 200,
                      Json{{"tool", "aae"},
                           {"round", out.round},
                           {"report", out.report},
                           {"image", {{"kind", "toy"}, {"vector", out.image}, {"card", toy_card(out.image, schema)}}},
                           {"last_seq", out.events.back().seq}});
        } else {
            throw Error(ErrorCode::InvalidArgument, "tool must be dpo or aae");
        }
    }));

    s.Post(R"(/sessions/([^/]+)/close)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
        const auto state = m.close(req.matches[1]);
        send_json(res, 200, render_session(state, m.model_for(state)));
    }));

    s.Get(R"(/sessions/([^/]+)/events)", guarded([&m](const httplib::Request& req, httplib::Response& res) {
        std::uint64_t since = 0;
        int wait = 0;
        try {
            if (req.has_param("since")) since = std::stoull(req.get_param_value("since"));
            if (req.has_param("wait")) wait = std::stoi(req.get_param_value("wait"));
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "since and wait must be integers");
        }
        const auto events = m.events(req.matches[1], since, wait);
        send_json(res, 200, Json{{"events", events}, {"last_seq", events.empty() ? since : events.back().seq}});
    }));

    s.Get(R"(/images/([^/]+))", guarded([&m](const httplib::Request& req, httplib::Response& res) {
        const auto bytes = m.image(req.matches[1]);
        if (!bytes) throw Error(ErrorCode::NotFound, "no image " + std::string(req.matches[1]));
        res.set_content(*bytes, sniff_media_type(*bytes));
    }));
}

} // namespace reflex::service
