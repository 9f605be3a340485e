#include "reflex/backends/http.hpp"

#include "httplib.h"

namespace reflex::backends {

Endpoint parse_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidArgument, "base_url needs a scheme: " + base_url);
    const auto path_start = base_url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.scheme_host_port = base_url.substr(0, path_start);
    if (path_start != std::string::npos) ep.path_prefix = base_url.substr(path_start);
    while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
    return ep;
}

JsonHttpClient::JsonHttpClient(const std::string& base_url, std::optional<std::string> api_key, int timeout_ms)
    : endpoint_(parse_base_url(base_url)), api_key_(std::move(api_key)), timeout_ms_(timeout_ms) {}

Json JsonHttpClient::post(const std::string& path, const Json& body) const {
    httplib::Client client(endpoint_.scheme_host_port);
    const auto sec = timeout_ms_ / 1000;
    const auto usec = (timeout_ms_ % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    httplib::Headers headers;
    if (api_key_) headers.emplace("Authorization", "Bearer " + *api_key_);

    const auto url = endpoint_.path_prefix + path;
    auto res = client.Post(url, headers, body.dump(), "application/json");
    if (!res)
        throw Error(ErrorCode::BackendUnavailable, "POST " + url + ": " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
        throw Error(ErrorCode::BackendUnavailable, "POST " + url + ": HTTP " + std::to_string(res->status));
    try {
        return Json::parse(res->body);
    } catch (const Json::exception&) {
        throw Error(ErrorCode::BackendUnavailable, "POST " + url + ": reply is not JSON");
    }
}

} // namespace reflex::backends
