#pragma once

#include <optional>
#include <string>

#include "reflex/core/json.hpp"

namespace reflex::backends {

struct Endpoint {
    std::string scheme_host_port; // "http://host:port"
    std::string path_prefix;      // "/v1" or ""
};

/// Splits "https://api.example.com/v1" into origin and path prefix.
Endpoint parse_base_url(const std::string& base_url);

/// Minimal JSON-over-HTTP POST helper. A fresh connection per call; callers
/// may share one instance across threads.
class JsonHttpClient {
public:
    JsonHttpClient(const std::string& base_url, std::optional<std::string> api_key, int timeout_ms);

    /// POSTs `body` to prefix + `path`. Network errors, timeouts, non-2xx
    /// replies and non-JSON bodies all throw Error{BackendUnavailable}.
    Json post(const std::string& path, const Json& body) const;

private:
    Endpoint endpoint_;
    std::optional<std::string> api_key_;
    int timeout_ms_;
};

} // namespace reflex::backends
