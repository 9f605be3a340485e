#pragma once

#include <memory>
#include <string>

#include "reflex/service/session_manager.hpp"

namespace httplib {
class Server;
}

namespace reflex::service {

/// HTTP status for an error code (404, 409, 422, 502, 400 ...).
int http_status(ErrorCode code);

/// JSON API over a SessionManager.
class HttpServer {
public:
    explicit HttpServer(SessionManager& manager);
    ~HttpServer();

    /// Binds; port 0 picks a free port. Returns the bound port or throws IoError.
    int bind(const std::string& host, int port);
    /// Serves until stop(). Call after bind().
    void serve();
    void stop();
    /// Blocks until the server accepts connections.
    void wait_until_ready();

private:
    void routes();
    SessionManager& manager_;
    std::unique_ptr<httplib::Server> server_;
};

struct ListenAddress {
    std::string host = "127.0.0.1";
    int port = 8080;
};

/// "host:port", ":port" or "port".
ListenAddress parse_listen(const std::string& text);

} // namespace reflex::service
