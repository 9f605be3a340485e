#pragma once

// In-process stand-in for a chat / image / embedding API.

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "reflex/core/json.hpp"

namespace reflex::testing {

class FakeApi {
public:
    using Handler = std::function<Json(const Json& request)>;

    FakeApi() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        for (const char* path : {"/v1/chat/completions", "/v1/images/generations", "/v1/embeddings"}) {
            server_.Post(path, [this, path](const httplib::Request& req, httplib::Response& res) {
                Handler h;
                {
                    std::lock_guard lock(mu_);
                    requests_.push_back({path, Json::parse(req.body)});
                    auth_ = req.get_header_value("Authorization");
                    h = handlers_[path];
                }
                if (!h) {
                    res.status = 500;
                    return;
                }
                res.set_content(h(Json::parse(req.body)).dump(), "application/json");
            });
        }
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~FakeApi() {
        server_.stop();
        thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

    void on(const std::string& path, Handler h) {
        std::lock_guard lock(mu_);
        handlers_["/v1" + path] = std::move(h);
    }

    std::size_t count(const std::string& path) const {
        std::lock_guard lock(mu_);
        std::size_t n = 0;
        for (const auto& r : requests_) n += r.first == "/v1" + path;
        return n;
    }

    Json last(const std::string& path) const {
        std::lock_guard lock(mu_);
        for (auto it = requests_.rbegin(); it != requests_.rend(); ++it)
            if (it->first == "/v1" + path) return it->second;
        return nullptr;
    }

    std::string last_auth() const {
        std::lock_guard lock(mu_);
        return auth_;
    }

    static Json chat_reply(const std::string& text) {
        return Json{{"choices", Json::array({{{"message", {{"role", "assistant"}, {"content", text}}}, {"finish_reason", "stop"}}})}};
    }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    mutable std::mutex mu_;
    std::map<std::string, Handler> handlers_;
    std::vector<std::pair<std::string, Json>> requests_;
    std::string auth_;
};

} // namespace reflex::testing
