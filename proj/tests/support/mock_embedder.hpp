#pragma once
// Local HTTP stand-in for a remote embedding service.

#include <atomic>
#include <chrono>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace fixtures {

class MockEmbedder {
public:
    // vector_for(text) supplies each returned vector.
    explicit MockEmbedder(std::function<std::vector<float>(const std::string&)> vector_for, int delay_ms = 0,
                          int status = 200)
        : vector_for_(std::move(vector_for)), delay_ms_(delay_ms), status_(status) {
        server_.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests_;
            if (delay_ms_ > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
            if (status_ != 200) {
                res.status = status_;
                res.set_content("{\"error\":\"mock failure\"}", "application/json");
                return;
            }
            const auto body = nlohmann::json::parse(req.body);
            nlohmann::json vectors = nlohmann::json::array();
            for (const auto& t : body.at("texts")) vectors.push_back(vector_for_(t.get<std::string>()));
            res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockEmbedder() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
    int requests() const { return requests_; }

private:
    std::function<std::vector<float>(const std::string&)> vector_for_;
    int delay_ms_;
    int status_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> requests_{0};
};

}  // namespace fixtures
