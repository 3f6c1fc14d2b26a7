#pragma once

#include <httplib.h>

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "docstruct/json_fwd.hpp"

namespace testsupport {

/// In-process HTTP backend on 127.0.0.1 with a scripted reply per request.
class MockBackend {
public:
    struct Reply {
        int status = 200;
        std::string body;
    };
    using Handler = std::function<Reply(const docstruct::Json& request, const httplib::Request& raw)>;

    explicit MockBackend(Handler h) : handler_(std::move(h)) {
        server_.Post("/predict", [this](const httplib::Request& req, httplib::Response& res) {
            ++calls_;
            docstruct::Json body;
            try {
                body = docstruct::Json::parse(req.body);
            } catch (...) {
                res.status = 400;
                return;
            }
            {
                std::lock_guard<std::mutex> lock(mu_);
                requests_.push_back(body);
                auth_headers_.push_back(req.get_header_value("Authorization"));
            }
            const auto r = handler_(body, req);
            res.status = r.status;
            res.set_content(r.body, "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockBackend() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    MockBackend(const MockBackend&) = delete;
    MockBackend& operator=(const MockBackend&) = delete;

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/predict"; }
    int calls() const { return calls_.load(); }
    std::vector<docstruct::Json> requests() const {
        std::lock_guard<std::mutex> lock(mu_);
        return requests_;
    }
    std::vector<std::string> auth_headers() const {
        std::lock_guard<std::mutex> lock(mu_);
        return auth_headers_;
    }

private:
    Handler handler_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> calls_{0};
    mutable std::mutex mu_;
    std::vector<docstruct::Json> requests_;
    std::vector<std::string> auth_headers_;
};

} // namespace testsupport
