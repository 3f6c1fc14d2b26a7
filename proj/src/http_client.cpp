#include "docstruct/http_client.hpp"

#include <httplib.h>

#include "docstruct/error.hpp"

namespace docstruct {

JsonHttpClient::JsonHttpClient(BackendConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme_end = cfg_.url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error("predictors.BackendUnavailable", "backend URL has no scheme: " + cfg_.url);
    }
    const auto path_start = cfg_.url.find('/', scheme_end + 3);
    origin_ = cfg_.url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : cfg_.url.substr(path_start);
}

JsonHttpClient::~JsonHttpClient() = default;

Json JsonHttpClient::post(const Json& body) const {
    httplib::Client client(origin_);
    const auto sec = cfg_.timeout_ms / 1000;
    const auto usec = (cfg_.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    httplib::Headers headers;
    if (cfg_.auth_token && !cfg_.auth_token->empty()) {
        headers.emplace("Authorization", "Bearer " + *cfg_.auth_token);
    }
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
        throw Error("predictors.BackendUnavailable",
                    "POST " + cfg_.url + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error("predictors.BackendUnavailable",
                    "POST " + cfg_.url + " returned HTTP " + std::to_string(res->status));
    }
    try {
        return Json::parse(res->body);
    } catch (const Json::parse_error& e) {
        throw Error("predictors.MalformedResponse", std::string("response is not JSON: ") + e.what());
    }
}

} // namespace docstruct
