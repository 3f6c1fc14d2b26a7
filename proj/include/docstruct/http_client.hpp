#pragma once

#include <memory>
#include <optional>
#include <string>

#include "docstruct/json_fwd.hpp"

namespace docstruct {

struct BackendConfig {
    std::string url;           // e.g. http://127.0.0.1:8080/predict
    int timeout_ms = 30000;
    /// Sent as "Authorization: Bearer <token>"; never logged or serialized.
    std::optional<std::string> auth_token;
};

/// Minimal JSON-over-HTTP POST client shared by the remote predictor and the
/// remote summarizer.
class JsonHttpClient {
public:
    explicit JsonHttpClient(BackendConfig cfg);
    ~JsonHttpClient();
    JsonHttpClient(const JsonHttpClient&) = delete;
    JsonHttpClient& operator=(const JsonHttpClient&) = delete;

    /// Throws predictors.BackendUnavailable on transport errors or non-2xx
    /// status, predictors.MalformedResponse when the body is not JSON.
    Json post(const Json& body) const;

    const std::string& url() const { return cfg_.url; }

private:
    BackendConfig cfg_;
    std::string origin_;
    std::string path_;
};

} // namespace docstruct
