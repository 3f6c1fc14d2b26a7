#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace docstruct {

/// Exception carrying a module-qualified error code such as
/// "ingest.SchemaUnknown" or "cli.ConfigNotFound".
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// A non-fatal finding recorded while processing (validation problems,
/// dropped predictions, fallbacks). Codes use the same module prefix scheme
/// as Error.
struct Issue {
    std::string code;
    std::string message;
    std::optional<std::size_t> idx;

    bool operator==(const Issue&) const = default;
};

using Issues = std::vector<Issue>;

inline void add_issue(Issues& out, std::string code, std::string message,
                      std::optional<std::size_t> idx = std::nullopt) {
    out.push_back(Issue{std::move(code), std::move(message), idx});
}

} // namespace docstruct
