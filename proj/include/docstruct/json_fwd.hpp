#pragma once

#include <json.hpp>

namespace docstruct {

// Insertion-ordered JSON keeps every artifact's key order stable.
using Json = nlohmann::ordered_json;

} // namespace docstruct
