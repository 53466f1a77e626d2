#pragma once

#include <string>

#include "json.hpp"
#include "qtangent/freeprob.hpp"
#include "qtangent/simulate.hpp"
#include "qtangent/tangent.hpp"

namespace qtangent {

inline constexpr const char* kVersion = "0.1.0";

nlohmann::json to_json(const ConvergenceReport& report);
nlohmann::json to_json(const IdentityReport& report);
nlohmann::json to_json(const JumpStats& stats);

/// {"tool": "qtangent", "version": ..., "command": ..., "result": ...}
nlohmann::json wrap_result(const std::string& command, nlohmann::json result);

/// NaN and infinities become null.
nlohmann::json number(double v);

}  // namespace qtangent
