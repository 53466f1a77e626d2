#include "qtangent/report.hpp"

#include <cmath>

namespace qtangent {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json to_json(const ConvergenceReport& report) {
  const auto& c = report.tangent_case;
  nlohmann::json ladder = nlohmann::json::array();
  for (const auto& rung : report.ladder) {
    ladder.push_back({{"eps", rung.eps},
                      {"l1", number(rung.distance.l1)},
                      {"sup", number(rung.distance.sup)},
                      {"window_lo", number(rung.distance.window_lo)},
                      {"window_hi", number(rung.distance.window_hi)},
                      {"shrunk", rung.distance.shrunk}});
  }
  const auto& w = report.window;
  return {{"case", std::string(to_string(c.tag))},
          {"q", c.q},
          {"s", c.s},
          {"x", c.x},
          {"window", {{"t1", w.t1}, {"t2", w.t2}, {"y1", w.y1}, {"y_lo", number(w.y_lo)}, {"y_hi", number(w.y_hi)}}},
          {"ladder", ladder},
          {"monotone", report.monotone},
          {"terminal_ok", report.terminal_ok},
          {"verdict", report.verdict ? "pass" : "fail"},
          {"threshold", report.threshold},
          {"slack", report.slack},
          {"resolution", report.resolution}};
}

nlohmann::json to_json(const IdentityReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    checks.push_back(
        {{"name", c.name}, {"max_residual", number(c.max_residual)}, {"threshold", c.threshold}, {"pass", c.pass}});
  }
  return {{"kind", std::string(to_string(report.kind))},
          {"samples", report.samples},
          {"max_residual", number(report.max_residual)},
          {"threshold", report.threshold},
          {"pass", report.pass},
          {"worst_point", report.worst_point},
          {"checks", checks}};
}

nlohmann::json to_json(const JumpStats& stats) {
  return {{"max_abs_increment", stats.max_abs_increment},
          {"threshold", stats.threshold},
          {"exceed_count", stats.exceed_count},
          {"ensemble_size", stats.ensemble_size},
          {"fraction", stats.fraction()}};
}

nlohmann::json wrap_result(const std::string& command, nlohmann::json result) {
  return {{"tool", "qtangent"}, {"version", kVersion}, {"command", command}, {"result", std::move(result)}};
}

}  // namespace qtangent
