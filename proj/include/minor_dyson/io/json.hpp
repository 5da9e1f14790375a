#pragma once

// ExperimentReport as JSON. Keys keep insertion order and non-finite numbers become null, so
// the same report always serializes to the same bytes.

#include <cmath>
#include <string>
#include <type_traits>
#include <variant>

#include <json.hpp>

#include "minor_dyson/core/report.hpp"

#ifndef MINOR_DYSON_VERSION
#define MINOR_DYSON_VERSION "0.1.0"
#endif

namespace minor_dyson::io {

using Json = nlohmann::ordered_json;

inline Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json to_json(const ExperimentReport& r, const Json& config = Json::object()) {
  Json j;
  j["name"] = r.name;
  Json params = Json::object();
  for (const auto& [key, value] : r.params)
    std::visit(
        [&, k = key](const auto& v) {
          if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>)
            params[k] = number(v);
          else
            params[k] = v;
        },
        value);
  j["params"] = std::move(params);
  j["config"] = config;
  Json stats = Json::array();
  for (const auto& s : r.statistics) stats.push_back({{"name", s.name}, {"value", number(s.value)}, {"stderr", number(s.stderr_)}});
  j["statistics"] = std::move(stats);
  Json tests = Json::array();
  for (const auto& t : r.tests)
    tests.push_back({{"name", t.name}, {"statistic", number(t.statistic)}, {"p", number(t.p)}, {"pass", t.pass}});
  j["tests"] = std::move(tests);
  j["pass"] = r.pass();
  j["provenance"] = {{"seed", r.provenance.seed},
                     {"dt", number(r.provenance.dt)},
                     {"paths", r.provenance.paths},
                     {"config_digest", r.provenance.config_digest},
                     {"version", MINOR_DYSON_VERSION}};
  return j;
}

inline std::string dump(const ExperimentReport& r, const Json& config = Json::object()) {
  return to_json(r, config).dump(2) + "\n";
}

}  // namespace minor_dyson::io
