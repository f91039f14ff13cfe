#pragma once

// JSON schema for settings and hidden-variable models.
//
//   SettingTriple   {"a": [x, y, z], "b": [...], "c": [...]}
//                   (two-component vectors are embedded in the z = 0 plane)
//   ChshSettings    {"a": [...], "a_prime": [...], "b": [...], "b_prime": [...]}
//   HiddenVariableModel
//     {
//       "weights":       [w0, w1, ...],
//       "strategy_at":   [{"a_out": {"a": 1, "b": -1, "c": 1},
//                          "b_out": {"a": -1, "b": 1, "c": -1}}, ...],
//       "anticorr_flag": [{"a": true, "b": true, "c": false}, ...],
//       "detect_flag":   [{"aa": true, "ab": true, ..., "cc": true}, ...]
//     }
//   anticorr_flag defaults to (b_out == -a_out) per label; detect_flag
//   defaults to all pairs detected.

#include "json.hpp"

#include "obell/core.hpp"

namespace obell {

using Json = nlohmann::json;

[[nodiscard]] Json to_json(const MeasurementSetting& s);
[[nodiscard]] Json to_json(const SettingTriple& t);
[[nodiscard]] Json to_json(const ChshSettings& t);
[[nodiscard]] Json to_json(const DeterministicStrategy& s);
[[nodiscard]] Json to_json(const HiddenVariableModel& m);
[[nodiscard]] Json to_json(const ModelViolation& v);

// Parsers throw InvalidArgument naming the offending key path.
[[nodiscard]] MeasurementSetting setting_from_json(const Json& j, const std::string& path = "");
[[nodiscard]] SettingTriple setting_triple_from_json(const Json& j, const std::string& path = "");
[[nodiscard]] ChshSettings chsh_settings_from_json(const Json& j, const std::string& path = "");
[[nodiscard]] DeterministicStrategy strategy_from_json(const Json& j, const std::string& path = "");
[[nodiscard]] HiddenVariableModel model_from_json(const Json& j, const std::string& path = "");

}  // namespace obell
