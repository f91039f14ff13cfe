#include "obell/serialize.hpp"

namespace obell {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InvalidArgument((path.empty() ? std::string("/") : path) + ": " + what);
}

const Json& member(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "/" + key, "missing required key");
  return *it;
}

int outcome_from_json(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || (j.get<int>() != 1 && j.get<int>() != -1))
    fail(path, "outcome must be the integer 1 or -1");
  return j.get<int>();
}

std::array<int, 3> outcomes_from_json(const Json& j, const std::string& path) {
  std::array<int, 3> out{};
  for (Label s : kLabels) {
    const std::string key(1, label_char(s));
    out[index(s)] = outcome_from_json(member(j, key, path), path + "/" + key);
  }
  return out;
}

Json outcomes_to_json(const std::array<int, 3>& v) {
  Json j = Json::object();
  for (Label s : kLabels) j[std::string(1, label_char(s))] = v[index(s)];
  return j;
}

bool flag_from_json(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

}  // namespace

Json to_json(const MeasurementSetting& s) { return Json::array({s[0], s[1], s[2]}); }

Json to_json(const SettingTriple& t) {
  return {{"a", to_json(t.a)}, {"b", to_json(t.b)}, {"c", to_json(t.c)}};
}

Json to_json(const ChshSettings& t) {
  return {{"a", to_json(t.a)},
          {"a_prime", to_json(t.a_prime)},
          {"b", to_json(t.b)},
          {"b_prime", to_json(t.b_prime)}};
}

Json to_json(const DeterministicStrategy& s) {
  return {{"a_out", outcomes_to_json(s.a_values())}, {"b_out", outcomes_to_json(s.b_values())}};
}

Json to_json(const HiddenVariableModel& m) {
  Json strategies = Json::array();
  Json anticorr = Json::array();
  Json detect = Json::array();
  for (std::size_t i = 0; i < m.atoms(); ++i) {
    strategies.push_back(to_json(m.strategy_at(i)));
    Json a = Json::object();
    for (Label s : kLabels) a[std::string(1, label_char(s))] = m.anticorr_flag(i, s);
    anticorr.push_back(std::move(a));
    Json d = Json::object();
    for (std::size_t p = 0; p < kPairCount; ++p) {
      const auto st = SettingPair::from_index(p);
      d[st.name()] = m.detect_flag(i, st);
    }
    detect.push_back(std::move(d));
  }
  return {{"weights", m.weights()},
          {"strategy_at", std::move(strategies)},
          {"anticorr_flag", std::move(anticorr)},
          {"detect_flag", std::move(detect)}};
}

Json to_json(const ModelViolation& v) {
  Json j = {{"field", v.field}, {"message", v.message}};
  j["atom"] = v.atom ? Json(*v.atom) : Json(nullptr);
  return j;
}

MeasurementSetting setting_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3))
    fail(path, "setting must be an array of 2 or 3 numbers");
  Vec3 v{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + "/" + std::to_string(i), "expected a number");
    v[i] = j[i].get<double>();
  }
  try {
    return make_setting(v);
  } catch (const InvalidArgument& e) {
    fail(path, e.what());
  }
}

SettingTriple setting_triple_from_json(const Json& j, const std::string& path) {
  return {setting_from_json(member(j, "a", path), path + "/a"),
          setting_from_json(member(j, "b", path), path + "/b"),
          setting_from_json(member(j, "c", path), path + "/c")};
}

ChshSettings chsh_settings_from_json(const Json& j, const std::string& path) {
  return {setting_from_json(member(j, "a", path), path + "/a"),
          setting_from_json(member(j, "a_prime", path), path + "/a_prime"),
          setting_from_json(member(j, "b", path), path + "/b"),
          setting_from_json(member(j, "b_prime", path), path + "/b_prime")};
}

DeterministicStrategy strategy_from_json(const Json& j, const std::string& path) {
  return {outcomes_from_json(member(j, "a_out", path), path + "/a_out"),
          outcomes_from_json(member(j, "b_out", path), path + "/b_out")};
}

HiddenVariableModel model_from_json(const Json& j, const std::string& path) {
  const Json& jw = member(j, "weights", path);
  if (!jw.is_array()) fail(path + "/weights", "expected an array");
  std::vector<double> weights;
  for (std::size_t i = 0; i < jw.size(); ++i) {
    if (!jw[i].is_number()) fail(path + "/weights/" + std::to_string(i), "expected a number");
    weights.push_back(jw[i].get<double>());
  }
  const std::size_t n = weights.size();

  const Json& js = member(j, "strategy_at", path);
  if (!js.is_array() || js.size() != n)
    fail(path + "/strategy_at", "expected an array with one entry per weight");
  std::vector<DeterministicStrategy> strategies;
  for (std::size_t i = 0; i < n; ++i)
    strategies.push_back(strategy_from_json(js[i], path + "/strategy_at/" + std::to_string(i)));

  std::vector<HiddenVariableModel::AnticorrFlags> anticorr(n);
  if (auto it = j.find("anticorr_flag"); it != j.end()) {
    if (!it->is_array() || it->size() != n)
      fail(path + "/anticorr_flag", "expected an array with one entry per weight");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string p = path + "/anticorr_flag/" + std::to_string(i);
      for (Label s : kLabels) {
        const std::string key(1, label_char(s));
        anticorr[i][index(s)] = flag_from_json(member((*it)[i], key, p), p + "/" + key);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (Label s : kLabels)
        anticorr[i][index(s)] = strategies[i].b_out(s) == -strategies[i].a_out(s);
  }

  HiddenVariableModel::DetectFlags all{};
  all.fill(true);
  std::vector<HiddenVariableModel::DetectFlags> detect(n, all);
  if (auto it = j.find("detect_flag"); it != j.end()) {
    if (!it->is_array() || it->size() != n)
      fail(path + "/detect_flag", "expected an array with one entry per weight");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string p = path + "/detect_flag/" + std::to_string(i);
      for (std::size_t q = 0; q < kPairCount; ++q) {
        const std::string key = SettingPair::from_index(q).name();
        detect[i][q] = flag_from_json(member((*it)[i], key, p), p + "/" + key);
      }
    }
  }
  return {std::move(weights), std::move(strategies), std::move(anticorr), std::move(detect)};
}

}  // namespace obell
