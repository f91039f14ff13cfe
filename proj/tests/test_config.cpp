#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "obell/experiment.hpp"

using namespace obell;

namespace {

bool mentions(const ConfigError& e, const std::string& needle) {
  return std::any_of(e.errors().begin(), e.errors().end(),
                     [&](const std::string& m) { return m.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("key = value configs") {
  const auto j = parse_config_text(R"(
# comment
source = quantum_white_noise
gamma = 0.9   # trailing comment
fair_sampling = true
settings.a = 1, 0, 0

[settings]
b = 0, 1, 0
c = 0, 0, 1
)");
  CHECK(j["source"] == "quantum_white_noise");
  CHECK(j["gamma"] == 0.9);
  CHECK(j["fair_sampling"] == true);
  CHECK(j["settings"]["a"] == Json::array({1, 0, 0}));
  const auto spec = spec_from_config(j);
  CHECK(spec.source == SourceKind::quantum_white_noise);
  CHECK(spec.gamma == 0.9);
  CHECK(std::get<SettingTriple>(spec.settings).c[2] == 1.0);
}

TEST_CASE("malformed lines carry line numbers") {
  try {
    (void)parse_config_text("source = quantum\nnot a pair\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "line 2"));
  }
}

TEST_CASE("json configs and chsh detection") {
  const auto j = parse_config_text(R"({"settings": {"a": [1,0,0], "a_prime": [0,1,0],
                                       "b": [1,1,0], "b_prime": [1,-1,0]}})");
  CHECK(spec_from_config(j).is_chsh());
  CHECK_THROWS_AS((void)parse_config_text("{ broken"), ConfigError);
}

TEST_CASE("every problem is reported with its key path") {
  const Json j = {{"source", "classical"},
                  {"trials_per_pair", -3},
                  {"detecton", 0.9},
                  {"fair_sampling", "yes"}};
  try {
    (void)spec_from_config(j);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "/source"));
    CHECK(mentions(e, "/trials_per_pair"));
    CHECK(mentions(e, "/detecton: unknown key"));
    CHECK(mentions(e, "/fair_sampling"));
    CHECK(mentions(e, "/settings: missing"));
  }
}

TEST_CASE("range checks run after parsing") {
  const Json j = {{"settings", {{"a", {1, 0, 0}}, {"b", {0, 1, 0}}, {"c", {0, 0, 1}}}},
                  {"detection", 1.5},
                  {"trials_per_pair", 0}};
  try {
    (void)spec_from_config(j);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "detection"));
    CHECK(mentions(e, "trials_per_pair"));
  }
}

TEST_CASE("model paths resolve against the config directory") {
  const auto dir = std::filesystem::temp_directory_path() / "obell_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "m.json") << R"({"weights":[1.0],"strategy_at":[{"a_out":{"a":1,"b":1,"c":-1},
                                        "b_out":{"a":-1,"b":-1,"c":1}}]})";
    std::ofstream(dir / "run.cfg") << "source = lhv\nmodel_path = m.json\ntrials_per_pair = 10\n";
    std::ofstream(dir / "bad.cfg") << "source = lhv\nmodel_path = missing.json\n";
  }
  const auto spec = load_experiment_spec((dir / "run.cfg").string());
  REQUIRE(spec.model);
  CHECK(spec.model->atoms() == 1);
  try {
    (void)load_experiment_spec((dir / "bad.cfg").string());
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "/model_path"));
  }
  CHECK_THROWS_AS((void)load_experiment_spec((dir / "absent.cfg").string()), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("invalid inline models are reported") {
  const Json j = {{"source", "lhv"},
                  {"model", {{"weights", {0.5}}, {"strategy_at", {{{"a_out", {{"a", 1}, {"b", 1}, {"c", 1}}},
                                                                   {"b_out", {{"a", -1}, {"b", -1}, {"c", -1}}}}}}}}};
  try {
    (void)spec_from_config(j);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e, "weights"));
  }
}

TEST_CASE("shipped sample configs load") {
  const std::filesystem::path configs = OBELL_SOURCE_DIR "/configs";
  for (const char* name : {"worked_example.cfg", "white_noise.json", "chsh.json", "lhv_detection.json"}) {
    CAPTURE(name);
    CHECK_NOTHROW((void)load_experiment_spec((configs / name).string()));
  }
}
