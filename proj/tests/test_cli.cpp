#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "obell/cli.hpp"
#include "obell/serialize.hpp"

using obell::Json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run obell_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "obell");
  std::ostringstream out, err;
  const int code = obell::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const std::string kConfigs = OBELL_SOURCE_DIR "/configs/";

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(obell_cli({}).code == 2);
  CHECK(obell_cli({"frobnicate"}).code == 2);
  CHECK(obell_cli({"optimize", "qubit"}).code == 2);
  CHECK(obell_cli({"bounds", "--gamma", "abc"}).code == 2);
  CHECK(obell_cli({"--help"}).code == 0);
}

TEST_CASE("bounds") {
  const auto r = obell_cli({"bounds"});
  CHECK(r.code == 0);
  for (const char* s : {"1.5", "2.828427125", "1.414213562", "0.75", "0.8888888889", "4 gamma + 9 eta > 12"})
    CHECK(r.out.find(s) != std::string::npos);

  const auto q = obell_cli({"bounds", "--gamma", "0.98", "--eta", "0.9"});
  CHECK(q.out.find("1.488888889") != std::string::npos);
  CHECK(q.out.find("feasible = true") != std::string::npos);

  const auto j = Json::parse(obell_cli({"--json", "bounds", "--gamma", "0.98", "--eta", "0.9"}).out);
  CHECK(j["ob"]["quantum_bound"] == 1.5);
  CHECK(j["chsh"]["fraction"].get<double>() == doctest::Approx(1.4142135623730951));
  CHECK(j["query"]["feasible"] == true);
  CHECK(j["query"]["bound"].get<double>() == doctest::Approx(1.34 / 0.9).epsilon(1e-14));

  CHECK(obell_cli({"bounds", "--gamma", "0.75"}).out.find("feasible = false") != std::string::npos);
  CHECK(obell_cli({"bounds", "--gamma", "0.9", "--epsilon", "0.1"}).code == 2);
}

TEST_CASE("optimize") {
  const auto ob = obell_cli({"optimize", "ob", "--json"});
  REQUIRE(ob.code == 0);
  const auto j = Json::parse(ob.out);
  CHECK(std::abs(j["value"].get<double>() - 1.5) <= 1e-6);
  CHECK(j["within_tolerance"] == true);

  const auto chsh = Json::parse(obell_cli({"--json", "optimize", "chsh"}).out);
  CHECK(std::abs(chsh["value"].get<double>() - 2.8284271247461903) <= 1e-6);

  const auto zero = obell_cli({"optimize", "ob", "--tolerance", "0"});
  CHECK(zero.code == 2);
  CHECK(zero.err.find("tolerance must be positive") != std::string::npos);

  CHECK(obell_cli({"optimize", "ob", "--grid", "3", "--no-refine"}).code == 1);
}

TEST_CASE("verify") {
  const auto perfect = obell_cli({"verify", "--perfect"});
  CHECK(perfect.code == 0);
  CHECK(perfect.out.find("8 strategies") != std::string::npos);

  const auto free = Json::parse(obell_cli({"verify", "--unconstrained", "--json"}).out);
  CHECK(free["cases"][0]["achieved"] == "3");
  CHECK(free["cases"][0]["status"] == "control");

  const auto eta = Json::parse(obell_cli({"verify", "--eta", "0.888888", "--json"}).out);
  CHECK(eta["cases"][0]["bound"] == "3/2");
  CHECK(eta["cases"][0]["status"] == "pass");
  CHECK(eta["passed"] == true);

  const auto battery = obell_cli({"verify"});
  CHECK(battery.code == 0);
  CHECK(battery.out.find("FAIL") == std::string::npos);

  const auto eps = Json::parse(obell_cli({"verify", "--epsilon", "0.25,0.5", "--json"}).out);
  CHECK(eps["cases"].size() == 2);

  // beyond the exact limits the search is randomized
  const auto big = Json::parse(
      obell_cli({"--json", "--seed", "3", "verify", "--eta", "0.9", "--atoms", "20", "--samples", "500"}).out);
  CHECK(big["cases"][0]["configurations"] == 500);
  CHECK(big["passed"] == true);

  CHECK(obell_cli({"verify", "--epsilon", "0.123456"}).code == 2);
  CHECK(obell_cli({"verify", "--eta", "0"}).code == 2);
}

TEST_CASE("verify --model") {
  TempDir tmp("obell_cli_model");
  CHECK(obell_cli({"verify", "--model", kConfigs + "lhv_model_eta09.json"}).code == 0);

  // Deliberately violating "model": weights do not sum to one.
  std::ofstream(tmp.path / "bad.json") << R"({"weights":[0.7],"strategy_at":[{"a_out":{"a":1,"b":1,"c":1},
      "b_out":{"a":-1,"b":-1,"c":-1}}]})";
  const auto bad = obell_cli({"verify", "--model", (tmp.path / "bad.json").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("weights") != std::string::npos);

  // A model with unequal detection masses across pairs is rejected.
  std::ofstream(tmp.path / "uneven.json") << R"({"weights":[0.5,0.5],"strategy_at":[
      {"a_out":{"a":1,"b":1,"c":1},"b_out":{"a":-1,"b":-1,"c":-1}},
      {"a_out":{"a":1,"b":1,"c":1},"b_out":{"a":-1,"b":-1,"c":-1}}],
      "detect_flag":[{"aa":true,"ab":true,"ac":true,"ba":true,"bb":true,"bc":true,"ca":true,"cb":true,"cc":true},
                     {"aa":true,"ab":false,"ac":true,"ba":true,"bb":true,"bc":true,"ca":true,"cb":true,"cc":true}]})";
  const auto uneven = obell_cli({"verify", "--model", (tmp.path / "uneven.json").string()});
  CHECK(uneven.code == 2);
  CHECK(uneven.err.find("ab") != std::string::npos);
}

TEST_CASE("simulate writes identical files for identical seeds") {
  TempDir tmp("obell_cli_sim");
  const auto a = tmp.path / "a", b = tmp.path / "b";
  const auto r1 = obell_cli({"--out", a.string(), "simulate", kConfigs + "worked_example.cfg"});
  REQUIRE(r1.code == 0);
  CHECK(r1.out.find("violation_sigma") != std::string::npos);
  CHECK(obell_cli({"--out", b.string(), "--threads", "3", "simulate", kConfigs + "worked_example.cfg"}).code == 0);
  CHECK(slurp(a / "result.csv") == slurp(b / "result.csv"));
  CHECK(slurp(a / "result.json") == slurp(b / "result.json"));

  const auto j = Json::parse(slurp(a / "result.json"));
  CHECK(std::abs(j["result"]["statistic"].get<double>() - 1.5) < 3 * j["result"]["statistic_se"].get<double>());
  CHECK(j["result"]["violation_sigma"].get<double>() > 5);

  // only the two result files are written, nothing temporary is left behind
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) files += e.is_regular_file();
  CHECK(files == 2);

  const auto c = tmp.path / "c";
  CHECK(obell_cli({"--out", c.string(), "--seed", "9", "simulate", kConfigs + "worked_example.cfg"}).code == 0);
  CHECK(slurp(a / "result.csv") != slurp(c / "result.csv"));
}

TEST_CASE("simulate lhv model under its detection bound") {
  TempDir tmp("obell_cli_lhv");
  const auto r = obell_cli({"--json", "--out", tmp.path.string(), "simulate", kConfigs + "lhv_detection.json"});
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out)["result"];
  CHECK(j["bound_used"].get<double>() == doctest::Approx(1.3 / 0.9));
  CHECK(j["statistic"].get<double>() <= j["bound_used"].get<double>() + 3 * j["statistic_se"].get<double>());
}

TEST_CASE("simulate config errors") {
  TempDir tmp("obell_cli_cfg");
  std::ofstream(tmp.path / "bad.cfg") << "source = quantum\ntrials_per_pair = 0\ncolour = blue\n";
  const auto r = obell_cli({"--out", tmp.path.string(), "simulate", (tmp.path / "bad.cfg").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("/colour") != std::string::npos);
  CHECK(r.err.find("/settings") != std::string::npos);
  CHECK_FALSE(fs::exists(tmp.path / "result.json"));
  CHECK(obell_cli({"simulate"}).code == 2);
}

TEST_CASE("sweep") {
  const auto row = obell_cli({"sweep", "--gamma-range", "0.98:0.98", "--eta-range", "0.85:0.95"});
  REQUIRE(row.code == 0);
  CHECK(row.out.find("0.980000,0.890000,1.539326,false") != std::string::npos);
  CHECK(row.out.find("0.980000,0.900000,1.488889,true") != std::string::npos);

  const auto j = Json::parse(obell_cli({"--json", "sweep", "--gamma-range", "1:1", "--eta-range", "1:1"}).out);
  REQUIRE(j.size() == 1);
  CHECK(j[0]["feasible"] == true);

  CHECK(obell_cli({"sweep", "--gamma-range", "1:0.5"}).code == 2);
  CHECK(obell_cli({"sweep", "--eta-range", "x"}).code == 2);
  CHECK(obell_cli({"sweep", "--step", "0"}).code == 2);

  TempDir tmp("obell_cli_sweep");
  const auto sim = obell_cli({"--out", tmp.path.string(), "--seed", "4", "sweep", "--simulate", "--trials", "20000",
                              "--gamma-range", "0.9:1", "--eta-range", "0.9:1", "--step", "0.05"});
  REQUIRE(sim.code == 0);
  const auto csv = slurp(tmp.path / "sweep.csv");
  CHECK(csv.rfind("gamma,eta,bound,feasible,statistic,se,violation_sigma,status\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
  CHECK(csv.find(",ok\n") != std::string::npos);

  const auto again = tmp.path / "again";
  obell_cli({"--out", again.string(), "--seed", "4", "--threads", "1", "sweep", "--simulate", "--trials", "20000",
             "--gamma-range", "0.9:1", "--eta-range", "0.9:1", "--step", "0.05"});
  CHECK(slurp(again / "sweep.csv") == csv);
}
