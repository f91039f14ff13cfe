#include "obell/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "obell/bounds.hpp"
#include "obell/experiment.hpp"
#include "obell/lhv.hpp"
#include "obell/quantum.hpp"
#include "obell/serialize.hpp"

namespace obell::cli {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  bool json = false;
  std::string out_dir;
  std::size_t threads = 0;
};

/// Ten significant digits for human-readable output.
std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

/// Writes `content` to dir/name through a temporary file and a rename, so a
/// reader never sees a partial file.
fs::path write_atomically(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  const fs::path target = dir / name;
  const fs::path tmp = dir / (name + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
  return target;
}

Range parse_range(const std::string& text, const char* what) {
  Range r;
  const auto colon = text.find(':');
  try {
    std::size_t used = 0;
    if (colon == std::string::npos) {
      r.lo = r.hi = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
    } else {
      const std::string lo = text.substr(0, colon), hi = text.substr(colon + 1);
      r.lo = std::stod(lo, &used);
      if (used != lo.size()) throw std::invalid_argument("trailing characters");
      r.hi = std::stod(hi, &used);
      if (used != hi.size()) throw std::invalid_argument("trailing characters");
    }
  } catch (const std::exception&) {
    throw InvalidArgument(std::string(what) + " must look like lo:hi, got '" + text + "'");
  }
  if (r.lo > r.hi) throw InvalidArgument(std::string(what) + " '" + text + "' is empty (lo > hi)");
  return r;
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsOptions {
  std::optional<double> gamma;
  std::optional<double> epsilon;
  std::optional<double> eta;
};

Json bound_report_json(const BoundReport& r) {
  return {{"classical_bound", r.classical_bound},
          {"quantum_bound", r.quantum_bound},
          {"fraction", r.fraction}};
}

int cmd_bounds(const BoundsOptions& o, const GlobalOptions& g, std::ostream& out) {
  if (o.gamma && o.epsilon) throw InvalidArgument("give --gamma or --epsilon, not both");
  const BoundReport ob = ob_bounds();
  const BoundReport chsh = chsh_bounds();
  const double eta_threshold = 8.0 / 9.0;

  std::optional<NoiseParameters> query;
  if (o.gamma || o.epsilon || o.eta) {
    const double eps = o.epsilon ? *o.epsilon : (o.gamma ? 1.0 - *o.gamma : 0.0);
    query = NoiseParameters(eps, o.eta.value_or(1.0));
  }

  if (g.json) {
    Json j = {{"ob", bound_report_json(ob)},
              {"chsh", bound_report_json(chsh)},
              {"thresholds",
               {{"gamma", 0.75},
                {"eta", eta_threshold},
                {"feasibility_law", "4*gamma + 9*eta > 12"}}}};
    if (query) {
      j["query"] = {{"gamma", query->gamma()},
                    {"epsilon", query->epsilon()},
                    {"eta", query->eta()},
                    {"bound", theorem4_bound(*query)},
                    {"quantum_bound", ob.quantum_bound},
                    {"feasible", violation_feasible(*query)}};
    }
    out << j.dump(2) << '\n';
    return kSuccess;
  }

  out << pad("expression", 12) << pad("classical", 14) << pad("quantum", 14) << "fraction\n";
  for (const auto& [name, r] : {std::pair{"OB", ob}, std::pair{"CHSH", chsh}}) {
    out << pad(name, 12) << pad(num(r.classical_bound), 14) << pad(num(r.quantum_bound), 14)
        << num(r.fraction) << '\n';
  }
  out << "\nOB violation thresholds\n"
      << "  anti-correlation  gamma > " << num(0.75) << "  (eta = 1)\n"
      << "  detection         eta > " << num(eta_threshold) << "  (gamma = 1)\n"
      << "  combined          4 gamma + 9 eta > 12\n";
  if (query) {
    out << "\ngamma = " << num(query->gamma()) << ", eta = " << num(query->eta())
        << "\n  bound (6 - 2 gamma - 3 eta) / eta = " << num(theorem4_bound(*query))
        << "\n  feasible = " << (violation_feasible(*query) ? "true" : "false") << '\n';
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// optimize

struct OptimizeOptions {
  std::string target = "ob";
  double tolerance = 1e-6;
  std::size_t grid = 64;
  bool no_refine = false;
};

int cmd_optimize(const OptimizeOptions& o, const GlobalOptions& g, std::ostream& out,
                 std::ostream& err) {
  if (!(o.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  OptimizerOptions opts;
  opts.grid_points = o.grid;
  opts.refine = !o.no_refine;
  Json j;
  double value = 0.0;
  double target = 0.0;
  try {
    if (o.target == "ob") {
      const auto r = maximize_delta_q(o.tolerance, opts);
      value = r.value;
      target = kObQuantumMax;
      j = {{"settings", to_json(r.settings)},
           {"angles", {{"phi1", r.angles.phi1}, {"phi2", r.angles.phi2}, {"theta", r.angles.theta}}},
           {"correlations",
            {{"p_ab", singlet_correlation(r.settings.a, r.settings.b)},
             {"p_ac", singlet_correlation(r.settings.a, r.settings.c)},
             {"p_bc", singlet_correlation(r.settings.b, r.settings.c)}}}};
    } else {
      const auto r = maximize_chsh(o.tolerance, opts);
      value = r.value;
      target = kTsirelson;
      j = {{"settings", to_json(r.settings)}, {"angles", r.angles}};
    }
  } catch (const OptimizerShortfall& e) {
    err << "optimize: " << e.what() << '\n';
    if (g.json) {
      out << Json{{"target", o.target}, {"value", e.achieved()}, {"target_value", e.target()},
                  {"tolerance", o.tolerance}, {"within_tolerance", false}}
                 .dump(2)
          << '\n';
    }
    return kAssertionFailure;
  }
  j["target"] = o.target;
  j["value"] = value;
  j["target_value"] = target;
  j["tolerance"] = o.tolerance;
  j["within_tolerance"] = std::abs(value - target) <= o.tolerance;

  if (g.json) {
    out << j.dump(2) << '\n';
  } else {
    out << "target   " << o.target << " (analytic maximum " << num(target) << ")\n";
    for (const auto& [name, v] : j["settings"].items()) {
      out << "  " << pad(name, 8) << "(" << num(v[0].get<double>()) << ", "
          << num(v[1].get<double>()) << ", " << num(v[2].get<double>()) << ")\n";
    }
    out << "value    " << num(value) << "\n";
    out << "|value - target| = " << num(std::abs(value - target)) << " (tolerance "
        << num(o.tolerance) << ")\n";
  }
  return j["within_tolerance"].get<bool>() ? kSuccess : kAssertionFailure;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions {
  bool perfect = false;
  bool unconstrained = false;
  std::vector<double> epsilons;
  std::vector<double> etas;
  std::optional<std::size_t> atoms;
  std::string model_path;
  std::optional<std::string> pattern;
  std::size_t samples = 10000;
};

struct VerifyCase {
  std::string name;
  std::string atoms = "-";
  std::size_t configurations = 0;
  std::string achieved;
  double achieved_value = 0.0;
  std::string bound = "-";
  std::optional<double> bound_value;
  std::string status;
  std::optional<Json> witness;
};

// Largest atom count <= limit on whose 1/n grid `x` lies within 1e-5.
std::optional<std::pair<std::size_t, Rational>> fit_grid(double x, std::size_t limit) {
  for (std::size_t n = limit; n >= 1; --n) {
    try {
      return std::pair{n, grid_fraction(x, n, 1e-5)};
    } catch (const InvalidArgument&) {
    }
  }
  return std::nullopt;
}

VerifyCase classical_case(bool perfect, ObPattern pattern) {
  const auto r = classical_ob_maximum(perfect, pattern);
  VerifyCase c;
  c.name = std::string(perfect ? "perfect anti-correlation" : "unconstrained control") + " (" +
           std::to_string(r.strategies) + " strategies)";
  c.configurations = r.strategies;
  c.achieved = r.maximum.str();
  c.achieved_value = r.maximum.to_double();
  if (perfect) {
    c.bound = "1";
    c.bound_value = 1.0;
    c.status = r.maximum <= Rational(1) ? "pass" : "FAIL";
  } else {
    c.status = "control";
  }
  c.witness = Json{{"strategy", to_json(r.witness)}};
  return c;
}

VerifyCase oracle_case(const std::string& name, const OracleMaximum& r) {
  VerifyCase c;
  c.name = name;
  c.atoms = std::to_string(r.atoms);
  c.configurations = r.configurations;
  c.achieved = r.maximum.str();
  c.achieved_value = r.maximum.to_double();
  c.bound = r.bound.str();
  c.bound_value = r.bound.to_double();
  c.status = r.maximum <= r.bound ? "pass" : "FAIL";
  c.witness = to_json(r.witness);
  return c;
}

// Randomized non-violation search for atom counts beyond the exact oracles.
VerifyCase random_case(const std::string& name, std::size_t atoms, std::size_t samples,
                       std::uint64_t seed, double epsilon, std::optional<double> eta,
                       ObPattern pattern) {
  RandomStream rng(seed);
  const double bound = eta ? theorem4_bound(NoiseParameters(epsilon, *eta)) : theorem2_bound(epsilon);
  double best = -std::numeric_limits<double>::infinity();
  std::optional<HiddenVariableModel> witness;
  for (std::size_t i = 0; i < samples; ++i) {
    std::optional<HiddenVariableModel> m;
    double value = 0.0;
    if (eta) {
      const auto k = static_cast<std::size_t>(std::llround(*eta * static_cast<double>(atoms)));
      const auto flips = static_cast<std::size_t>(std::floor(epsilon * static_cast<double>(atoms) + 1e-9));
      const auto placement = i % 2 ? DetectionPlacement::adversarial : DetectionPlacement::uniform;
      m = random_detection_model(rng, atoms, flips, std::max<std::size_t>(k, 1), placement, pattern);
      value = ob_statistic(lhv_conditional_correlations(*m), pattern);
    } else {
      m = random_epsilon_model(rng, atoms, epsilon, i % 2 == 0);
      value = ob_statistic(lhv_correlations(*m), pattern);
    }
    if (value > best) {
      best = value;
      witness = std::move(m);
    }
  }
  VerifyCase c;
  c.name = name + " (random search)";
  c.atoms = std::to_string(atoms);
  c.configurations = samples;
  c.achieved = num(best);
  c.achieved_value = best;
  c.bound = num(bound);
  c.bound_value = bound;
  c.status = best <= bound + kDefaultTolerance ? "pass" : "FAIL";
  if (witness) c.witness = to_json(*witness);
  return c;
}

VerifyCase model_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"/: cannot read model file " + path});
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError({"/: " + path + " is not valid JSON"});
  HiddenVariableModel m = [&] {
    try {
      return model_from_json(j);
    } catch (const InvalidArgument& e) {
      throw ConfigError({e.what()});
    }
  }();
  if (auto v = validate_model(m); !v.empty()) {
    std::vector<std::string> errors;
    for (const auto& x : v)
      errors.push_back("/" + x.field + (x.atom ? " (atom " + std::to_string(*x.atom) + ")" : "") +
                       ": " + x.message);
    throw ConfigError(std::move(errors));
  }
  const double eta = m.detection_mass(SettingPair::from_index(0));
  for (std::size_t q = 1; q < kPairCount; ++q) {
    const auto st = SettingPair::from_index(q);
    if (std::abs(m.detection_mass(st) - eta) > 1e-12)
      throw ConfigError({"/detect_flag: pair " + st.name() +
                         " has a different detection mass; setting-dependent detection is not supported"});
  }
  if (!(eta > 0.0)) throw ConfigError({"/detect_flag: no atom is detected"});
  const double epsilon = std::min(1.0, m.max_defect_mass());
  const auto corr = m.fully_detected() ? lhv_correlations(m) : lhv_conditional_correlations(m);
  const double value = std::max(ob_statistic(corr, ObPattern::standard),
                                ob_statistic(corr, ObPattern::detection));
  const double bound = theorem4_bound(NoiseParameters(epsilon, std::min(1.0, eta)));
  VerifyCase c;
  c.name = "model " + fs::path(path).filename().string() + " (epsilon " + num(epsilon) +
           ", eta " + num(eta) + ")";
  c.atoms = std::to_string(m.atoms());
  c.configurations = 1;
  c.achieved = num(value);
  c.achieved_value = value;
  c.bound = num(bound);
  c.bound_value = bound;
  c.status = value <= bound + kDefaultTolerance ? "pass" : "FAIL";
  c.witness = to_json(m);
  return c;
}

int cmd_verify(const VerifyOptions& o, const GlobalOptions& g, std::ostream& out) {
  std::vector<VerifyCase> cases;
  const bool any = o.perfect || o.unconstrained || !o.epsilons.empty() || !o.etas.empty() ||
                   !o.model_path.empty();
  const bool perfect = o.perfect || !any;
  const bool unconstrained = o.unconstrained || !any;
  std::vector<double> epsilons = o.epsilons;
  std::vector<double> etas = o.etas;
  if (!any) {
    epsilons = {0.0, 0.25, 0.5};
    etas = {1.0, 8.0 / 9.0, 0.8};
  }
  const std::uint64_t seed = g.seed.value_or(1);

  if (perfect) cases.push_back(classical_case(true, o.pattern ? parse_pattern(*o.pattern) : ObPattern::standard));
  if (unconstrained)
    cases.push_back(classical_case(false, o.pattern ? parse_pattern(*o.pattern) : ObPattern::standard));

  for (double eps : epsilons) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("--epsilon values must lie in [0, 1]");
    const ObPattern pattern = o.pattern ? parse_pattern(*o.pattern) : ObPattern::standard;
    if (o.atoms && *o.atoms > kMaxEpsilonAtoms) {
      cases.push_back(random_case("epsilon = " + num(eps), *o.atoms, o.samples, seed, eps,
                                  std::nullopt, pattern));
      continue;
    }
    std::size_t n = 0;
    Rational e;
    if (o.atoms) {
      n = *o.atoms;
      e = grid_fraction(eps, n, 1e-5);
    } else if (auto fit = fit_grid(eps, kMaxEpsilonAtoms)) {
      std::tie(n, e) = *fit;
    } else {
      throw InvalidArgument("epsilon " + num(eps) + " is not a multiple of 1/n for any n <= " +
                            std::to_string(kMaxEpsilonAtoms) + "; pass --atoms");
    }
    cases.push_back(oracle_case("epsilon = " + e.str(), epsilon_ob_maximum(e, n, pattern)));
  }

  for (double eta : etas) {
    if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("--eta values must lie in (0, 1]");
    const ObPattern pattern = o.pattern ? parse_pattern(*o.pattern) : ObPattern::detection;
    if (o.atoms && *o.atoms > kMaxDetectionAtoms) {
      cases.push_back(random_case("eta = " + num(eta), *o.atoms, o.samples, seed, 0.0, eta, pattern));
      continue;
    }
    std::size_t n = 0;
    Rational e;
    if (o.atoms) {
      n = *o.atoms;
      e = grid_fraction(eta, n, 1e-5);
    } else if (auto fit = fit_grid(eta, kMaxDetectionAtoms)) {
      std::tie(n, e) = *fit;
    } else {
      throw InvalidArgument("eta " + num(eta) + " is not a multiple of 1/n for any n <= " +
                            std::to_string(kMaxDetectionAtoms) + "; pass --atoms");
    }
    cases.push_back(oracle_case("eta = " + e.str(), detection_ob_maximum(e, n, pattern)));
  }

  if (!o.model_path.empty()) cases.push_back(model_case(o.model_path));

  bool failed = false;
  for (const auto& c : cases) failed |= c.status == "FAIL";

  if (g.json) {
    Json arr = Json::array();
    for (const auto& c : cases) {
      Json j = {{"case", c.name},
                {"atoms", c.atoms},
                {"configurations", c.configurations},
                {"achieved", c.achieved},
                {"achieved_value", c.achieved_value},
                {"bound", c.bound},
                {"status", c.status}};
      j["bound_value"] = c.bound_value ? Json(*c.bound_value) : Json(nullptr);
      if (c.status == "FAIL" && c.witness) j["witness"] = *c.witness;
      arr.push_back(std::move(j));
    }
    out << Json{{"cases", arr}, {"passed", !failed}}.dump(2) << '\n';
  } else {
    out << pad("case", 46) << pad("atoms", 7) << pad("configs", 10) << pad("achieved", 14)
        << pad("bound", 14) << "status\n";
    for (const auto& c : cases) {
      out << pad(c.name, 46) << pad(c.atoms, 7) << pad(std::to_string(c.configurations), 10)
          << pad(c.achieved, 14) << pad(c.bound, 14) << c.status << '\n';
    }
    for (const auto& c : cases) {
      if (c.status == "FAIL" && c.witness)
        out << "\nwitness for " << c.name << ":\n" << c.witness->dump(2) << '\n';
    }
  }
  if (failed && !g.out_dir.empty()) {
    Json witnesses = Json::array();
    for (const auto& c : cases)
      if (c.status == "FAIL" && c.witness) witnesses.push_back({{"case", c.name}, {"witness", *c.witness}});
    write_atomically(g.out_dir, "verify_witness.json", witnesses.dump(2) + "\n");
  }
  return failed ? kAssertionFailure : kSuccess;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& config_path, const GlobalOptions& g, std::ostream& out) {
  ExperimentSpec spec = load_experiment_spec(config_path);
  if (g.seed) spec.seed = *g.seed;
  const ExperimentResult r = run_experiment(spec, g.threads);

  Json j = {{"spec", to_json(spec)}, {"result", to_json(r)}};
  std::ostringstream csv;
  write_experiment_csv(csv, {r});
  const fs::path dir = g.out_dir.empty() ? fs::path(".") : fs::path(g.out_dir);
  const auto json_path = write_atomically(dir, "result.json", j.dump(2) + "\n");
  const auto csv_path = write_atomically(dir, "result.csv", csv.str());

  if (g.json) {
    out << j.dump(2) << '\n';
  } else {
    out << r.statistic_kind << " statistic = " << num(r.statistic) << " +- " << num(r.statistic_se)
        << " (se), bound " << num(r.bound_used) << ", violation_sigma = " << num(r.violation_sigma)
        << "; wrote " << json_path.string() << ", " << csv_path.string() << '\n';
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  std::string config_path;
  std::string gamma_range = "0.7:1";
  std::string eta_range = "0.8:1";
  double step = 0.01;
  bool simulate = false;
  std::uint64_t trials = 100000;
};

ExperimentSpec default_sweep_template(std::uint64_t trials) {
  ExperimentSpec spec;
  spec.source = SourceKind::quantum_white_noise;
  spec.settings = SettingTriple{make_setting({1.0, 0.0, 0.0}),
                                make_setting({0.5, -std::sqrt(3.0) / 2.0, 0.0}),
                                make_setting({-0.5, -std::sqrt(3.0) / 2.0, 0.0})};
  spec.trials_per_pair = trials;
  return spec;
}

int cmd_sweep(const SweepOptions& o, const GlobalOptions& g, std::ostream& out) {
  const Range gr = parse_range(o.gamma_range, "--gamma-range");
  const Range er = parse_range(o.eta_range, "--eta-range");
  const auto rows = feasibility_grid(gr, er, o.step);

  std::ostringstream csv;
  Json arr = Json::array();
  if (!o.simulate) {
    write_feasibility_csv(csv, rows);
    for (const auto& r : rows)
      arr.push_back({{"gamma", r.gamma}, {"eta", r.eta}, {"bound", r.bound}, {"feasible", r.feasible}});
  } else {
    ExperimentSpec tmpl =
        o.config_path.empty() ? default_sweep_template(o.trials) : load_experiment_spec(o.config_path);
    if (g.seed) tmpl.seed = *g.seed;
    if (tmpl.is_chsh()) throw InvalidArgument("sweep compares against OB bounds; use OB settings");
    const auto cells = sweep(tmpl, grid_values(gr, o.step), grid_values(er, o.step), g.threads);
    csv << "gamma,eta,bound,feasible,statistic,se,violation_sigma,status\n";
    char line[256];
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& row = rows[i];
      const auto& cell = cells[i];
      Json j = {{"gamma", row.gamma}, {"eta", row.eta}, {"bound", row.bound}, {"feasible", row.feasible}};
      if (cell.result) {
        std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%s,%.6f,%.6f,%.6f,ok\n", row.gamma, row.eta,
                      row.bound, row.feasible ? "true" : "false", cell.result->statistic,
                      cell.result->statistic_se, cell.result->violation_sigma);
        j["result"] = to_json(*cell.result);
      } else {
        std::string status = cell.error;
        for (char& ch : status)
          if (ch == ',' || ch == '\n') ch = ';';
        std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%s,,,,error: ", row.gamma, row.eta, row.bound,
                      row.feasible ? "true" : "false");
        csv << line << status << '\n';
        j["error"] = cell.error;
        arr.push_back(std::move(j));
        continue;
      }
      csv << line;
      arr.push_back(std::move(j));
    }
  }

  if (!g.out_dir.empty()) write_atomically(g.out_dir, "sweep.csv", csv.str());
  if (g.json) {
    out << arr.dump(2) << '\n';
  } else if (g.out_dir.empty()) {
    out << csv.str();
  } else {
    out << "wrote " << (fs::path(g.out_dir) / "sweep.csv").string() << " (" << rows.size()
        << " rows)\n";
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Original Bell inequality: bounds, optimizers, LHV oracles and simulation", "obell"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Master seed (overrides config files)");
  app.add_flag("--json", global.json, "Emit machine-readable JSON");
  app.add_option("--out", global.out_dir, "Output directory for written files");
  app.add_option("--threads", global.threads, "Worker threads (0 = hardware concurrency)");

  BoundsOptions bounds_opts;
  auto* bounds = app.add_subcommand("bounds", "Classical and quantum bounds, violation thresholds");
  bounds->add_option("--gamma", bounds_opts.gamma, "Anti-correlation fraction gamma = 1 - epsilon")
      ->check(CLI::Range(0.0, 1.0));
  bounds->add_option("--epsilon", bounds_opts.epsilon, "Anti-correlation defect epsilon")
      ->check(CLI::Range(0.0, 1.0));
  bounds->add_option("--eta", bounds_opts.eta, "Joint detection efficiency")->check(CLI::Range(0.0, 1.0));

  OptimizeOptions optimize_opts;
  auto* optimize = app.add_subcommand("optimize", "Numerically maximize the OB or CHSH statistic");
  optimize->add_option("target", optimize_opts.target, "ob or chsh")
      ->check(CLI::IsMember({"ob", "chsh"}));
  optimize->add_option("--tolerance", optimize_opts.tolerance, "Allowed distance from the analytic optimum");
  optimize->add_option("--grid", optimize_opts.grid, "Grid points per angle")->check(CLI::Range(2, 512));
  optimize->add_flag("--no-refine", optimize_opts.no_refine, "Skip the local refinement after the grid");

  VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Run the exhaustive LHV oracles against the classical bounds");
  verify->add_flag("--perfect", verify_opts.perfect, "Enumerate perfectly anti-correlated strategies");
  verify->add_flag("--unconstrained", verify_opts.unconstrained, "Enumerate all 64 strategies (control)");
  verify->add_option("--epsilon", verify_opts.epsilons, "Anti-correlation defects to probe")->delimiter(',');
  verify->add_option("--eta", verify_opts.etas, "Detection efficiencies to probe")->delimiter(',');
  verify->add_option("--atoms", verify_opts.atoms, "Atom count (random search beyond the exact limits)");
  verify->add_option("--model", verify_opts.model_path, "Hidden-variable model JSON to check");
  verify->add_option("--pattern", verify_opts.pattern, "Statistic pattern: standard or detection")
      ->check(CLI::IsMember({"standard", "detection"}));
  verify->add_option("--samples", verify_opts.samples, "Random models per case beyond the exact limits");

  std::string simulate_config;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo simulation of an OB or CHSH test");
  simulate->add_option("config", simulate_config, "Experiment config (JSON or key = value)")->required();

  SweepOptions sweep_opts;
  auto* sweep_cmd = app.add_subcommand("sweep", "Feasibility grid over (gamma, eta), optionally simulated");
  sweep_cmd->add_option("config", sweep_opts.config_path, "Experiment config template (with --simulate)");
  sweep_cmd->add_option("--gamma-range", sweep_opts.gamma_range, "gamma range lo:hi");
  sweep_cmd->add_option("--eta-range", sweep_opts.eta_range, "eta range lo:hi");
  sweep_cmd->add_option("--step", sweep_opts.step, "Grid step");
  sweep_cmd->add_flag("--simulate", sweep_opts.simulate, "Run a simulation in every cell");
  sweep_cmd->add_option("--trials", sweep_opts.trials, "Trials per pair for the default template");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsageError;
  }

  try {
    if (bounds->parsed()) return cmd_bounds(bounds_opts, global, out);
    if (optimize->parsed()) return cmd_optimize(optimize_opts, global, out, err);
    if (verify->parsed()) return cmd_verify(verify_opts, global, out);
    if (simulate->parsed()) return cmd_simulate(simulate_config, global, out);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts, global, out);
  } catch (const ConfigError& e) {
    err << "configuration error:\n";
    for (const auto& msg : e.errors()) err << "  " << msg << '\n';
    return kUsageError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kAssertionFailure;
  }
  return kUsageError;
}

}  // namespace obell::cli
