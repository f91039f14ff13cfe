#include "obell/experiment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "obell/bounds.hpp"
#include "obell/lhv.hpp"
#include "obell/parallel.hpp"
#include "obell/quantum.hpp"

namespace obell {

std::string_view source_name(SourceKind k) {
  switch (k) {
    case SourceKind::quantum: return "quantum";
    case SourceKind::quantum_white_noise: return "quantum_white_noise";
    case SourceKind::lhv: return "lhv";
  }
  return "unknown";
}

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string out = "invalid experiment configuration:";
  for (const auto& e : errors) out += "\n  " + e;
  return out;
}

// Common detection mass of a model across all nine pairs, or nullopt if the
// masses differ.
std::optional<double> common_detection_mass(const HiddenVariableModel& m) {
  const double first = m.detection_mass(SettingPair::from_index(0));
  for (std::size_t q = 1; q < kPairCount; ++q)
    if (std::abs(m.detection_mass(SettingPair::from_index(q)) - first) > 1e-12) return std::nullopt;
  return first;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : InvalidArgument(join_errors(errors)), errors_(std::move(errors)) {}

std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> errors;
  if (spec.trials_per_pair < 1) errors.emplace_back("/trials_per_pair: must be at least 1");
  if (!(spec.detection > 0.0 && spec.detection <= 1.0))
    errors.emplace_back("/detection: eta must lie in (0, 1]");
  if (spec.source == SourceKind::quantum_white_noise && !(spec.gamma >= 0.0 && spec.gamma <= 1.0))
    errors.emplace_back("/gamma: must lie in [0, 1]");
  if (spec.source == SourceKind::lhv) {
    if (!spec.model) {
      errors.emplace_back("/model: the lhv source needs a hidden-variable model");
    } else {
      for (const auto& v : validate_model(*spec.model)) {
        std::string where = "/model/" + v.field;
        if (v.atom) where += " (atom " + std::to_string(*v.atom) + ")";
        errors.push_back(where + ": " + v.message);
      }
      const auto mass = common_detection_mass(*spec.model);
      if (!spec.fair_sampling && mass && !(*mass > 0.0))
        errors.emplace_back("/model/detect_flag: no atom is detected");
      if (!spec.fair_sampling && !mass)
        errors.emplace_back(
            "/model/detect_flag: detection mass differs between setting pairs; "
            "setting-dependent detection is not supported");
    }
    if (spec.is_chsh())
      errors.emplace_back("/settings: CHSH runs need a quantum source (models carry labels a, b, c only)");
  } else if (!spec.fair_sampling) {
    errors.emplace_back(
        "/fair_sampling: a quantum source has no hidden variable to condition detection on; "
        "set fair_sampling = true");
  }
  return errors;
}

TrialRecord detection_censor(TrialRecord record, double eta, RandomStream& rng, bool fair_sampling,
                             std::optional<bool> model_flag) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in (0, 1]");
  if (fair_sampling) {
    record.detected = eta >= 1.0 || rng.bernoulli(eta);
    return record;
  }
  if (!model_flag)
    throw InvalidArgument(
        "detection without fair sampling needs a hidden-variable model; "
        "quantum sources support fair sampling only");
  record.detected = *model_flag;
  return record;
}

namespace {

struct PairJob {
  std::string name;
  std::uint64_t stream_key = 0;
  SettingPair labels;       // lhv source
  double correlation = 0.0; // quantum sources: target E for the pair
};

PairEstimate simulate_pair(const ExperimentSpec& spec, const PairJob& job,
                           const std::vector<double>& cumulative) {
  RandomStream rng(derive_seed(spec.seed, job.stream_key));
  PairEstimate est;
  est.pair = job.name;
  est.trials = spec.trials_per_pair;
  TrialRecord record;
  record.setting_pair = job.labels;
  const bool lhv = spec.source == SourceKind::lhv;
  for (std::uint64_t i = 0; i < spec.trials_per_pair; ++i) {
    std::optional<bool> model_flag;
    if (lhv) {
      const double u = rng.uniform();
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      auto atom = static_cast<std::size_t>(it - cumulative.begin());
      atom = std::min(atom, cumulative.size() - 1);
      const auto& st = spec.model->strategy_at(atom);
      record.outcome_alice = st.a_out(job.labels.first);
      record.outcome_bob = st.b_out(job.labels.second);
      if (!spec.fair_sampling) model_flag = spec.model->detect_flag(atom, job.labels);
    } else {
      const auto [alpha, beta] = sample_correlated_pair(job.correlation, rng);
      record.outcome_alice = alpha;
      record.outcome_bob = beta;
    }
    record = detection_censor(record, spec.detection, rng, spec.fair_sampling, model_flag);
    if (record.detected) {
      ++est.detected;
      est.product_sum += record.outcome_alice * record.outcome_bob;
    }
  }
  if (est.detected == 0)
    throw InvalidArgument("no detected trials for setting pair " + job.name +
                          "; correlation is undefined");
  est.correlation = static_cast<double>(est.product_sum) / static_cast<double>(est.detected);
  est.se = std::sqrt(std::max(0.0, 1.0 - est.correlation * est.correlation) /
                     static_cast<double>(est.detected));
  return est;
}

double visibility(const ExperimentSpec& spec) {
  return spec.source == SourceKind::quantum_white_noise ? spec.gamma : 1.0;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t threads) {
  if (auto errors = validate_spec(spec); !errors.empty()) throw ConfigError(std::move(errors));

  const double vis = visibility(spec);
  std::vector<PairJob> jobs;
  if (spec.is_chsh()) {
    const auto& s = std::get<ChshSettings>(spec.settings);
    const std::array<std::pair<const MeasurementSetting*, const MeasurementSetting*>, 4> axes{
        {{&s.a, &s.b}, {&s.a, &s.b_prime}, {&s.a_prime, &s.b}, {&s.a_prime, &s.b_prime}}};
    const std::array<const char*, 4> names{"ab", "ab'", "a'b", "a'b'"};
    for (std::size_t k = 0; k < 4; ++k)
      jobs.push_back({names[k], 100 + k, {}, vis * singlet_correlation(*axes[k].first, *axes[k].second)});
  } else {
    const auto& s = std::get<SettingTriple>(spec.settings);
    auto axis = [&](Label l) -> const MeasurementSetting& {
      return l == Label::a ? s.a : (l == Label::b ? s.b : s.c);
    };
    for (const SettingPair st : pattern_pairs(spec.pattern)) {
      const double e = spec.source == SourceKind::lhv
                           ? 0.0
                           : vis * singlet_correlation(axis(st.first), axis(st.second));
      jobs.push_back({st.name(), st.index(), st, e});
    }
  }

  std::vector<double> cumulative;
  if (spec.source == SourceKind::lhv) {
    double acc = 0.0;
    for (double w : spec.model->weights()) cumulative.push_back(acc += w);
  }

  std::vector<PairEstimate> estimates(jobs.size());
  parallel_for(jobs.size(), threads,
               [&](std::size_t k) { estimates[k] = simulate_pair(spec, jobs[k], cumulative); });

  ExperimentResult r;
  r.source = spec.source;
  r.pattern = spec.pattern;
  r.fair_sampling = spec.fair_sampling;
  r.seed = spec.seed;
  r.pairs = estimates;
  double var = 0.0;
  for (const auto& e : estimates) var += e.se * e.se;
  r.statistic_se = std::sqrt(var);

  if (spec.is_chsh()) {
    r.statistic_kind = "chsh";
    r.statistic = chsh_statistic(estimates[0].correlation, estimates[1].correlation,
                                 estimates[2].correlation, estimates[3].correlation);
    r.gamma = vis;
    r.epsilon = 0.0;
    r.eta = spec.detection;
    r.bound_used = chsh_bounds().classical_bound;
  } else {
    r.statistic_kind = "ob";
    // estimates follow pattern_pairs order (x, y, z): |P(x) - P(y)| - P(z).
    r.statistic = std::abs(estimates[0].correlation - estimates[1].correlation) -
                  estimates[2].correlation;
    if (spec.source == SourceKind::lhv) {
      r.epsilon = spec.model->max_defect_mass();
      r.gamma = 1.0 - r.epsilon;
      r.eta = spec.fair_sampling ? spec.detection : std::min(1.0, *common_detection_mass(*spec.model));
    } else {
      r.gamma = vis;
      r.epsilon = 1.0 - vis;
      r.eta = spec.detection;
    }
    r.bound_used = theorem4_bound(NoiseParameters(std::clamp(r.epsilon, 0.0, 1.0), r.eta));
  }

  const double excess = r.statistic - r.bound_used;
  if (r.statistic_se > 0.0) {
    r.violation_sigma = excess / r.statistic_se;
  } else {
    // Exact ratios against a closed-form bound: treat rounding-level gaps as equal.
    r.violation_sigma = std::abs(excess) <= 1e-12
                            ? 0.0
                            : std::copysign(std::numeric_limits<double>::infinity(), excess);
  }

  switch (spec.source) {
    case SourceKind::quantum: r.noise_model = "ideal singlet"; break;
    case SourceKind::quantum_white_noise:
      r.noise_model = "white-noise mixture: gamma taken as visibility (model-dependent)";
      break;
    case SourceKind::lhv: r.noise_model = "hidden-variable model: gamma = 1 - max defect mass"; break;
  }
  return r;
}

ExperimentSpec sweep_cell_spec(const ExperimentSpec& tmpl, double gamma, double eta) {
  ExperimentSpec cell = tmpl;
  cell.source = SourceKind::quantum_white_noise;
  cell.gamma = gamma;
  cell.detection = eta;
  cell.seed = derive_seed(derive_seed(tmpl.seed, coordinate_key(gamma)), coordinate_key(eta));
  return cell;
}

std::vector<SweepCell> sweep(const ExperimentSpec& tmpl, const std::vector<double>& gamma_values,
                             const std::vector<double>& eta_values, std::size_t threads) {
  if (gamma_values.empty() || eta_values.empty())
    throw InvalidArgument("sweep needs at least one gamma and one eta value");
  if (tmpl.source == SourceKind::lhv)
    throw InvalidArgument("sweep varies the white-noise visibility and needs a quantum source");
  std::vector<SweepCell> cells;
  cells.reserve(gamma_values.size() * eta_values.size());
  for (double g : gamma_values)
    for (double e : eta_values) cells.push_back({g, e, std::nullopt, {}});

  parallel_for(cells.size(), threads, [&](std::size_t i) {
    auto& cell = cells[i];
    try {
      cell.result = run_experiment(sweep_cell_spec(tmpl, cell.gamma, cell.eta), 1);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  return cells;
}

Json to_json(const ExperimentResult& r) {
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"pair", p.pair},
                     {"trials", p.trials},
                     {"detected", p.detected},
                     {"product_sum", p.product_sum},
                     {"correlation", p.correlation},
                     {"se", p.se}});
  }
  Json j = {{"statistic_kind", r.statistic_kind},
            {"source", std::string(source_name(r.source))},
            {"gamma", r.gamma},
            {"epsilon", r.epsilon},
            {"eta", r.eta},
            {"fair_sampling", r.fair_sampling},
            {"seed", r.seed},
            {"pairs", std::move(pairs)},
            {"statistic", r.statistic},
            {"statistic_se", r.statistic_se},
            {"bound_used", r.bound_used},
            {"noise_model", r.noise_model}};
  if (r.statistic_kind == "ob") j["pattern"] = std::string(pattern_name(r.pattern));
  // JSON has no infinities; an infinite sigma (zero standard error) is null.
  j["violation_sigma"] = std::isfinite(r.violation_sigma) ? Json(r.violation_sigma) : Json(nullptr);
  return j;
}

Json to_json(const ExperimentSpec& s) {
  Json j = {{"source", std::string(source_name(s.source))},
            {"detection", s.detection},
            {"trials_per_pair", s.trials_per_pair},
            {"seed", s.seed},
            {"fair_sampling", s.fair_sampling},
            {"pattern", std::string(pattern_name(s.pattern))}};
  if (s.source == SourceKind::quantum_white_noise) j["gamma"] = s.gamma;
  if (s.model) j["model"] = to_json(*s.model);
  j["settings"] = std::visit([](const auto& v) { return to_json(v); }, s.settings);
  return j;
}

void write_experiment_csv(std::ostream& os, const std::vector<ExperimentResult>& rows) {
  os << "gamma,eta,statistic,se,bound,violation_sigma\n";
  char line[192];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.gamma, r.eta, r.statistic,
                  r.statistic_se, r.bound_used, r.violation_sigma);
    os << line;
  }
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Strips a trailing # comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

Json parse_scalar(const std::string& raw) {
  Json parsed = Json::parse(raw, nullptr, false);
  if (!parsed.is_discarded()) return parsed;
  if (raw.find(',') != std::string::npos) {
    parsed = Json::parse("[" + raw + "]", nullptr, false);
    if (!parsed.is_discarded()) return parsed;
  }
  return raw;  // bare word
}

}  // namespace

Json parse_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError({std::string("/: malformed JSON: ") + e.what()});
    }
  }

  Json root = Json::object();
  std::vector<std::string> errors;
  std::istringstream in(text);
  std::string line;
  std::string section;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    if (!section.empty()) key = section + "." + key;
    Json::json_pointer ptr;
    std::istringstream parts(key);
    for (std::string part; std::getline(parts, part, '.');) ptr /= trim(part);
    root[ptr] = parse_scalar(value);
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return root;
}

namespace {

const std::array<const char*, 10> kConfigKeys{"source",          "gamma",  "model",
                                              "model_path",      "detection", "settings",
                                              "pattern",         "trials_per_pair", "seed",
                                              "fair_sampling"};

}  // namespace

ExperimentSpec spec_from_config(const Json& config, const std::string& base_dir) {
  if (!config.is_object()) throw ConfigError({"/: configuration must be an object"});
  ExperimentSpec spec;
  std::vector<std::string> errors;

  for (const auto& [key, value] : config.items()) {
    if (std::find_if(kConfigKeys.begin(), kConfigKeys.end(),
                     [&](const char* k) { return key == k; }) == kConfigKeys.end())
      errors.push_back("/" + key + ": unknown key");
  }

  auto number = [&](const char* key, double& out) {
    auto it = config.find(key);
    if (it == config.end()) return;
    if (!it->is_number()) {
      errors.push_back(std::string("/") + key + ": expected a number");
      return;
    }
    out = it->get<double>();
  };
  auto unsigned_integer = [&](const char* key, std::uint64_t& out) {
    auto it = config.find(key);
    if (it == config.end()) return;
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      errors.push_back(std::string("/") + key + ": expected a nonnegative integer");
      return;
    }
    out = it->get<std::uint64_t>();
  };

  if (auto it = config.find("source"); it != config.end()) {
    const std::string s = it->is_string() ? it->get<std::string>() : "";
    if (s == "quantum") spec.source = SourceKind::quantum;
    else if (s == "quantum_white_noise") spec.source = SourceKind::quantum_white_noise;
    else if (s == "lhv") spec.source = SourceKind::lhv;
    else errors.emplace_back("/source: expected quantum, quantum_white_noise or lhv");
  }
  number("gamma", spec.gamma);
  number("detection", spec.detection);
  unsigned_integer("trials_per_pair", spec.trials_per_pair);
  unsigned_integer("seed", spec.seed);
  if (auto it = config.find("fair_sampling"); it != config.end()) {
    if (it->is_boolean()) spec.fair_sampling = it->get<bool>();
    else errors.emplace_back("/fair_sampling: expected true or false");
  }
  if (auto it = config.find("pattern"); it != config.end()) {
    try {
      spec.pattern = parse_pattern(it->is_string() ? it->get<std::string>() : "");
    } catch (const InvalidArgument& e) {
      errors.push_back(std::string("/pattern: ") + e.what());
    }
  }
  if (auto it = config.find("settings"); it != config.end()) {
    try {
      if (it->is_object() && (it->contains("a_prime") || it->contains("b_prime")))
        spec.settings = chsh_settings_from_json(*it, "/settings");
      else
        spec.settings = setting_triple_from_json(*it, "/settings");
    } catch (const InvalidArgument& e) {
      errors.emplace_back(e.what());
    }
  } else if (spec.source != SourceKind::lhv) {
    errors.emplace_back("/settings: missing required key");
  }

  const bool inline_model = config.contains("model");
  if (inline_model && config.contains("model_path"))
    errors.emplace_back("/model_path: give either model or model_path, not both");
  try {
    if (inline_model) {
      spec.model = model_from_json(config["model"], "/model");
    } else if (auto it = config.find("model_path"); it != config.end()) {
      if (!it->is_string()) throw InvalidArgument("/model_path: expected a file path");
      std::filesystem::path p = it->get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      std::ifstream in(p);
      if (!in) throw InvalidArgument("/model_path: cannot read " + p.string());
      Json mj = Json::parse(in, nullptr, false);
      if (mj.is_discarded()) throw InvalidArgument("/model_path: " + p.string() + " is not valid JSON");
      spec.model = model_from_json(mj, "/model");
    }
  } catch (const InvalidArgument& e) {
    errors.emplace_back(e.what());
  }

  if (errors.empty()) {
    auto more = validate_spec(spec);
    errors.insert(errors.end(), more.begin(), more.end());
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"/: cannot read config file " + path});
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return spec_from_config(parse_config_text(buffer.str()), dir.empty() ? "." : dir.string());
}

}  // namespace obell
