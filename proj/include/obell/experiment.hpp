#pragma once

// Seeded Monte Carlo simulation of finite-statistics OB and CHSH tests.
//
// Seeding: setting pair k of a run draws from
//   RandomStream(derive_seed(spec.seed, key_k))
// where key_k is the pair's row-major index in the 3x3 pair table for OB and
// 100 + position for CHSH pairs (ab, ab', a'b, a'b'). A sweep cell at
// (gamma, eta) runs with seed
//   derive_seed(derive_seed(master, coordinate_key(gamma)), coordinate_key(eta)),
// so no result depends on thread scheduling or on the order of cells.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "obell/core.hpp"
#include "obell/rng.hpp"
#include "obell/serialize.hpp"

namespace obell {

enum class SourceKind {
  quantum,              // ideal singlet
  quantum_white_noise,  // singlet mixed with white noise: correlations scale by gamma
  lhv,                  // finite hidden-variable model
};

[[nodiscard]] std::string_view source_name(SourceKind k);

struct ExperimentSpec {
  SourceKind source = SourceKind::quantum;
  /// Visibility of the white-noise mixture. Only read for quantum_white_noise.
  double gamma = 1.0;
  /// Required for the lhv source.
  std::optional<HiddenVariableModel> model;
  /// Joint detection efficiency eta in (0, 1].
  double detection = 1.0;
  /// Three settings for an OB test, four for CHSH. Ignored by the lhv source,
  /// which measures labels rather than axes.
  std::variant<SettingTriple, ChshSettings> settings = SettingTriple{};
  ObPattern pattern = ObPattern::standard;
  std::uint64_t trials_per_pair = 100000;
  std::uint64_t seed = 0;
  /// Detection is an independent Bernoulli(eta) draw per trial. When false
  /// (lhv only) detection follows the model's detect_flag.
  bool fair_sampling = true;

  [[nodiscard]] bool is_chsh() const { return std::holds_alternative<ChshSettings>(settings); }
};

/// Configuration problems, one message per offending key path.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  [[nodiscard]] const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Every violated constraint of `spec`, or empty.
[[nodiscard]] std::vector<std::string> validate_spec(const ExperimentSpec& spec);

struct PairEstimate {
  std::string pair;  // "ab", "ac", ... or "ab'", "a'b", ... for CHSH
  std::uint64_t trials = 0;
  std::uint64_t detected = 0;
  /// Sum of outcome products over detected trials.
  std::int64_t product_sum = 0;
  double correlation = 0.0;
  double se = 0.0;
};

struct ExperimentResult {
  std::string statistic_kind;  // "ob" or "chsh"
  ObPattern pattern = ObPattern::standard;
  SourceKind source = SourceKind::quantum;
  double gamma = 1.0;    // visibility for white noise, 1 - max defect mass for lhv
  double epsilon = 0.0;  // defect used for the bound
  double eta = 1.0;      // detection efficiency used for the bound
  bool fair_sampling = true;
  std::uint64_t seed = 0;
  std::vector<PairEstimate> pairs;
  double statistic = 0.0;
  double statistic_se = 0.0;
  double bound_used = 0.0;
  /// (statistic - bound) / se; +-infinity when se is zero and they differ.
  double violation_sigma = 0.0;
  /// Describes how gamma maps onto the source, since only the white-noise
  /// identification links it to quantum correlations.
  std::string noise_model;
};

/// Detection flag for one trial. With fair sampling the flag is an
/// independent Bernoulli(eta) draw (no draw when eta == 1). Without fair
/// sampling `model_flag` (the hidden-variable model's detect_flag for this
/// atom and pair) decides; a missing model_flag means there is no hidden
/// variable to condition on and the call is rejected.
[[nodiscard]] TrialRecord detection_censor(TrialRecord record, double eta, RandomStream& rng,
                                           bool fair_sampling,
                                           std::optional<bool> model_flag = std::nullopt);

/// Runs every setting pair of `spec` and combines the estimates. Pairs run
/// on up to `threads` workers (0 = hardware concurrency); the result is
/// bit-identical for any thread count. Throws ConfigError for an invalid
/// spec and InvalidArgument naming the pair if a pair has no detected trial.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t threads = 1);

struct SweepCell {
  double gamma = 0.0;
  double eta = 0.0;
  std::optional<ExperimentResult> result;
  std::string error;  // set when the cell failed
};

/// The spec a sweep runs for cell (gamma, eta): white-noise source with
/// visibility gamma, detection eta and the derived cell seed.
[[nodiscard]] ExperimentSpec sweep_cell_spec(const ExperimentSpec& tmpl, double gamma, double eta);

/// One run per (gamma, eta), gamma-major. The template must use a quantum
/// source. A failing cell records its error and does not stop the sweep.
[[nodiscard]] std::vector<SweepCell> sweep(const ExperimentSpec& tmpl,
                                           const std::vector<double>& gamma_values,
                                           const std::vector<double>& eta_values,
                                           std::size_t threads = 1);

[[nodiscard]] Json to_json(const ExperimentResult& r);
[[nodiscard]] Json to_json(const ExperimentSpec& s);

/// Header gamma,eta,statistic,se,bound,violation_sigma; six decimals.
void write_experiment_csv(std::ostream& os, const std::vector<ExperimentResult>& rows);

// Config files: JSON (canonical) or a key = value subset with optional
// [section] headers and dotted keys. Keys match ExperimentSpec field names;
// "model" holds an inline model object and "model_path" a model JSON file
// relative to the config's directory.

/// Parses either format into JSON. Throws ConfigError with line numbers.
[[nodiscard]] Json parse_config_text(const std::string& text);

/// Builds and validates a spec, collecting every problem as "/key: message".
[[nodiscard]] ExperimentSpec spec_from_config(const Json& config, const std::string& base_dir = ".");

/// Reads a config file and calls spec_from_config.
[[nodiscard]] ExperimentSpec load_experiment_spec(const std::string& path);

}  // namespace obell
