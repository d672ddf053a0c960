#pragma once

// Scenario orchestration: named presets with pinned parameters, the
// validate -> simulate -> measure -> compare pipeline, pass/fail evaluation
// against pinned thresholds, and byte-stable report/plot-data persistence.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cascademf/analytic_spectrum.hpp"
#include "cascademf/cascade.hpp"
#include "cascademf/empirical_spectrum.hpp"
#include "cascademf/weights.hpp"

#include "json.hpp"

namespace cascademf {

inline constexpr const char* kVersion = "1.0.0";

enum class Scenario {
  Bell,          // Beta(2,2) split, uniform halves
  BellCritical,  // base-3 critical mixture
  LeftSided,     // heavy-log family
  Monofractal,   // ((1+i)/2, (1-i)/2)
  SmoothAddend,  // deterministic binomial plus a smooth addend
  Custom,
};

// Scenario names accepted on the command line: bell, bell-critical,
// left-sided, monofractal, corollary-cw (the smooth-addend run), custom.
std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct QGridSpec {
  double lo = 0.0;
  double hi = 3.0;
  double step = 0.25;

  std::vector<double> points() const;
};

// Pass/fail thresholds. Presets pin them; custom configs may override.
struct Thresholds {
  double tau_gap = 0.05;        // sup |analytic - empirical| on J
  double addend_gap = 0.1;      // same, against the smooth-addend prediction
  double kink_offset = 0.2;     // |q1 estimated - q1 predicted|
  double collapse_width = 0.1;  // coarse exponent spread, monofractal runs
};

struct RunConfig {
  Scenario scenario = Scenario::Bell;
  WeightModel model;
  int depth = 12;
  std::vector<int> levels;
  int sub_depth = 0;
  int replicas = 64;
  std::vector<int> m_list = {1};
  QGridSpec q_grid;
  std::uint64_t seed = 42;
  std::string out_dir = "runs";
  std::string addend = "exp";  // smooth addend name, addend runs only
  Thresholds thresholds;
};

// Pinned preset for a scenario; `custom` starts from the bell settings and
// expects the caller to override the model.
RunConfig preset_config(Scenario scenario, std::uint64_t seed);

// JSON round trip. Reading starts from the scenario's preset and overrides
// whatever keys are present, so partial configs stay valid.
nlohmann::ordered_json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

// The named smooth addend as a callable; throws on unknown names.
double evaluate_addend(const std::string& name, double t);

struct ComparisonRow {
  int m = 1;
  double q = 0.0;
  double analytic_tau = 0.0;   // linearized full scaling function
  double empirical_tau = 0.0;
  double gap = 0.0;
  double std_error = 0.0;
  bool in_J = false;
};

struct CriticalTrend {
  std::vector<int> levels;
  std::vector<double> min_exponent;  // median across replicas per level
  bool decreasing = false;
};

struct AddendCheck {
  int m = 1;
  double q1_predicted = 0.0;  // crossing of tau with the line q m - 1
  double q1_estimated = 0.0;  // crossing of the measured curve with it
  double sup_gap = 0.0;       // sup |estimated - min(tau, qm - 1)|
  std::vector<double> q;
  std::vector<double> predicted;
  std::vector<double> estimated;
};

struct ComparisonReport {
  RunConfig config;
  ValidationReport validation;
  bool complete = false;  // false when the pipeline stopped early

  SpectrumCurve analytic;
  std::vector<SpectrumCurve> empirical;  // parallel to config.m_list
  std::vector<ComparisonRow> rows;
  double sup_gap_on_J = 0.0;
  double max_std_error = 0.0;  // measured dispersion, for threshold review

  LegendrePair legendre_analytic;
  LegendrePair legendre_analytic_parametric;
  LegendrePair legendre_empirical;

  std::optional<CoarseSpectrum> coarse;     // monofractal runs
  bool coarse_collapsed = false;
  std::optional<CriticalTrend> critical;    // bell-critical runs
  std::optional<AddendCheck> addend_check;  // smooth-addend runs

  bool passed = false;
  std::vector<std::string> failures;
  std::vector<std::string> notes;
};

// Full pipeline for one configuration. Rejected models and invariant
// violations in the config throw; threshold misses are reported, not
// thrown. The result is a pure function of the config (thread count only
// changes the schedule, never the numbers).
ComparisonReport run_scenario(const RunConfig& config);

nlohmann::ordered_json report_to_json(const ComparisonReport& report);
nlohmann::ordered_json validation_to_json(const ValidationReport& report);

// Writes report.json, one CSV per curve and a manifest into a run
// subdirectory named after (scenario, seed, config hash); returns that
// directory. Identical reports produce identical bytes.
std::string emit_plot_data(const ComparisonReport& report,
                           const std::string& directory);

}  // namespace cascademf
