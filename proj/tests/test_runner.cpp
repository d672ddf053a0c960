#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascademf/runner.hpp"

using namespace cascademf;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_bell(std::uint64_t seed) {
  RunConfig c = preset_config(Scenario::Custom, seed);
  c.depth = 6;
  c.levels = {4, 5, 6};
  c.replicas = 4;
  c.q_grid = {0.0, 2.0, 0.5};
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const char* name)
      : path(fs::temp_directory_path() / name) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("scenario names round trip, including the addend run") {
  for (Scenario s : {Scenario::Bell, Scenario::BellCritical,
                     Scenario::LeftSided, Scenario::Monofractal,
                     Scenario::SmoothAddend, Scenario::Custom})
    CHECK(scenario_from_string(to_string(s)) == s);
  CHECK(to_string(Scenario::SmoothAddend) == "corollary-cw");
  CHECK_THROWS_AS((void)scenario_from_string("no-such-scenario"),
                  std::invalid_argument);
}

TEST_CASE("q grid spec includes both endpoints") {
  QGridSpec g{0.0, 3.0, 0.25};
  std::vector<double> pts = g.points();
  REQUIRE(pts.size() == 13);
  CHECK(pts.front() == 0.0);
  CHECK(pts.back() == doctest::Approx(3.0));
  QGridSpec fine{0.05, 1.5, 0.05};
  CHECK(fine.points().size() == 30);
}

TEST_CASE("presets pin the headline parameters") {
  RunConfig bell = preset_config(Scenario::Bell, 42);
  CHECK(bell.model.label == "beta-split");
  CHECK(bell.depth == 12);
  CHECK(bell.replicas == 64);
  CHECK(bell.levels == std::vector<int>{6, 7, 8, 9, 10, 11, 12});
  CHECK(bell.thresholds.tau_gap == 0.05);

  RunConfig crit = preset_config(Scenario::BellCritical, 42);
  CHECK(crit.model.label == "critical-b3");
  CHECK(crit.levels == std::vector<int>{8, 10, 12});
  CHECK(crit.sub_depth == 2);
  CHECK(crit.replicas == 16);

  RunConfig left = preset_config(Scenario::LeftSided, 42);
  CHECK(left.model.label == "heavy-log");
  CHECK(left.q_grid.lo == 0.05);      // tau only exists right of zero
  CHECK(left.thresholds.tau_gap == 0.1);

  RunConfig addend = preset_config(Scenario::SmoothAddend, 42);
  CHECK(addend.model.label == "binomial");
  CHECK(addend.replicas == 1);  // the model is deterministic
  CHECK(addend.addend == "exp");
}

TEST_CASE("config JSON round trips and partial configs inherit presets") {
  RunConfig c = preset_config(Scenario::LeftSided, 7);
  c.out_dir = "elsewhere";
  RunConfig back = config_from_json(config_to_json(c));
  CHECK(back.scenario == c.scenario);
  CHECK(back.depth == c.depth);
  CHECK(back.levels == c.levels);
  CHECK(back.replicas == c.replicas);
  CHECK(back.seed == c.seed);
  CHECK(back.out_dir == c.out_dir);
  CHECK(back.q_grid.lo == c.q_grid.lo);
  CHECK(back.q_grid.step == c.q_grid.step);
  CHECK(back.thresholds.tau_gap == c.thresholds.tau_gap);
  CHECK(back.model.label == c.model.label);

  nlohmann::json partial = {{"scenario", "bell"}, {"depth", 9}};
  RunConfig merged = config_from_json(partial);
  CHECK(merged.depth == 9);                       // overridden
  CHECK(merged.replicas == 64);                   // preset survives
  CHECK(merged.model.label == "beta-split");
}

TEST_CASE("the smooth addend catalogue") {
  CHECK(evaluate_addend("exp", 1.3) == doctest::Approx(std::exp(1.3)));
  CHECK_THROWS_AS((void)evaluate_addend("polynomial", 0.5),
                  std::invalid_argument);
}

TEST_CASE("invalid configurations are refused before any work") {
  RunConfig bad = tiny_bell(1);
  bad.replicas = 0;
  CHECK_THROWS_AS((void)run_scenario(bad), std::invalid_argument);

  bad = tiny_bell(1);
  bad.depth = 5;  // below max(levels) + sub_depth
  CHECK_THROWS_AS((void)run_scenario(bad), std::invalid_argument);

  bad = tiny_bell(1);
  bad.q_grid = {-3.0, 1.0, 0.5};  // beta-split moments diverge at -2
  CHECK_THROWS_AS((void)run_scenario(bad), std::invalid_argument);

  bad = tiny_bell(1);
  bad.m_list = {0};
  CHECK_THROWS_AS((void)run_scenario(bad), std::invalid_argument);
}

TEST_CASE("a small bell run produces a coherent report") {
  ComparisonReport report = run_scenario(tiny_bell(11));
  CHECK(report.complete);
  CHECK(report.validation.regime == CascadeCase::ConservativeB1);
  REQUIRE(report.empirical.size() == 1);
  CHECK(report.rows.size() == 5);
  for (const ComparisonRow& row : report.rows) {
    CHECK(std::isfinite(row.analytic_tau));
    CHECK(std::isfinite(row.empirical_tau));
    CHECK(row.gap == doctest::Approx(
                         std::abs(row.analytic_tau - row.empirical_tau)));
  }
  CHECK(report.sup_gap_on_J >= 0.0);
  CHECK(std::isfinite(report.max_std_error));
  CHECK(!report.legendre_analytic.h.empty());
  CHECK(!report.legendre_empirical.h.empty());
  // Pass iff nothing failed; gate consistency with the pinned threshold.
  CHECK(report.passed == report.failures.empty());
  bool gap_ok = report.sup_gap_on_J <= report.config.thresholds.tau_gap;
  bool gap_failure_logged = false;
  for (const std::string& f : report.failures)
    if (f.find("gap") != std::string::npos) gap_failure_logged = true;
  CHECK(gap_ok == !gap_failure_logged);
}

TEST_CASE("reports are byte-stable and thread-count independent") {
  ComparisonReport first = run_scenario(tiny_bell(3));
  std::string a = report_to_json(first).dump(2);

  // Same config, fresh run.
  std::string b = report_to_json(run_scenario(tiny_bell(3))).dump(2);
  CHECK(a == b);

  // Different worker count, same bytes.
  setenv("CASCADEMF_THREADS", "3", 1);
  std::string c = report_to_json(run_scenario(tiny_bell(3))).dump(2);
  unsetenv("CASCADEMF_THREADS");
  CHECK(a == c);

  // Different seed, different numbers.
  std::string d = report_to_json(run_scenario(tiny_bell(4))).dump(2);
  CHECK(a != d);
}

TEST_CASE("plot data lands in a config-addressed directory") {
  TempDir tmp("cascademf_test_plotdata");
  ComparisonReport report = run_scenario(tiny_bell(21));
  std::string dir = emit_plot_data(report, tmp.path.string());
  fs::path run_dir(dir);
  CHECK(fs::exists(run_dir / "report.json"));
  CHECK(fs::exists(run_dir / "manifest.json"));
  CHECK(fs::exists(run_dir / "tau_analytic.csv"));
  CHECK(fs::exists(run_dir / "tau_empirical_m1.csv"));

  // The empirical CSV follows the q,t_hat,stderr,n_levels contract.
  std::ifstream in(run_dir / "tau_empirical_m1.csv");
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "q,t_hat,stderr,n_levels");

  // Re-emitting the same report writes identical bytes.
  std::string json_before = slurp(run_dir / "report.json");
  TempDir tmp2("cascademf_test_plotdata2");
  std::string dir2 = emit_plot_data(report, tmp2.path.string());
  CHECK(slurp(fs::path(dir2) / "report.json") == json_before);
  CHECK(fs::path(dir2).filename() == run_dir.filename());
}

TEST_CASE("validation serialization carries the regime") {
  ComparisonReport report = run_scenario(tiny_bell(2));
  nlohmann::ordered_json v = validation_to_json(report.validation);
  CHECK(v.contains("regime"));
  CHECK(v["regime"].get<std::string>() == "ConservativeB1");
  nlohmann::ordered_json full = report_to_json(report);
  CHECK(full.contains("validation"));
  CHECK(full.contains("comparison"));
  CHECK(full.contains("result"));
}
