// Command line front end: model validation, single realizations, scaling
// exponent estimation, coarse spectra, pointwise exponents, moment scans
// and the preset experiment scenarios. Exit codes: 0 success, 2 threshold
// or validation failure, 1 error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cascademf/oscillation.hpp"
#include "cascademf/runner.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace cascademf;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
  if (!out) throw std::runtime_error("short write to " + path.string());
}

// Run directory <out>/<label>-<seed>-<hash of the parameter string>; a
// repeated invocation overwrites its own files with identical bytes.
fs::path run_directory(const std::string& out, const std::string& label,
                       std::uint64_t seed, const std::string& params) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(params)));
  fs::path dir = fs::path(out) / (label + "-" + std::to_string(seed) + "-" +
                                  std::string(hash).substr(0, 8));
  fs::create_directories(dir);
  return dir;
}

WeightModel model_by_name(const std::string& name) {
  if (name == "binomial") return binomial_model(0.3, 0.7);
  if (name == "monofractal") return monofractal_model();
  if (name == "bell") return beta_split_model();
  if (name == "critical") return critical_model();
  if (name == "heavy-log" || name == "left-sided") return heavy_log_model();
  if (name == "uniform-phase") return uniform_phase_model();
  throw std::invalid_argument(
      "unknown model '" + name +
      "' (known: binomial, monofractal, bell, critical, heavy-log, "
      "uniform-phase)");
}

struct ModelChoice {
  std::string name = "bell";
  std::string file;
};

void add_model_options(CLI::App* sub, ModelChoice& mc) {
  sub->add_option("--model", mc.name,
                  "catalogue model: binomial, monofractal, bell, critical, "
                  "heavy-log, uniform-phase")
      ->capture_default_str();
  sub->add_option("--model-file", mc.file,
                  "JSON description of the weight vectors (overrides "
                  "--model)");
}

WeightModel resolve_model(const ModelChoice& mc) {
  if (!mc.file.empty()) {
    std::ifstream in(mc.file);
    if (!in) throw std::runtime_error("cannot read " + mc.file);
    nlohmann::json j = nlohmann::json::parse(in);
    return model_from_json(j);
  }
  return model_by_name(mc.name);
}

bool may_vanish(const WeightModel& model) {
  for (const Atom& atom : model.atoms)
    if (atom.p > 0.0)
      for (const complexd& w : atom.W)
        if (std::abs(w) == 0.0) return true;
  return false;
}

std::size_t address_rank(const NodeAddress& addr, int base) {
  std::size_t idx = 0;
  for (std::uint8_t d : addr.digits) idx = idx * base + d;
  return idx;
}

// ---- validate ----

struct ValidateArgs {
  ModelChoice model;
  std::string out;
};

int cmd_validate(const ValidateArgs& a) {
  WeightModel model = resolve_model(a.model);
  ValidationReport report = validate(model);
  nlohmann::ordered_json j = validation_to_json(report);
  std::printf("model: %s\n", model.label.c_str());
  std::printf("regime: %s\n", to_string(report.regime).c_str());
  for (const auto& [p, positive] : report.phi_checks)
    std::printf("phi(%g) %s\n", p, positive ? "> 0" : "<= 0");
  for (const std::string& msg : report.messages)
    std::printf("note: %s\n", msg.c_str());
  if (!a.out.empty()) {
    write_file(a.out, j.dump(2) + "\n");
    std::printf("wrote %s\n", a.out.c_str());
  }
  return report.rejected() ? 2 : 0;
}

// ---- simulate ----

struct SimulateArgs {
  ModelChoice model;
  int depth = 10;
  std::uint64_t seed = 42;
  std::string out = "runs";
};

int cmd_simulate(const SimulateArgs& a) {
  WeightModel model = resolve_model(a.model);
  CascadeRealization real(model, a.depth,
                          rng::replica_seed(a.seed, 0));
  fs::path dir = run_directory(
      a.out, "simulate", a.seed,
      model.label + "/" + std::to_string(a.depth));
  export_realization(real, (dir / "realization.bin").string());
  GridFunction fw = evaluate_grid(real, Side::W, a.depth);
  GridFunction fl = evaluate_grid(real, Side::L, a.depth);
  export_grid_csv(fw, (dir / "grid_w.csv").string());
  export_grid_csv(fl, (dir / "grid_l.csv").string());
  ComposedSamples composed = compose(fw, fl);
  std::string csv = "x,re,im\n";
  for (std::size_t i = 0; i < composed.x.size(); ++i)
    csv += fmt(composed.x[i]) + "," + fmt(composed.y[i].real()) + "," +
           fmt(composed.y[i].imag()) + "\n";
  write_file(dir / "composed.csv", csv);
  int check_level = std::min(a.depth, 4);
  std::printf("model: %s, depth %d, seed %llu\n", model.label.c_str(),
              a.depth, static_cast<unsigned long long>(a.seed));
  std::printf("self-similarity residual at level %d: %.3g\n", check_level,
              check_self_similarity(real, check_level));
  std::printf("artifacts: %s\n", dir.string().c_str());
  return 0;
}

// ---- tau ----

struct TauArgs {
  ModelChoice model;
  int depth = 12;
  std::vector<int> levels = {6, 7, 8, 9, 10, 11, 12};
  int sub_depth = 0;
  int replicas = 16;
  int m = 1;
  double q_lo = 0.0, q_hi = 3.0, q_step = 0.25;
  std::uint64_t seed = 42;
  std::string out = "runs";
};

int cmd_tau(const TauArgs& a) {
  WeightModel model = resolve_model(a.model);
  if (a.q_lo < -2.0)
    throw std::invalid_argument(
        "q below -2 is not supported: zero-oscillation cells dominate the "
        "negative-moment sums");
  if (a.q_lo < 0.0 && may_vanish(model))
    throw std::invalid_argument(
        "negative q requires a model whose weights never vanish");
  QGridSpec grid{a.q_lo, a.q_hi, a.q_step};
  std::vector<double> qs = grid.points();

  std::vector<CascadeRealization> reals;
  reals.reserve(static_cast<std::size_t>(a.replicas));
  for (int r = 0; r < a.replicas; ++r)
    reals.emplace_back(model, a.depth,
                       rng::replica_seed(a.seed, static_cast<std::uint64_t>(r)));
  EmpiricalTauConfig ec;
  ec.m = a.m;
  ec.sub_depth = a.sub_depth;
  ec.levels = a.levels;
  ec.q_grid = qs;
  SpectrumCurve emp = empirical_tau(reals, ec);
  SpectrumCurve ana = analytic_curve(model, qs);

  std::string params = model.label + "/" + std::to_string(a.depth) + "/" +
                       std::to_string(a.replicas) + "/" + fmt(a.q_lo) + ":" +
                       fmt(a.q_hi) + ":" + fmt(a.q_step) + "/m" +
                       std::to_string(a.m);
  fs::path dir = run_directory(a.out, "tau", a.seed, params);
  {
    std::string csv = "q,t_hat,stderr,n_levels\n";
    for (std::size_t i = 0; i < emp.q.size(); ++i)
      csv += fmt(emp.q[i]) + "," + fmt(emp.tau[i]) + "," +
             fmt(emp.std_error[i]) + "," + std::to_string(a.levels.size()) +
             "\n";
    write_file(dir / "tau_empirical.csv", csv);
  }
  {
    std::string csv = "q,tau,tau_prime,in_J\n";
    for (std::size_t i = 0; i < ana.q.size(); ++i)
      csv += fmt(ana.q[i]) + "," + fmt(ana.tau[i]) + "," +
             fmt(ana.tau_prime[i]) + "," +
             std::to_string(static_cast<int>(ana.in_J[i])) + "\n";
    write_file(dir / "tau_analytic.csv", csv);
  }
  double gap = 0.0;
  bool have_gap = false;
  std::size_t k = 0;
  for (std::size_t j = 0; j < emp.q.size(); ++j) {
    while (k < ana.q.size() && ana.q[k] < emp.q[j] - 1e-12) ++k;
    if (k >= ana.q.size() || std::abs(ana.q[k] - emp.q[j]) > 1e-12) continue;
    if (!ana.in_J[k]) continue;
    double g = std::abs(emp.tau[j] - ana.tau[k]);
    if (std::isfinite(g)) {
      gap = std::max(gap, g);
      have_gap = true;
    }
  }
  std::printf("model: %s, %d replicas, depth %d, m = %d\n",
              model.label.c_str(), a.replicas, a.depth, a.m);
  if (have_gap)
    std::printf("sup |empirical - analytic| on J: %.4g\n", gap);
  for (const std::string& note : emp.notes)
    std::printf("note: %s\n", note.c_str());
  for (const std::string& note : ana.notes)
    std::printf("note: %s\n", note.c_str());
  std::printf("artifacts: %s\n", dir.string().c_str());
  return 0;
}

// ---- spectrum ----

struct SpectrumArgs {
  ModelChoice model;
  int depth = 12;
  int level = 10;
  int sub_depth = 2;
  int m = 1;
  double bin_width = 0.1;
  std::uint64_t seed = 42;
  std::string out = "runs";
};

int cmd_spectrum(const SpectrumArgs& a) {
  WeightModel model = resolve_model(a.model);
  CascadeRealization real(model, a.depth, rng::replica_seed(a.seed, 0));
  CylinderTable table = collect_cylinders(real, a.m, a.level, a.sub_depth);
  CoarseSpectrum spec = coarse_spectrum(table, a.bin_width);
  std::string params = model.label + "/" + std::to_string(a.depth) + "/" +
                       std::to_string(a.level) + "/" + fmt(a.bin_width);
  fs::path dir = run_directory(a.out, "spectrum", a.seed, params);
  std::string csv = "h,D_hat,count\n";
  for (const CoarseBin& bin : spec.bins)
    csv += fmt(0.5 * (bin.h_lo + bin.h_hi)) + "," + fmt(bin.d_hat) + "," +
           std::to_string(bin.count) + "\n";
  write_file(dir / "coarse_spectrum.csv", csv);
  std::printf("model: %s, level %d, m = %d\n", model.label.c_str(), a.level,
              a.m);
  std::printf("exponent range: [%.4g, %.4g], %zu occupied bins, %zu dead "
              "cells\n",
              spec.min_exponent, spec.max_exponent, spec.bins.size(),
              spec.zero_cells);
  std::printf("artifacts: %s\n", dir.string().c_str());
  return 0;
}

// ---- pointwise ----

struct PointwiseArgs {
  ModelChoice model;
  int depth = 14;
  double q = 2.0;
  int level = 10;
  int trunc = 4;
  int draws = 64;
  int m = 1;
  int lo_level = 2;
  int sub_depth = 3;
  std::uint64_t seed = 42;
  std::string out = "runs";
};

int cmd_pointwise(const PointwiseArgs& a) {
  WeightModel model = resolve_model(a.model);
  IntervalJ J = interval_J(model);
  double tau_q = tau(model, a.q);
  CascadeRealization real(model, a.depth, rng::replica_seed(a.seed, 0));
  MuSample mu = sample_mu_q(real, J, a.q, tau_q, a.level, a.trunc, a.draws,
                            a.seed);

  std::string params = model.label + "/" + std::to_string(a.depth) + "/q" +
                       fmt(a.q) + "/" + std::to_string(a.level) + "/" +
                       std::to_string(a.draws);
  fs::path dir = run_directory(a.out, "pointwise", a.seed, params);
  {
    std::string csv = "addr,weight\n";
    for (const MuAtom& atom : mu.support)
      csv += atom.address.to_string() + "," + fmt(atom.weight) + "\n";
    write_file(dir / "mu_sample.csv", csv);
  }
  std::vector<double> hs;
  std::string csv = "addr,u0,h_hat,rungs_used,residual\n";
  for (const NodeAddress& addr : mu.draws) {
    ExponentEstimate est =
        cylinder_exponent(real, addr, a.m, a.lo_level, a.sub_depth);
    if (!est.infinite) hs.push_back(est.h_hat);
    csv += addr.to_string() + "," + fmt(est.x) + "," +
           (est.infinite ? std::string("inf") : fmt(est.h_hat)) + "," +
           std::to_string(est.rungs_used) + "," + fmt(est.residual) + "\n";
  }
  write_file(dir / "pointwise.csv", csv);
  std::printf("model: %s, q = %g, tau(q) = %.6g\n", model.label.c_str(), a.q,
              tau_q);
  std::printf("mu normalization: log total %.6g, parent residual %.3g\n",
              mu.log_norm, mu.max_parent_residual);
  if (!hs.empty())
    std::printf("median pointwise exponent over %zu draws: %.4g "
                "(tau'(q) = %.4g)\n",
                hs.size(), median(hs), tau_prime(model, a.q));
  std::printf("artifacts: %s\n", dir.string().c_str());
  return 0;
}

// ---- moments ----

struct MomentsArgs {
  ModelChoice model;
  int m = 1;
  double q = 2.0;
  int depth = 10;
  int replicas = 200;
  std::vector<double> t_points = {1, 10, 100, 1000, 10000};
  std::uint64_t seed = 42;
  std::string out = "runs";
};

int cmd_moments(const MomentsArgs& a) {
  WeightModel model = resolve_model(a.model);
  MomentReport report = estimate_moments(model, a.m, a.q, a.t_points,
                                         a.replicas, a.depth, a.seed);
  std::string params = model.label + "/" + std::to_string(a.depth) + "/q" +
                       fmt(a.q) + "/" + std::to_string(a.replicas);
  fs::path dir = run_directory(a.out, "moments", a.seed, params);
  std::string csv = "t,psi_hat\n";
  for (std::size_t i = 0; i < report.t_points.size(); ++i)
    csv += fmt(report.t_points[i]) + "," + fmt(report.laplace[i]) + "\n";
  write_file(dir / "laplace.csv", csv);
  std::printf("model: %s, order m = %d, q = %g, depth %d, %d replicas\n",
              model.label.c_str(), a.m, a.q, a.depth, a.replicas);
  std::printf("E|Z|^q estimate: %.6g +/- %.3g%s\n", report.moment_mean,
              report.moment_std_error,
              report.heavy_tail_warning ? " (heavy tail: one replica "
                                          "dominates the sum)"
                                        : "");
  std::printf("artifacts: %s\n", dir.string().c_str());
  return 0;
}

// ---- experiment ----

struct ExperimentFlags {
  std::string scenario = "bell";
  std::uint64_t seed = 42;
  std::string config_file;
  int depth = 0;
  int replicas = 0;
  int sub_depth = 0;
  std::vector<int> levels;
  std::vector<int> m_list;
  double q_lo = 0, q_hi = 0, q_step = 0;
  std::string out;
  std::string addend;
};

int cmd_experiment(const ExperimentFlags& f, const CLI::App* sub) {
  nlohmann::json j = nlohmann::json::object();
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw std::runtime_error("cannot read " + f.config_file);
    j = nlohmann::json::parse(in);
  }
  auto given = [&](const std::string& flag) {
    return sub->count(flag) > 0;
  };
  if (given("--scenario") || !j.contains("scenario"))
    j["scenario"] = f.scenario;
  if (given("--seed") || !j.contains("seed")) j["seed"] = f.seed;
  if (given("--depth")) j["depth"] = f.depth;
  if (given("--replicas")) j["replicas"] = f.replicas;
  if (given("--sub-depth")) j["sub_depth"] = f.sub_depth;
  if (given("--levels")) j["levels"] = f.levels;
  if (given("--m")) j["m_list"] = f.m_list;
  if (given("--q-lo")) j["q_grid"]["lo"] = f.q_lo;
  if (given("--q-hi")) j["q_grid"]["hi"] = f.q_hi;
  if (given("--q-step")) j["q_grid"]["step"] = f.q_step;
  if (given("--out")) j["out_dir"] = f.out;
  if (given("--addend")) j["addend"] = f.addend;

  RunConfig config = config_from_json(j);
  ComparisonReport report = run_scenario(config);
  std::string dir = emit_plot_data(report, config.out_dir);

  std::printf("scenario %s, seed %llu: depth %d, %d replicas, %zu q "
              "points\n",
              to_string(config.scenario).c_str(),
              static_cast<unsigned long long>(config.seed), config.depth,
              config.replicas, config.q_grid.points().size());
  std::printf("regime: %s\n", to_string(report.validation.regime).c_str());
  if (std::isfinite(report.sup_gap_on_J))
    std::printf("sup gap on J: %.4g (threshold %.4g)\n", report.sup_gap_on_J,
                config.thresholds.tau_gap);
  if (report.coarse)
    std::printf("coarse exponents: [%.4g, %.4g] in %zu bins%s\n",
                report.coarse->min_exponent, report.coarse->max_exponent,
                report.coarse->bins.size(),
                report.coarse_collapsed ? " (collapsed)" : "");
  if (report.critical) {
    std::printf("minimum cylinder exponent by level:");
    for (std::size_t i = 0; i < report.critical->levels.size(); ++i)
      std::printf(" %d:%.4g", report.critical->levels[i],
                  report.critical->min_exponent[i]);
    std::printf(" (%s)\n",
                report.critical->decreasing ? "decreasing" : "not decreasing");
  }
  if (report.addend_check)
    std::printf("addend check: kink predicted %.4g, estimated %.4g, sup gap "
                "%.4g\n",
                report.addend_check->q1_predicted,
                report.addend_check->q1_estimated,
                report.addend_check->sup_gap);
  for (const std::string& note : report.notes)
    std::printf("note: %s\n", note.c_str());
  for (const std::string& failure : report.failures)
    std::printf("FAIL: %s\n", failure.c_str());
  std::printf("%s\n", report.passed ? "PASS" : "FAIL");
  std::printf("artifacts: %s\n", dir.c_str());
  return report.passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"complex multiplicative cascade toolkit"};
  app.require_subcommand(1);

  ValidateArgs va;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "classify a weight model");
  add_model_options(validate_cmd, va.model);
  validate_cmd->add_option("--out", va.out, "write the report JSON here");

  SimulateArgs sa;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "sample one realization and export it");
  add_model_options(simulate_cmd, sa.model);
  simulate_cmd->add_option("--depth", sa.depth)->capture_default_str();
  simulate_cmd->add_option("--seed", sa.seed)->capture_default_str();
  simulate_cmd->add_option("--out", sa.out)->capture_default_str();

  TauArgs ta;
  CLI::App* tau_cmd = app.add_subcommand(
      "tau", "empirical scaling exponents against the analytic curve");
  add_model_options(tau_cmd, ta.model);
  tau_cmd->add_option("--depth", ta.depth)->capture_default_str();
  tau_cmd->add_option("--levels", ta.levels, "resolutions, comma separated")
      ->delimiter(',');
  tau_cmd->add_option("--sub-depth", ta.sub_depth)->capture_default_str();
  tau_cmd->add_option("--replicas", ta.replicas)->capture_default_str();
  tau_cmd->add_option("--m", ta.m, "oscillation order")
      ->capture_default_str();
  tau_cmd->add_option("--q-lo", ta.q_lo)->capture_default_str();
  tau_cmd->add_option("--q-hi", ta.q_hi)->capture_default_str();
  tau_cmd->add_option("--q-step", ta.q_step)->capture_default_str();
  tau_cmd->add_option("--seed", ta.seed)->capture_default_str();
  tau_cmd->add_option("--out", ta.out)->capture_default_str();

  SpectrumArgs spa;
  CLI::App* spectrum_cmd = app.add_subcommand(
      "spectrum", "coarse exponent histogram of one realization");
  add_model_options(spectrum_cmd, spa.model);
  spectrum_cmd->add_option("--depth", spa.depth)->capture_default_str();
  spectrum_cmd->add_option("--level", spa.level)->capture_default_str();
  spectrum_cmd->add_option("--sub-depth", spa.sub_depth)
      ->capture_default_str();
  spectrum_cmd->add_option("--m", spa.m)->capture_default_str();
  spectrum_cmd->add_option("--bin-width", spa.bin_width)
      ->capture_default_str();
  spectrum_cmd->add_option("--seed", spa.seed)->capture_default_str();
  spectrum_cmd->add_option("--out", spa.out)->capture_default_str();

  PointwiseArgs pa;
  CLI::App* pointwise_cmd = app.add_subcommand(
      "pointwise", "pointwise exponents at cells drawn from mu_q");
  add_model_options(pointwise_cmd, pa.model);
  pointwise_cmd->add_option("--depth", pa.depth)->capture_default_str();
  pointwise_cmd->add_option("--q", pa.q)->capture_default_str();
  pointwise_cmd->add_option("--level", pa.level, "cell resolution to draw at")
      ->capture_default_str();
  pointwise_cmd->add_option("--trunc", pa.trunc, "subtree truncation depth")
      ->capture_default_str();
  pointwise_cmd->add_option("--draws", pa.draws)->capture_default_str();
  pointwise_cmd->add_option("--m", pa.m)->capture_default_str();
  pointwise_cmd->add_option("--lo-level", pa.lo_level,
                            "coarsest ladder level")
      ->capture_default_str();
  pointwise_cmd->add_option("--sub-depth", pa.sub_depth,
                            "subtree depth of the factored oscillation")
      ->capture_default_str();
  pointwise_cmd->add_option("--seed", pa.seed)->capture_default_str();
  pointwise_cmd->add_option("--out", pa.out)->capture_default_str();

  MomentsArgs ma;
  CLI::App* moments_cmd = app.add_subcommand(
      "moments", "Monte Carlo moments and Laplace transform of the total "
                 "oscillation");
  add_model_options(moments_cmd, ma.model);
  moments_cmd->add_option("--m", ma.m)->capture_default_str();
  moments_cmd->add_option("--q", ma.q)->capture_default_str();
  moments_cmd->add_option("--depth", ma.depth)->capture_default_str();
  moments_cmd->add_option("--replicas", ma.replicas)->capture_default_str();
  moments_cmd->add_option("--t", ma.t_points, "Laplace points, comma "
                                              "separated")
      ->delimiter(',');
  moments_cmd->add_option("--seed", ma.seed)->capture_default_str();
  moments_cmd->add_option("--out", ma.out)->capture_default_str();

  ExperimentFlags ef;
  CLI::App* experiment_cmd = app.add_subcommand(
      "experiment", "preset scenario with analytic-vs-empirical report");
  experiment_cmd
      ->add_option("--scenario", ef.scenario,
                   "bell, bell-critical, left-sided, monofractal, "
                   "corollary-cw, custom")
      ->capture_default_str();
  experiment_cmd->add_option("--seed", ef.seed)->capture_default_str();
  experiment_cmd->add_option("--config", ef.config_file,
                             "JSON config (flags override its keys)");
  experiment_cmd->add_option("--depth", ef.depth);
  experiment_cmd->add_option("--replicas", ef.replicas);
  experiment_cmd->add_option("--sub-depth", ef.sub_depth);
  experiment_cmd->add_option("--levels", ef.levels)->delimiter(',');
  experiment_cmd->add_option("--m", ef.m_list, "oscillation orders")
      ->delimiter(',');
  experiment_cmd->add_option("--q-lo", ef.q_lo);
  experiment_cmd->add_option("--q-hi", ef.q_hi);
  experiment_cmd->add_option("--q-step", ef.q_step);
  experiment_cmd->add_option("--out", ef.out, "output directory");
  experiment_cmd->add_option("--addend", ef.addend,
                             "smooth addend name (corollary-cw)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) return cmd_validate(va);
    if (simulate_cmd->parsed()) return cmd_simulate(sa);
    if (tau_cmd->parsed()) return cmd_tau(ta);
    if (spectrum_cmd->parsed()) return cmd_spectrum(spa);
    if (pointwise_cmd->parsed()) return cmd_pointwise(pa);
    if (moments_cmd->parsed()) return cmd_moments(ma);
    if (experiment_cmd->parsed()) return cmd_experiment(ef, experiment_cmd);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
