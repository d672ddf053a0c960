#include "cascademf/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace cascademf {

namespace fs = std::filesystem;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

bool tau_domain_ok(const WeightModel& model, double q) {
  if (model.atoms_only()) return true;
  for (int i = 0; i < model.base; ++i)
    if (family_moment_diverges(*model.generator, i, q)) return false;
  return true;
}

void check_config(const RunConfig& c) {
  if (c.replicas < 1) throw std::invalid_argument("replicas must be >= 1");
  if (c.levels.empty())
    throw std::invalid_argument("at least one level is required");
  if (c.m_list.empty())
    throw std::invalid_argument("at least one oscillation order is required");
  for (int m : c.m_list)
    if (m < 1) throw std::invalid_argument("oscillation orders must be >= 1");
  for (int n : c.levels)
    if (n < 1) throw std::invalid_argument("levels must be >= 1");
  int top = *std::max_element(c.levels.begin(), c.levels.end());
  if (c.depth < top + c.sub_depth)
    throw std::invalid_argument(
        "depth must cover max(levels) + sub_depth; got depth " +
        std::to_string(c.depth));
  for (double q : c.q_grid.points())
    if (!tau_domain_ok(c.model, q))
      throw std::invalid_argument(
          "q grid leaves the analytic domain at q = " + fmt4(q));
}

std::string join_messages(const std::vector<std::string>& messages) {
  std::string out;
  for (const std::string& msg : messages) {
    if (!out.empty()) out += "; ";
    out += msg;
  }
  return out;
}

// Rightmost sign change from positive to non-positive of d over the grid q,
// linearly interpolated. Falls back to 0 when d never goes positive and to
// the grid end when it never comes back down.
double rightmost_crossing(const std::vector<double>& q,
                          const std::vector<double>& d) {
  bool any_positive = false;
  for (double v : d)
    if (std::isfinite(v) && v > 0.0) any_positive = true;
  if (!any_positive) return 0.0;
  for (std::size_t i = q.size() - 1; i-- > 0;) {
    if (!std::isfinite(d[i]) || !std::isfinite(d[i + 1])) continue;
    if (d[i] > 0.0 && d[i + 1] <= 0.0)
      return q[i] + d[i] * (q[i + 1] - q[i]) / (d[i] - d[i + 1]);
  }
  return q.back();
}

// Median of the finite entries; NaN when there are none.
double finite_median(const std::vector<double>& values) {
  std::vector<double> keep;
  for (double v : values)
    if (std::isfinite(v)) keep.push_back(v);
  if (keep.empty()) return kNan;
  return median(keep);
}

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Bell:
      return "bell";
    case Scenario::BellCritical:
      return "bell-critical";
    case Scenario::LeftSided:
      return "left-sided";
    case Scenario::Monofractal:
      return "monofractal";
    case Scenario::SmoothAddend:
      return "corollary-cw";
    case Scenario::Custom:
      return "custom";
  }
  return "custom";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "bell") return Scenario::Bell;
  if (name == "bell-critical") return Scenario::BellCritical;
  if (name == "left-sided") return Scenario::LeftSided;
  if (name == "monofractal") return Scenario::Monofractal;
  if (name == "corollary-cw") return Scenario::SmoothAddend;
  if (name == "custom") return Scenario::Custom;
  throw std::invalid_argument("unknown scenario: " + name);
}

std::vector<double> QGridSpec::points() const {
  if (!(step > 0.0))
    throw std::invalid_argument("q grid step must be positive");
  if (hi < lo) throw std::invalid_argument("q grid bounds out of order");
  int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> qs;
  qs.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) qs.push_back(lo + k * step);
  return qs;
}

RunConfig preset_config(Scenario scenario, std::uint64_t seed) {
  RunConfig c;
  c.scenario = scenario;
  c.seed = seed;
  switch (scenario) {
    case Scenario::Bell:
    case Scenario::Custom:
      c.model = beta_split_model();
      c.depth = 12;
      c.levels = {6, 7, 8, 9, 10, 11, 12};
      c.sub_depth = 0;
      c.replicas = 64;
      c.q_grid = {0.0, 3.0, 0.25};
      break;
    case Scenario::Monofractal:
      c.model = monofractal_model();
      c.depth = 12;
      c.levels = {6, 7, 8, 9, 10, 11, 12};
      c.sub_depth = 0;
      c.replicas = 64;
      c.q_grid = {0.0, 3.0, 0.25};
      break;
    case Scenario::BellCritical:
      c.model = critical_model();
      c.depth = 14;
      c.levels = {8, 10, 12};
      c.sub_depth = 2;
      c.replicas = 16;
      c.q_grid = {0.0, 3.0, 0.5};
      break;
    case Scenario::LeftSided:
      // The interesting window sits just right of q = 0, where the slopes
      // blow up; past q ~ 0.3 this model's tau is flat near zero.
      c.model = heavy_log_model();
      c.depth = 14;
      c.levels = {6, 8, 10, 12, 14};
      c.sub_depth = 0;
      c.replicas = 32;
      c.q_grid = {0.05, 1.5, 0.05};
      c.thresholds.tau_gap = 0.1;
      break;
    case Scenario::SmoothAddend:
      c.model = binomial_model(0.3, 0.7);
      c.depth = 14;
      c.levels = {8, 9, 10, 11, 12, 13};
      c.sub_depth = 0;
      c.replicas = 1;
      c.q_grid = {0.0, 3.0, 0.1};
      break;
  }
  return c;
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["scenario"] = to_string(c.scenario);
  j["seed"] = c.seed;
  j["model"] = model_to_json(c.model);
  j["depth"] = c.depth;
  j["levels"] = c.levels;
  j["sub_depth"] = c.sub_depth;
  j["replicas"] = c.replicas;
  j["m_list"] = c.m_list;
  nlohmann::ordered_json qg;
  qg["lo"] = c.q_grid.lo;
  qg["hi"] = c.q_grid.hi;
  qg["step"] = c.q_grid.step;
  j["q_grid"] = qg;
  j["out_dir"] = c.out_dir;
  j["addend"] = c.addend;
  nlohmann::ordered_json th;
  th["tau_gap"] = c.thresholds.tau_gap;
  th["addend_gap"] = c.thresholds.addend_gap;
  th["kink_offset"] = c.thresholds.kink_offset;
  th["collapse_width"] = c.thresholds.collapse_width;
  j["thresholds"] = th;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  Scenario s = scenario_from_string(j.value("scenario", std::string("custom")));
  std::uint64_t seed = 42;
  if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
  RunConfig c = preset_config(s, seed);
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("depth")) c.depth = j.at("depth").get<int>();
  if (j.contains("levels")) c.levels = j.at("levels").get<std::vector<int>>();
  if (j.contains("sub_depth")) c.sub_depth = j.at("sub_depth").get<int>();
  if (j.contains("replicas")) c.replicas = j.at("replicas").get<int>();
  if (j.contains("m_list")) c.m_list = j.at("m_list").get<std::vector<int>>();
  if (j.contains("q_grid")) {
    const auto& qg = j.at("q_grid");
    if (qg.contains("lo")) c.q_grid.lo = qg.at("lo").get<double>();
    if (qg.contains("hi")) c.q_grid.hi = qg.at("hi").get<double>();
    if (qg.contains("step")) c.q_grid.step = qg.at("step").get<double>();
  }
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("addend")) c.addend = j.at("addend").get<std::string>();
  if (j.contains("thresholds")) {
    const auto& th = j.at("thresholds");
    if (th.contains("tau_gap"))
      c.thresholds.tau_gap = th.at("tau_gap").get<double>();
    if (th.contains("addend_gap"))
      c.thresholds.addend_gap = th.at("addend_gap").get<double>();
    if (th.contains("kink_offset"))
      c.thresholds.kink_offset = th.at("kink_offset").get<double>();
    if (th.contains("collapse_width"))
      c.thresholds.collapse_width = th.at("collapse_width").get<double>();
  }
  return c;
}

double evaluate_addend(const std::string& name, double t) {
  if (name == "exp") return std::exp(t);
  throw std::invalid_argument("unknown smooth addend '" + name +
                              "' (known: exp)");
}

namespace {

void attach_critical_trend(ComparisonReport& report,
                           const std::vector<CascadeRealization>& reals) {
  const RunConfig& c = report.config;
  CriticalTrend trend;
  std::vector<int> levels = c.levels;
  std::sort(levels.begin(), levels.end());
  const std::size_t R = reals.size();
  const int m = c.m_list.front();
  for (int n : levels) {
    int s_eff = std::min(c.sub_depth, c.depth - n);
    std::vector<double> mins(R, kNan);
    parallel_for(R, thread_budget(), [&](std::size_t r) {
      mins[r] =
          min_coarse_exponent(collect_cylinders(reals[r], m, n, s_eff));
    });
    trend.levels.push_back(n);
    trend.min_exponent.push_back(finite_median(mins));
  }
  trend.decreasing = trend.min_exponent.size() >= 2;
  for (std::size_t i = 0; i + 1 < trend.min_exponent.size(); ++i) {
    if (!(trend.min_exponent[i + 1] < trend.min_exponent[i]))
      trend.decreasing = false;
  }
  report.critical = std::move(trend);
}

void attach_addend_check(ComparisonReport& report,
                         const std::vector<CascadeRealization>& reals) {
  const RunConfig& c = report.config;
  AddendCheck check;
  check.m = c.m_list.front();

  TauGPrediction pred = predicted_tau_G_root(c.model, check.m);
  check.q1_predicted = pred.q_m;
  if (pred.line_dominates)
    report.notes.push_back(
        "tau stays above the addend line through the scan range; the "
        "predicted kink is open-ended");

  QGridSpec grid{0.0, pred.q_m + 2.0, c.q_grid.step};
  check.q = grid.points();
  const std::size_t nq = check.q.size();

  std::vector<int> levels = c.levels;
  std::sort(levels.begin(), levels.end());
  const std::size_t R = reals.size();

  // roots[level][q] per replica, for the perturbed and the bare samples.
  std::vector<std::vector<std::vector<double>>> root_g(
      levels.size(), std::vector<std::vector<double>>(nq));
  auto root_f = root_g;
  for (std::size_t r = 0; r < R; ++r) {
    GridFunction fw = evaluate_grid(reals[r], Side::W, c.depth);
    GridFunction fl = evaluate_grid(reals[r], Side::L, c.depth);
    ComposedSamples bare = compose(fw, fl);
    ComposedSamples perturbed = bare;
    for (std::size_t i = 0; i < perturbed.x.size(); ++i)
      perturbed.y[i] += evaluate_addend(c.addend, perturbed.x[i]);
    for (std::size_t li = 0; li < levels.size(); ++li) {
      CylinderTable tf =
          sample_cylinders(bare, c.model.base, check.m, levels[li]);
      CylinderTable tg =
          sample_cylinders(perturbed, c.model.base, check.m, levels[li]);
      for (std::size_t j = 0; j < nq; ++j) {
        double rf = partition_root(tf, check.q[j]);
        double rg = partition_root(tg, check.q[j]);
        if (std::isfinite(rf)) root_f[li][j].push_back(rf);
        if (std::isfinite(rg)) root_g[li][j].push_back(rg);
      }
    }
  }

  // The perturbed roots approach their limit geometrically (the deficit is
  // driven by the subdominant of the two competing branches, a factor
  // b^{-gap} per level), so a 1/n fit overshoots badly. Aitken's delta
  // squared on the deepest consecutive triple removes the geometric tail;
  // flat or non-geometric tails fall back to the deepest root and a 1/n
  // fit, respectively.
  auto extrapolate_root = [](const std::vector<int>& ns,
                             const std::vector<double>& ts) -> double {
    const std::size_t k = ts.size();
    if (k == 0) return kNan;
    if (k == 1) return ts[0];
    if (std::abs(ts[k - 1] - ts[k - 2]) < 1e-9) return ts[k - 1];
    if (k >= 3 && ns[k - 1] - ns[k - 2] == ns[k - 2] - ns[k - 3]) {
      double d1 = ts[k - 2] - ts[k - 3];
      double d2 = ts[k - 1] - ts[k - 2];
      double denom = d1 - d2;
      if (d1 * d2 > 0.0 && std::abs(d2) < std::abs(d1) &&
          std::abs(denom) > 1e-12)
        return ts[k - 1] + d2 * d2 / denom;
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < k; ++i) {
      xs.push_back(1.0 / ns[i]);
      ys.push_back(ts[i]);
    }
    return ols_fit(xs, ys).intercept;
  };
  auto extrapolate = [&](const std::vector<std::vector<std::vector<double>>>&
                             roots) {
    std::vector<double> tau_hat(nq, kNan);
    for (std::size_t j = 0; j < nq; ++j) {
      std::vector<int> ns;
      std::vector<double> ts;
      for (std::size_t li = 0; li < levels.size(); ++li) {
        if (roots[li][j].empty()) continue;
        ns.push_back(levels[li]);
        ts.push_back(median(roots[li][j]));
      }
      tau_hat[j] = extrapolate_root(ns, ts);
    }
    return tau_hat;
  };
  check.estimated = extrapolate(root_g);
  std::vector<double> tau_bare = extrapolate(root_f);

  check.predicted.resize(nq);
  double sup = 0.0;
  for (std::size_t j = 0; j < nq; ++j) {
    check.predicted[j] = predicted_tau_G(c.model, check.m, check.q[j]);
    if (std::isfinite(check.estimated[j]))
      sup = std::max(sup, std::abs(check.estimated[j] - check.predicted[j]));
  }
  check.sup_gap = sup;

  // The kink is where the bare curve crosses the addend line q m - 1; the
  // estimate uses the measured bare exponents so it is independent of the
  // analytic values.
  std::vector<double> d(nq, kNan);
  for (std::size_t j = 0; j < nq; ++j)
    d[j] = tau_bare[j] - (check.q[j] * check.m - 1.0);
  check.q1_estimated = rightmost_crossing(check.q, d);

  report.addend_check = std::move(check);
}

}  // namespace

ComparisonReport run_scenario(const RunConfig& config) {
  check_config(config);

  ComparisonReport report;
  report.config = config;
  report.validation = validate(config.model);
  if (report.validation.rejected())
    throw std::runtime_error("model rejected by validation: " +
                             join_messages(report.validation.messages));

  const std::vector<double> qs = config.q_grid.points();
  report.analytic = analytic_curve(config.model, qs);

  std::vector<CascadeRealization> reals;
  reals.reserve(static_cast<std::size_t>(config.replicas));
  for (int r = 0; r < config.replicas; ++r)
    reals.emplace_back(config.model, config.depth,
                       rng::replica_seed(config.seed,
                                         static_cast<std::uint64_t>(r)));

  for (int m : config.m_list) {
    EmpiricalTauConfig ec;
    ec.m = m;
    ec.sub_depth = config.sub_depth;
    ec.levels = config.levels;
    ec.q_grid = qs;
    report.empirical.push_back(empirical_tau(reals, ec));
  }

  report.sup_gap_on_J = kNan;
  report.max_std_error = kNan;
  for (std::size_t mi = 0; mi < report.empirical.size(); ++mi) {
    const SpectrumCurve& emp = report.empirical[mi];
    std::size_t k = 0;  // cursor into the analytic curve (may drop points)
    for (std::size_t j = 0; j < emp.q.size(); ++j) {
      while (k < report.analytic.q.size() &&
             report.analytic.q[k] < emp.q[j] - 1e-12)
        ++k;
      if (k >= report.analytic.q.size() ||
          std::abs(report.analytic.q[k] - emp.q[j]) > 1e-12)
        continue;
      ComparisonRow row;
      row.m = config.m_list[mi];
      row.q = emp.q[j];
      row.analytic_tau = report.analytic.tau[k];
      row.empirical_tau = emp.tau[j];
      row.gap = std::abs(row.empirical_tau - row.analytic_tau);
      row.std_error = emp.std_error[j];
      row.in_J = report.analytic.in_J[k] != 0;
      report.rows.push_back(row);
      if (row.in_J && std::isfinite(row.gap)) {
        if (!(report.sup_gap_on_J >= row.gap)) {
          report.sup_gap_on_J = std::isfinite(report.sup_gap_on_J)
                                    ? std::max(report.sup_gap_on_J, row.gap)
                                    : row.gap;
        }
      }
      if (std::isfinite(row.std_error)) {
        report.max_std_error = std::isfinite(report.max_std_error)
                                   ? std::max(report.max_std_error,
                                              row.std_error)
                                   : row.std_error;
      }
    }
  }

  // Legendre transforms over an h grid spanning the slopes seen in J,
  // padded so the transform's corner behavior is visible.
  {
    double h_min = std::numeric_limits<double>::infinity();
    double h_max = -h_min;
    for (std::size_t i = 0; i < report.analytic.q.size(); ++i) {
      double tp = report.analytic.tau_prime[i];
      if (!report.analytic.in_J[i] || !std::isfinite(tp)) continue;
      h_min = std::min(h_min, tp);
      h_max = std::max(h_max, tp);
    }
    if (!std::isfinite(h_min)) {
      h_min = 0.0;
      h_max = 1.0;
    }
    std::vector<double> h_grid;
    const int points = 81;
    double lo = h_min - 0.1, hi = h_max + 0.1;
    for (int i = 0; i < points; ++i)
      h_grid.push_back(lo + (hi - lo) * i / (points - 1));
    report.legendre_analytic = legendre(report.analytic, h_grid);
    report.legendre_analytic_parametric = legendre_parametric(report.analytic);
    report.legendre_empirical = legendre(report.empirical.front(), h_grid);
  }

  switch (config.scenario) {
    case Scenario::Monofractal: {
      int level = std::min(10, config.depth - 2);
      int sub = std::min(2, config.depth - level);
      CylinderTable table =
          collect_cylinders(reals.front(), config.m_list.front(), level, sub);
      report.coarse = coarse_spectrum(table, config.thresholds.collapse_width);
      double spread =
          report.coarse->max_exponent - report.coarse->min_exponent;
      report.coarse_collapsed =
          std::isfinite(spread) && spread <= config.thresholds.collapse_width;
      report.notes.push_back("coarse exponents measured at level " +
                             std::to_string(level) + ", spread " +
                             fmt4(spread));
      break;
    }
    case Scenario::BellCritical:
      attach_critical_trend(report, reals);
      break;
    case Scenario::SmoothAddend:
      attach_addend_check(report, reals);
      break;
    default:
      break;
  }

  auto require = [&](bool ok, const std::string& what) {
    if (!ok) report.failures.push_back(what);
  };
  switch (config.scenario) {
    case Scenario::LeftSided:
      require(report.validation.left_sided,
              "model validation did not flag a left-sided spectrum");
      [[fallthrough]];
    case Scenario::Bell:
    case Scenario::Custom:
      require(std::isfinite(report.sup_gap_on_J) &&
                  report.sup_gap_on_J <= config.thresholds.tau_gap,
              "sup gap on J " + fmt4(report.sup_gap_on_J) + " exceeds " +
                  fmt4(config.thresholds.tau_gap));
      break;
    case Scenario::Monofractal:
      require(std::isfinite(report.sup_gap_on_J) &&
                  report.sup_gap_on_J <= config.thresholds.tau_gap,
              "sup gap on J " + fmt4(report.sup_gap_on_J) + " exceeds " +
                  fmt4(config.thresholds.tau_gap));
      require(report.coarse_collapsed,
              "coarse exponents did not collapse to one bin");
      break;
    case Scenario::BellCritical:
      require(report.critical && report.critical->decreasing,
              "minimum cylinder exponent is not strictly decreasing "
              "across levels");
      break;
    case Scenario::SmoothAddend: {
      require(std::isfinite(report.sup_gap_on_J) &&
                  report.sup_gap_on_J <= config.thresholds.tau_gap,
              "sup gap on J " + fmt4(report.sup_gap_on_J) + " exceeds " +
                  fmt4(config.thresholds.tau_gap));
      const AddendCheck& ac = *report.addend_check;
      require(ac.sup_gap <= config.thresholds.addend_gap,
              "addend prediction gap " + fmt4(ac.sup_gap) + " exceeds " +
                  fmt4(config.thresholds.addend_gap));
      require(std::abs(ac.q1_estimated - ac.q1_predicted) <=
                  config.thresholds.kink_offset,
              "kink estimate " + fmt4(ac.q1_estimated) + " is more than " +
                  fmt4(config.thresholds.kink_offset) + " from " +
                  fmt4(ac.q1_predicted));
      break;
    }
  }
  report.passed = report.failures.empty();
  report.complete = true;
  return report;
}

namespace {

nlohmann::ordered_json curve_to_json(const SpectrumCurve& curve) {
  nlohmann::ordered_json j;
  j["source"] =
      curve.source == CurveSource::Analytic ? "analytic" : "empirical";
  j["q"] = curve.q;
  j["tau"] = curve.tau;
  j["tau_prime"] = curve.tau_prime;
  if (!curve.std_error.empty()) j["std_error"] = curve.std_error;
  std::vector<int> inj(curve.in_J.begin(), curve.in_J.end());
  j["in_J"] = inj;
  if (curve.interval) {
    nlohmann::ordered_json ji;
    ji["q_lo"] = curve.interval->q_lo;
    ji["q_hi"] = curve.interval->q_hi;
    ji["lo_unbounded"] = curve.interval->lo_unbounded;
    ji["hi_unbounded"] = curve.interval->hi_unbounded;
    ji["lo_domain_limited"] = curve.interval->lo_domain_limited;
    ji["h_lo"] = curve.interval->h_lo;
    ji["h_hi"] = curve.interval->h_hi;
    j["interval_J"] = ji;
  }
  if (!curve.notes.empty()) j["notes"] = curve.notes;
  return j;
}

nlohmann::ordered_json legendre_to_json(const LegendrePair& pair) {
  nlohmann::ordered_json j;
  j["h"] = pair.h;
  j["tau_star"] = pair.tau_star;
  return j;
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

}  // namespace

nlohmann::ordered_json validation_to_json(const ValidationReport& v) {
  nlohmann::ordered_json j;
  j["regime"] = to_string(v.regime);
  nlohmann::ordered_json checks;
  for (const auto& [p, value] : v.phi_checks) checks[fmt4(p)] = value;
  j["phi_checks"] = checks;
  j["has_p_gt1_positive"] = v.has_p_gt1_positive;
  if (v.has_p_gt1_positive) j["witness_p"] = v.witness_p;
  j["critical_condition"] = v.critical_condition;
  if (v.critical_condition) j["gamma_witness"] = v.gamma_witness;
  if (v.monofractal_exponent)
    j["monofractal_exponent"] = *v.monofractal_exponent;
  j["left_sided"] = v.left_sided;
  j["two_nonzero"] = v.two_nonzero;
  if (v.sum_not_one_positive)
    j["sum_not_one_positive"] = *v.sum_not_one_positive;
  j["messages"] = v.messages;
  return j;
}

nlohmann::ordered_json report_to_json(const ComparisonReport& report) {
  nlohmann::ordered_json j;
  j["tool"] = "cascademf";
  j["version"] = kVersion;
  {
    nlohmann::ordered_json prov = config_to_json(report.config);
    prov["merge"] = "deterministic (independent of worker count)";
    j["provenance"] = prov;
  }
  j["validation"] = validation_to_json(report.validation);
  j["analytic"] = curve_to_json(report.analytic);
  nlohmann::ordered_json emp = nlohmann::ordered_json::array();
  for (std::size_t mi = 0; mi < report.empirical.size(); ++mi) {
    nlohmann::ordered_json e = curve_to_json(report.empirical[mi]);
    e["m"] = report.config.m_list[mi];
    emp.push_back(e);
  }
  j["empirical"] = emp;
  {
    nlohmann::ordered_json cmp;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const ComparisonRow& row : report.rows) {
      nlohmann::ordered_json r;
      r["m"] = row.m;
      r["q"] = row.q;
      r["analytic"] = row.analytic_tau;
      r["empirical"] = row.empirical_tau;
      r["gap"] = row.gap;
      r["std_error"] = row.std_error;
      r["in_J"] = row.in_J;
      rows.push_back(r);
    }
    cmp["rows"] = rows;
    cmp["sup_gap_on_J"] = report.sup_gap_on_J;
    cmp["max_std_error"] = report.max_std_error;
    j["comparison"] = cmp;
  }
  {
    nlohmann::ordered_json leg;
    leg["analytic"] = legendre_to_json(report.legendre_analytic);
    leg["analytic_parametric"] =
        legendre_to_json(report.legendre_analytic_parametric);
    leg["empirical"] = legendre_to_json(report.legendre_empirical);
    j["legendre"] = leg;
  }
  if (report.coarse) {
    nlohmann::ordered_json c;
    c["level"] = report.coarse->level;
    c["m"] = report.coarse->m;
    c["bin_width"] = report.coarse->bin_width;
    c["min_exponent"] = report.coarse->min_exponent;
    c["max_exponent"] = report.coarse->max_exponent;
    c["zero_cells"] = report.coarse->zero_cells;
    nlohmann::ordered_json bins = nlohmann::ordered_json::array();
    for (const CoarseBin& b : report.coarse->bins) {
      nlohmann::ordered_json bj;
      bj["h_lo"] = b.h_lo;
      bj["h_hi"] = b.h_hi;
      bj["count"] = b.count;
      bj["d_hat"] = b.d_hat;
      bins.push_back(bj);
    }
    c["bins"] = bins;
    c["collapsed"] = report.coarse_collapsed;
    j["coarse"] = c;
  }
  if (report.critical) {
    nlohmann::ordered_json t;
    t["levels"] = report.critical->levels;
    t["min_exponent"] = report.critical->min_exponent;
    t["decreasing"] = report.critical->decreasing;
    j["critical_trend"] = t;
  }
  if (report.addend_check) {
    nlohmann::ordered_json a;
    a["m"] = report.addend_check->m;
    a["q1_predicted"] = report.addend_check->q1_predicted;
    a["q1_estimated"] = report.addend_check->q1_estimated;
    a["sup_gap"] = report.addend_check->sup_gap;
    a["q"] = report.addend_check->q;
    a["predicted"] = report.addend_check->predicted;
    a["estimated"] = report.addend_check->estimated;
    j["addend_check"] = a;
  }
  {
    nlohmann::ordered_json r;
    r["complete"] = report.complete;
    r["passed"] = report.passed;
    r["failures"] = report.failures;
    r["notes"] = report.notes;
    j["result"] = r;
  }
  return j;
}

std::string emit_plot_data(const ComparisonReport& report,
                           const std::string& directory) {
  const std::string config_dump = config_to_json(report.config).dump();
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(fnv1a(config_dump)));
  const std::string run_name = to_string(report.config.scenario) + "-" +
                               std::to_string(report.config.seed) + "-" +
                               std::string(hash).substr(0, 8);
  fs::path run_dir = fs::path(directory) / run_name;
  fs::create_directories(run_dir);

  nlohmann::ordered_json manifest;
  manifest["run"] = run_name;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  auto add_entry = [&](const std::string& file, const std::string& role,
                       const std::vector<std::string>& axes) {
    nlohmann::ordered_json e;
    e["file"] = file;
    e["role"] = role;
    e["axes"] = axes;
    files.push_back(e);
  };

  write_file(run_dir / "report.json", report_to_json(report).dump(2) + "\n");
  add_entry("report.json", "full comparison report", {});

  {
    std::string csv = "q,tau,tau_prime,in_J\n";
    const SpectrumCurve& a = report.analytic;
    for (std::size_t i = 0; i < a.q.size(); ++i)
      csv += fmt(a.q[i]) + "," + fmt(a.tau[i]) + "," + fmt(a.tau_prime[i]) +
             "," + std::to_string(static_cast<int>(a.in_J[i])) + "\n";
    write_file(run_dir / "tau_analytic.csv", csv);
    add_entry("tau_analytic.csv", "analytic scaling exponents",
              {"q", "tau", "tau_prime", "in_J"});
  }
  for (std::size_t mi = 0; mi < report.empirical.size(); ++mi) {
    const SpectrumCurve& e = report.empirical[mi];
    std::string name =
        "tau_empirical_m" + std::to_string(report.config.m_list[mi]) + ".csv";
    std::string csv = "q,t_hat,stderr,n_levels\n";
    for (std::size_t i = 0; i < e.q.size(); ++i)
      csv += fmt(e.q[i]) + "," + fmt(e.tau[i]) + "," + fmt(e.std_error[i]) +
             "," + std::to_string(report.config.levels.size()) + "\n";
    write_file(run_dir / name, csv);
    add_entry(name,
              "empirical scaling exponents (order " +
                  std::to_string(report.config.m_list[mi]) + ")",
              {"q", "t_hat", "stderr", "n_levels"});
  }
  auto write_legendre = [&](const LegendrePair& pair, const std::string& name,
                            const std::string& role) {
    std::string csv = "h,tau_star\n";
    for (std::size_t i = 0; i < pair.h.size(); ++i)
      csv += fmt(pair.h[i]) + "," + fmt(pair.tau_star[i]) + "\n";
    write_file(run_dir / name, csv);
    add_entry(name, role, {"h", "tau_star"});
  };
  write_legendre(report.legendre_analytic, "legendre_analytic.csv",
                 "Legendre transform of the analytic curve");
  write_legendre(report.legendre_analytic_parametric,
                 "legendre_analytic_parametric.csv",
                 "parametric Legendre transform (slope form)");
  write_legendre(report.legendre_empirical, "legendre_empirical.csv",
                 "Legendre transform of the empirical curve");

  if (report.coarse) {
    std::string csv = "h,D_hat,count\n";
    for (const CoarseBin& b : report.coarse->bins)
      csv += fmt(0.5 * (b.h_lo + b.h_hi)) + "," + fmt(b.d_hat) + "," +
             std::to_string(b.count) + "\n";
    write_file(run_dir / "coarse_spectrum.csv", csv);
    add_entry("coarse_spectrum.csv", "coarse exponent histogram",
              {"h", "D_hat", "count"});
  }
  if (report.critical) {
    std::string csv = "level,min_exponent\n";
    for (std::size_t i = 0; i < report.critical->levels.size(); ++i)
      csv += std::to_string(report.critical->levels[i]) + "," +
             fmt(report.critical->min_exponent[i]) + "\n";
    write_file(run_dir / "critical_trend.csv", csv);
    add_entry("critical_trend.csv", "minimum cylinder exponent per level",
              {"level", "min_exponent"});
  }
  if (report.addend_check) {
    std::string csv = "q,predicted,estimated\n";
    const AddendCheck& a = *report.addend_check;
    for (std::size_t i = 0; i < a.q.size(); ++i)
      csv += fmt(a.q[i]) + "," + fmt(a.predicted[i]) + "," +
             fmt(a.estimated[i]) + "\n";
    write_file(run_dir / "addend_check.csv", csv);
    add_entry("addend_check.csv",
              "scaling exponents of the cascade plus smooth addend",
              {"q", "predicted", "estimated"});
  }

  manifest["files"] = files;
  write_file(run_dir / "manifest.json", manifest.dump(2) + "\n");
  return run_dir.string();
}

}  // namespace cascademf
