#include "cascademf/empirical_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace cascademf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::int64_t checked_cells(int base, int levels) {
  std::int64_t n = 1;
  for (int k = 0; k < levels; ++k) {
    if (n > kDefaultNodeBudget / base)
      throw std::length_error("cylinder enumeration exceeds the node budget");
    n *= base;
  }
  return n;
}

// Shared state of the cylinder sweep. The outer walk runs to `level`,
// pruning subtrees under a zero weight coordinate; at each live cell the
// inner walk scores the depth-`sub` approximant below it.
struct CylinderSweep {
  const CascadeRealization& real;
  int base;
  int m;
  int level;
  int sub;
  CylinderTable& out;

  NodeAddress addr;
  std::vector<std::vector<complexd>> w_scratch;
  std::vector<std::vector<double>> l_scratch;
  std::vector<complexd> increments;
  std::vector<complexd> grid;

  void leaf(double log_qw, double log_ql) {
    increments.clear();
    KahanSum l_mass;
    inner(0, complexd(1.0, 0.0), 1.0, l_mass);
    grid.clear();
    grid.push_back(complexd(0.0, 0.0));
    KahanSumComplex prefix;
    for (const complexd& inc : increments) {
      prefix.add(inc);
      grid.push_back(prefix.value());
    }
    double z = osc_values(grid, m);
    if (z <= 0.0) {
      ++out.zero_cells;
      return;
    }
    out.log_osc.push_back(log_qw + std::log(z));
    out.log_len.push_back(log_ql + std::log(l_mass.value()));
  }

  void inner(int d, complexd wprod, double lprod, KahanSum& l_mass) {
    if (d == sub) {
      increments.push_back(wprod);
      l_mass.add(lprod);
      return;
    }
    auto& w = w_scratch[level + d];
    auto& l = l_scratch[level + d];
    real.node_draw(addr, w, l);
    for (int i = 0; i < base; ++i) {
      addr.digits.push_back(static_cast<std::uint8_t>(i));
      inner(d + 1, wprod * w[i], lprod * l[i], l_mass);
      addr.digits.pop_back();
    }
  }

  void outer(int d, double log_qw, double log_ql) {
    if (d == level) {
      leaf(log_qw, log_ql);
      return;
    }
    auto& w = w_scratch[d];
    auto& l = l_scratch[d];
    real.node_draw(addr, w, l);
    for (int i = 0; i < base; ++i) {
      double mag = std::abs(w[i]);
      if (mag == 0.0) {
        std::size_t pruned = 1;
        for (int k = d + 1; k < level; ++k) pruned *= base;
        out.zero_cells += pruned;
        continue;
      }
      addr.digits.push_back(static_cast<std::uint8_t>(i));
      outer(d + 1, log_qw + std::log(mag), log_ql + std::log(l[i]));
      addr.digits.pop_back();
    }
  }
};

}  // namespace

CylinderTable collect_cylinders(const CascadeRealization& real, int m,
                                int level, int sub_depth) {
  if (m < 1) throw std::invalid_argument("oscillation order must be >= 1");
  if (level < 0 || sub_depth < 0)
    throw std::invalid_argument("level and sub_depth must be >= 0");
  const int base = real.model().base;
  std::int64_t cells = checked_cells(base, level + sub_depth);
  std::int64_t sub_points = 1;
  for (int k = 0; k < sub_depth; ++k) sub_points *= base;
  if (sub_points + 1 <= m)
    throw std::invalid_argument(
        "sub_depth leaves too few grid points for this oscillation order");

  CylinderTable out;
  out.m = m;
  out.level = level;
  out.sub_depth = sub_depth;
  out.total_cells = static_cast<std::size_t>(cells / sub_points);
  out.log_osc.reserve(out.total_cells);
  out.log_len.reserve(out.total_cells);

  CylinderSweep sweep{real,
                      base,
                      m,
                      level,
                      sub_depth,
                      out,
                      {},
                      std::vector<std::vector<complexd>>(level + sub_depth),
                      std::vector<std::vector<double>>(level + sub_depth),
                      {},
                      {}};
  sweep.increments.reserve(static_cast<std::size_t>(sub_points));
  sweep.grid.reserve(static_cast<std::size_t>(sub_points) + 1);
  sweep.outer(0, 0.0, 0.0);
  return out;
}

CylinderTable sample_cylinders(const ComposedSamples& samples, int base,
                               int m, int level) {
  if (m < 1) throw std::invalid_argument("oscillation order must be >= 1");
  if (level < 0) throw std::invalid_argument("level must be >= 0");
  const std::size_t segments = samples.x.size() - 1;
  std::size_t cells = 1;
  for (int k = 0; k < level; ++k) cells *= static_cast<std::size_t>(base);
  if (samples.x.size() < 2 || segments % cells != 0)
    throw std::invalid_argument(
        "sample count does not align with the requested level");
  const std::size_t stride = segments / cells;
  if (stride + 1 <= static_cast<std::size_t>(m))
    throw std::invalid_argument(
        "cells hold too few samples for this oscillation order");

  CylinderTable out;
  out.m = m;
  out.level = level;
  out.sub_depth = 0;
  out.total_cells = cells;
  std::span<const complexd> y(samples.y);
  for (std::size_t w = 0; w < cells; ++w) {
    double o = osc_values(y.subspan(w * stride, stride + 1), m);
    double len = samples.x[(w + 1) * stride] - samples.x[w * stride];
    if (o <= 0.0 || len <= 0.0) {
      ++out.zero_cells;
      continue;
    }
    out.log_osc.push_back(std::log(o));
    out.log_len.push_back(std::log(len));
  }
  return out;
}

double log_partition_theta(const CylinderTable& table, double q, double t) {
  if (table.log_osc.empty()) return -kInf;
  double peak = -kInf;
  for (std::size_t k = 0; k < table.log_osc.size(); ++k)
    peak = std::max(peak, q * table.log_osc[k] - t * table.log_len[k]);
  if (peak > 600.0 || peak < -600.0) {
    KahanSum acc;
    for (std::size_t k = 0; k < table.log_osc.size(); ++k)
      acc.add(std::exp(q * table.log_osc[k] - t * table.log_len[k] - peak));
    return peak + std::log(acc.value());
  }
  KahanSum acc;
  for (std::size_t k = 0; k < table.log_osc.size(); ++k)
    acc.add(std::exp(q * table.log_osc[k] - t * table.log_len[k]));
  return std::log(acc.value());
}

double partition_root(const CylinderTable& table, double q) {
  if (table.log_osc.empty()) return kNan;
  auto f = [&](double t) { return log_partition_theta(table, q, t); };
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 64 && f(lo) > 0.0; ++i) lo *= 2.0;
  for (int i = 0; i < 64 && f(hi) < 0.0; ++i) hi *= 2.0;
  return bisect_increasing(f, lo, hi, 200, 1e-13);
}

SpectrumCurve empirical_tau(const std::vector<CascadeRealization>& reals,
                            const EmpiricalTauConfig& config) {
  if (reals.empty())
    throw std::invalid_argument("empirical_tau needs at least one realization");
  if (config.levels.empty() || config.q_grid.empty())
    throw std::invalid_argument("empirical_tau needs levels and a q grid");

  std::vector<int> levels = config.levels;
  std::sort(levels.begin(), levels.end());
  const int depth = reals[0].depth();
  const std::size_t R = reals.size();
  const std::size_t nq = config.q_grid.size();

  SpectrumCurve curve;
  curve.source = CurveSource::Empirical;

  // t_med[l][j]: median over realizations of the level-l root at q_grid[j].
  std::vector<std::vector<double>> t_med(levels.size(),
                                         std::vector<double>(nq, kNan));
  for (std::size_t li = 0; li < levels.size(); ++li) {
    int n = levels[li];
    if (n < 1 || n > depth) {
      curve.notes.push_back("level " + std::to_string(n) +
                            " outside the realization depth; skipped");
      continue;
    }
    int s_eff = std::min(config.sub_depth, depth - n);
    // Replica work is independent; the merge below walks replica indices
    // in order, so the result is the same for any worker count.
    std::vector<std::vector<double>> root_mat(R, std::vector<double>(nq));
    std::vector<std::size_t> dead(R, 0);
    parallel_for(R, thread_budget(), [&](std::size_t r) {
      CylinderTable table = collect_cylinders(reals[r], config.m, n, s_eff);
      dead[r] = table.zero_cells;
      for (std::size_t j = 0; j < nq; ++j)
        root_mat[r][j] = partition_root(table, config.q_grid[j]);
    });
    std::size_t total_dead = 0;
    for (std::size_t r = 0; r < R; ++r) total_dead += dead[r];
    if (total_dead > 0)
      curve.notes.push_back("level " + std::to_string(n) + ": " +
                            std::to_string(total_dead) +
                            " dead cells dropped across replicas");
    std::vector<std::vector<double>> roots(nq);
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t j = 0; j < nq; ++j)
        if (std::isfinite(root_mat[r][j])) roots[j].push_back(root_mat[r][j]);
    for (std::size_t j = 0; j < nq; ++j) {
      if (2 * roots[j].size() >= R && !roots[j].empty()) {
        t_med[li][j] = median(roots[j]);
      } else {
        curve.notes.push_back(
            "level " + std::to_string(n) + " skipped at q = " +
            std::to_string(config.q_grid[j]) + " (" +
            std::to_string(roots[j].size()) + " of " + std::to_string(R) +
            " roots)");
      }
    }
  }

  for (std::size_t j = 0; j < nq; ++j) {
    std::vector<double> xs, ys;
    for (std::size_t li = 0; li < levels.size(); ++li) {
      if (!std::isfinite(t_med[li][j])) continue;
      xs.push_back(1.0 / levels[li]);
      ys.push_back(t_med[li][j]);
    }
    curve.q.push_back(config.q_grid[j]);
    if (xs.size() >= 2) {
      OlsFit fit = ols_fit(xs, ys);
      curve.tau.push_back(fit.intercept);
      curve.std_error.push_back(fit.se_intercept);
    } else {
      curve.tau.push_back(kNan);
      curve.std_error.push_back(kNan);
      curve.notes.push_back("q = " + std::to_string(config.q_grid[j]) +
                            ": fewer than two usable levels, no extrapolation");
    }
  }

  curve.tau_prime.assign(nq, kNan);
  for (std::size_t j = 0; j < nq; ++j) {
    std::size_t a = j > 0 ? j - 1 : j;
    std::size_t b = j + 1 < nq ? j + 1 : j;
    if (a == b) continue;
    curve.tau_prime[j] =
        (curve.tau[b] - curve.tau[a]) / (curve.q[b] - curve.q[a]);
  }
  curve.in_J.assign(nq, 0);
  for (std::size_t j = 0; j < nq; ++j) {
    double g = curve.q[j] * curve.tau_prime[j] - curve.tau[j];
    if (std::isfinite(g) && g >= 0.0) curve.in_J[j] = 1;
  }
  return curve;
}

CoarseSpectrum coarse_spectrum(const CylinderTable& table, double bin_width) {
  if (bin_width <= 0.0)
    throw std::invalid_argument("bin width must be positive");
  CoarseSpectrum spec;
  spec.level = table.level;
  spec.m = table.m;
  spec.bin_width = bin_width;
  spec.zero_cells = table.zero_cells;
  spec.min_exponent = kNan;
  spec.max_exponent = kNan;
  if (table.log_osc.empty()) return spec;

  struct Tally {
    std::size_t count = 0;
    KahanSum log_len;
  };
  std::map<long long, Tally> tallies;
  double lo = kInf, hi = -kInf;
  for (std::size_t k = 0; k < table.log_osc.size(); ++k) {
    double e = table.log_osc[k] / table.log_len[k];
    lo = std::min(lo, e);
    hi = std::max(hi, e);
    Tally& t = tallies[static_cast<long long>(std::floor(e / bin_width))];
    ++t.count;
    t.log_len.add(table.log_len[k]);
  }
  spec.min_exponent = lo;
  spec.max_exponent = hi;
  for (const auto& [idx, tally] : tallies) {
    CoarseBin bin;
    bin.h_lo = static_cast<double>(idx) * bin_width;
    bin.h_hi = bin.h_lo + bin_width;
    bin.count = tally.count;
    double mean_len = tally.log_len.value() / static_cast<double>(tally.count);
    bin.d_hat = std::log(static_cast<double>(tally.count)) / -mean_len;
    spec.bins.push_back(bin);
  }
  return spec;
}

double min_coarse_exponent(const CylinderTable& table) {
  double lo = kInf;
  for (std::size_t k = 0; k < table.log_osc.size(); ++k)
    lo = std::min(lo, table.log_osc[k] / table.log_len[k]);
  return table.log_osc.empty() ? kNan : lo;
}

namespace {

// Post-order sweep for the q-weighted measure. subtree_sum(node) is the
// partition sum truncated at outer level + trunc; cells at `level` and
// their parents are scored with the same recursion, one truncation stage
// apart, which is what makes the parent identity exact.
struct MuSweep {
  const CascadeRealization& real;
  int base;
  double q;
  double tau_q;
  int level;
  int trunc;

  NodeAddress addr;
  std::vector<std::vector<complexd>> w_scratch;
  std::vector<std::vector<double>> l_scratch;
  std::vector<double> leaf_logwt;    // digit order, one per level cell
  std::vector<double> parent_logwt;  // digit order, one per level-1 cell

  double walk(int d, double log_qw, double log_ql) {
    if (d == level + trunc) return 1.0;
    auto& w = w_scratch[d];
    auto& l = l_scratch[d];
    real.node_draw(addr, w, l);
    KahanSum sum;
    for (int i = 0; i < base; ++i) {
      double mag = std::abs(w[i]);
      if (mag == 0.0) {
        if (d + 1 <= level) record_dead(d + 1);
        continue;
      }
      addr.digits.push_back(static_cast<std::uint8_t>(i));
      double s = walk(d + 1, log_qw + std::log(mag), log_ql + std::log(l[i]));
      addr.digits.pop_back();
      sum.add(std::pow(mag, q) * std::pow(l[i], -tau_q) * s);
    }
    double total = sum.value();
    if (d == level)
      leaf_logwt.push_back(score(log_qw, log_ql, total));
    else if (d == level - 1)
      parent_logwt.push_back(score(log_qw, log_ql, total));
    return total;
  }

  double score(double log_qw, double log_ql, double subtree) const {
    if (subtree <= 0.0) return -kInf;
    return q * log_qw - tau_q * log_ql + std::log(subtree);
  }

  // A zero weight kills every cell below it; they still occupy slots in
  // digit order so the support stays aligned with addresses.
  void record_dead(int d) {
    if (d == level) {
      leaf_logwt.push_back(-kInf);
      return;
    }
    if (d == level - 1) parent_logwt.push_back(-kInf);
    for (int i = 0; i < base; ++i) record_dead(d + 1);
  }
};

NodeAddress address_of_index(std::size_t index, int base, int level) {
  NodeAddress addr;
  addr.digits.resize(level);
  for (int d = level - 1; d >= 0; --d) {
    addr.digits[d] = static_cast<std::uint8_t>(index % base);
    index /= static_cast<std::size_t>(base);
  }
  return addr;
}

}  // namespace

MuSample sample_mu_q(const CascadeRealization& real, const IntervalJ& J,
                     double q, double tau_q, int level, int trunc_depth,
                     int draws, std::uint64_t seed) {
  if (!J.contains(q))
    throw std::domain_error(
        "q is outside the interior of J; the weighted cell measure "
        "degenerates there");
  if (level < 1) throw std::invalid_argument("level must be >= 1");
  if (trunc_depth < 0 || draws < 0)
    throw std::invalid_argument("trunc_depth and draws must be >= 0");
  const int base = real.model().base;
  checked_cells(base, level + trunc_depth);

  MuSample out;
  out.q = q;
  out.tau_q = tau_q;
  out.level = level;
  out.trunc_depth = trunc_depth;

  MuSweep sweep{real,
                base,
                q,
                tau_q,
                level,
                trunc_depth,
                {},
                std::vector<std::vector<complexd>>(level + trunc_depth),
                std::vector<std::vector<double>>(level + trunc_depth),
                {},
                {}};
  sweep.walk(0, 0.0, 0.0);

  const std::size_t cells = sweep.leaf_logwt.size();
  double peak = -kInf;
  for (double lw : sweep.leaf_logwt) peak = std::max(peak, lw);
  if (!std::isfinite(peak))
    throw std::runtime_error("every cell of the realization is dead");

  KahanSum total;
  std::vector<double> wt(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    wt[k] = std::exp(sweep.leaf_logwt[k] - peak);
    total.add(wt[k]);
  }
  out.log_norm = peak + std::log(total.value());

  out.support.resize(cells);
  for (std::size_t k = 0; k < cells; ++k) {
    out.support[k].address = address_of_index(k, base, level);
    out.support[k].weight = wt[k] / total.value();
  }

  // Parent consistency: with the shared truncation horizon the parent
  // weight equals the sum over its children exactly, so any residual is
  // floating point noise.
  double worst = 0.0;
  for (std::size_t p = 0; p < sweep.parent_logwt.size(); ++p) {
    double parent = std::exp(sweep.parent_logwt[p] - peak) / total.value();
    KahanSum kids;
    for (int i = 0; i < base; ++i)
      kids.add(out.support[p * base + i].weight);
    double scale = std::max(parent, 1.0 / static_cast<double>(cells));
    worst = std::max(worst, std::abs(parent - kids.value()) / scale);
  }
  out.max_parent_residual = worst;

  std::vector<double> cdf(cells);
  KahanSum run;
  for (std::size_t k = 0; k < cells; ++k) {
    run.add(out.support[k].weight);
    cdf[k] = run.value();
  }
  cdf.back() = 1.0;
  rng::Stream stream(rng::master_key(seed));
  out.draws.reserve(static_cast<std::size_t>(draws));
  for (int j = 0; j < draws; ++j) {
    double u = stream.unit();
    std::size_t idx = static_cast<std::size_t>(
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (idx >= cells) idx = cells - 1;
    out.draws.push_back(out.support[idx].address);
  }
  return out;
}

double log_ball_partition(const ComposedSamples& samples, int m, double q,
                          double t, double radius) {
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  if (samples.x.size() < 2)
    throw std::invalid_argument("need at least two samples");
  const double left = samples.x.front();
  const double right = samples.x.back();
  std::vector<double> terms;
  for (double c = left + radius; c + radius <= right + 1e-15;
       c += 2.0 * radius) {
    OscQuery query;
    query.m = m;
    query.a = c - radius;
    query.b = std::min(c + radius, right);
    double o = osc(samples.x, samples.y, query);
    if (o > 0.0)
      terms.push_back(q * std::log(o) - t * std::log(2.0 * radius));
  }
  if (terms.empty()) return -kInf;
  return log_sum_exp(terms);
}

}  // namespace cascademf
