#include "cascademf/oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cascademf {

namespace {

constexpr std::size_t kBruteDiameterLimit = 64;
constexpr std::size_t kExhaustivePointLimit = 1u << 12;

double cross(complexd u, complexd v) {
  return u.real() * v.imag() - u.imag() * v.real();
}

// Andrew monotone chain, strict turns only (collinear points dropped), so
// the result is strictly convex and calipers can walk antipodal pairs.
std::vector<complexd> convex_hull(std::vector<complexd> pts) {
  std::sort(pts.begin(), pts.end(), [](complexd a, complexd b) {
    return a.real() < b.real() ||
           (a.real() == b.real() && a.imag() < b.imag());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<complexd> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (k >= 2 &&
           cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {  // upper chain
    while (k >= lower &&
           cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double hull_diameter(const std::vector<complexd>& hull) {
  const std::size_t n = hull.size();
  if (n <= 1) return 0.0;
  if (n == 2) return std::abs(hull[1] - hull[0]);
  double best = 0.0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t i2 = (i + 1) % n;
    for (;;) {
      std::size_t j2 = (j + 1) % n;
      if (cross(hull[i2] - hull[i], hull[j2] - hull[j]) > 0.0) {
        j = j2;
      } else {
        break;
      }
    }
    best = std::max({best, std::abs(hull[i] - hull[j]),
                     std::abs(hull[i2] - hull[j])});
  }
  return best;
}

double diameter(std::span<const complexd> values) {
  const std::size_t n = values.size();
  if (n <= 1) return 0.0;
  if (n <= kBruteDiameterLimit) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        best = std::max(best, std::abs(values[i] - values[j]));
    return best;
  }
  return hull_diameter(convex_hull({values.begin(), values.end()}));
}

// Sup over translates of |m-fold difference with integer lag `step`|.
double max_abs_iterated_diff(std::span<const complexd> values, int m,
                             std::size_t step) {
  std::vector<complexd> d(values.begin(), values.end());
  std::size_t len = d.size();
  for (int r = 0; r < m; ++r) {
    if (len <= step) return 0.0;
    len -= step;
    for (std::size_t i = 0; i < len; ++i) d[i] = d[i + step] - d[i];
  }
  double best = 0.0;
  for (std::size_t i = 0; i < len; ++i) best = std::max(best, std::abs(d[i]));
  return best;
}

std::vector<std::size_t> geometric_lags(std::size_t max_lag) {
  std::vector<std::size_t> lags;
  for (std::size_t h = max_lag; h >= 1; h /= 2) {
    lags.push_back(h);
    if (h == 1) break;
  }
  return lags;
}

complexd interpolate(std::span<const double> x, std::span<const complexd> y,
                     double t) {
  if (t <= x.front()) return y.front();
  if (t >= x.back()) return y.back();
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - x.begin());
  std::size_t lo = hi - 1;
  double span = x[hi] - x[lo];
  double w = (span > 0.0) ? (t - x[lo]) / span : 0.0;
  return y[lo] + w * (y[hi] - y[lo]);
}

}  // namespace

std::vector<complexd> finite_difference(std::span<const complexd> values,
                                        int m, int step) {
  if (m < 1 || step < 1)
    throw std::invalid_argument("finite_difference: m and step must be >= 1");
  if (values.size() <= static_cast<std::size_t>(m) * step)
    throw std::invalid_argument(
        "finite_difference: sample too short for requested order and lag");
  std::vector<complexd> d(values.begin(), values.end());
  std::size_t len = d.size();
  for (int r = 0; r < m; ++r) {
    len -= step;
    for (std::size_t i = 0; i < len; ++i) d[i] = d[i + step] - d[i];
  }
  d.resize(len);
  return d;
}

double osc_values(std::span<const complexd> values, int m, LagPolicy policy) {
  if (m < 1) throw std::invalid_argument("osc_values: order must be >= 1");
  if (values.size() < 2) return 0.0;
  if (m == 1) return diameter(values);

  std::size_t max_lag = (values.size() - 1) / static_cast<std::size_t>(m);
  if (max_lag == 0) return 0.0;
  if (policy == LagPolicy::Auto)
    policy = values.size() <= kExhaustivePointLimit ? LagPolicy::Exhaustive
                                                    : LagPolicy::Geometric;
  double best = 0.0;
  if (policy == LagPolicy::Exhaustive) {
    for (std::size_t h = 1; h <= max_lag; ++h)
      best = std::max(best, max_abs_iterated_diff(values, m, h));
  } else {
    for (std::size_t h : geometric_lags(max_lag))
      best = std::max(best, max_abs_iterated_diff(values, m, h));
  }
  return best;
}

double osc(std::span<const double> x, std::span<const complexd> y,
           const OscQuery& query) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("osc: need matching samples");
  if (!(query.a < query.b)) throw std::invalid_argument("osc: empty interval");
  const double tol = 1e-12 * (x.back() - x.front());
  if (query.a < x.front() - tol || query.b > x.back() + tol)
    throw std::out_of_range("osc: interval outside the sampled range");

  auto lo_it = std::lower_bound(x.begin(), x.end(), query.a - tol);
  auto hi_it = std::upper_bound(x.begin(), x.end(), query.b + tol);
  std::size_t lo = static_cast<std::size_t>(lo_it - x.begin());
  std::size_t hi = static_cast<std::size_t>(hi_it - x.begin());
  if (hi - lo < 2) return 0.0;
  std::span<const double> xs = x.subspan(lo, hi - lo);
  std::span<const complexd> ys = y.subspan(lo, hi - lo);

  if (query.m == 1) return diameter(ys);

  // Uniform spacing lets the supremum run over integer lags directly.
  double spacing = (xs.back() - xs.front()) / (xs.size() - 1);
  bool uniform = true;
  for (std::size_t i = 1; i < xs.size() && uniform; ++i)
    if (std::abs(xs[i] - xs[i - 1] - spacing) > 1e-9 * spacing)
      uniform = false;
  if (uniform) return osc_values(ys, query.m, query.policy);

  // Non-uniform: geometric ladder of real lags, translates at the sample
  // abscissae, intermediate values by linear interpolation.
  double h_max = (xs.back() - xs.front()) / query.m;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < xs.size(); ++i)
    min_gap = std::min(min_gap, xs[i] - xs[i - 1]);
  double best = 0.0;
  for (double h = h_max; h >= 0.5 * min_gap && h > 0.0; h *= 0.5) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double t = xs[i];
      if (t + query.m * h > xs.back() + tol) continue;
      // Iterated difference via binomial expansion at t + k h.
      complexd acc = 0.0;
      double coef = 1.0;
      for (int k = 0; k <= query.m; ++k) {
        double sign = ((query.m - k) % 2 == 0) ? 1.0 : -1.0;
        acc += sign * coef * interpolate(xs, ys, t + k * h);
        coef *= static_cast<double>(query.m - k) / (k + 1);
      }
      best = std::max(best, std::abs(acc));
    }
  }
  return best;
}

double osc_interval_factored(const CascadeRealization& real,
                             const NodeAddress& w, int m, int sub_depth) {
  double scale = std::abs(real.path_product_w(w));
  if (scale == 0.0) return 0.0;  // dead branch: every deeper value vanishes
  GridFunction sub = evaluate_grid(real, Side::W, sub_depth, w);
  return scale * osc_values(sub.values, m, LagPolicy::Auto);
}

std::vector<double> default_radius_ladder(double range, int rungs) {
  std::vector<double> radii(rungs);
  double r = range / 4.0;
  for (int k = 0; k < rungs; ++k, r *= 0.5) radii[k] = r;
  return radii;
}

ExponentEstimate pointwise_exponent(std::span<const double> x,
                                    std::span<const complexd> y, double x0,
                                    int m, std::span<const double> radii) {
  if (radii.empty()) throw std::invalid_argument("pointwise_exponent: radii");
  ExponentEstimate est;
  est.x = x0;
  est.m = m;
  est.radii.assign(radii.begin(), radii.end());

  std::vector<double> log_r, log_osc;
  std::size_t zero_rungs = 0;
  for (double r : radii) {
    OscQuery q;
    q.m = m;
    q.a = std::max(x0 - r, x.front());
    q.b = std::min(x0 + r, x.back());
    if (!(q.a < q.b)) {
      ++zero_rungs;
      continue;
    }
    double o = osc(x, y, q);
    if (o > 0.0) {
      log_r.push_back(std::log(r));
      log_osc.push_back(std::log(o));
    } else {
      ++zero_rungs;
    }
  }
  if (zero_rungs * 2 >= radii.size()) {
    est.infinite = true;
    est.h_hat = std::numeric_limits<double>::infinity();
    est.rungs_used = static_cast<int>(log_r.size());
    return est;
  }
  if (log_r.size() < 4)
    throw std::runtime_error("pointwise_exponent: fewer than 4 usable radii");
  OlsFit fit = ols_fit(log_r, log_osc);
  est.h_hat = fit.slope;
  est.residual = fit.rms_residual;
  est.rungs_used = static_cast<int>(log_r.size());
  return est;
}

ExponentEstimate pointwise_exponent(const ComposedSamples& samples, double x0,
                                    int m, std::span<const double> radii) {
  return pointwise_exponent(std::span<const double>(samples.x),
                            std::span<const complexd>(samples.y), x0, m,
                            radii);
}

ExponentEstimate cylinder_exponent(const CascadeRealization& real,
                                   const NodeAddress& address, int m,
                                   int lo_level, int sub_depth) {
  const int hi = address.level();
  if (lo_level < 1 || lo_level > hi)
    throw std::invalid_argument("cylinder_exponent: level range");
  if (hi + sub_depth > real.depth())
    throw std::invalid_argument("cylinder_exponent: ladder exceeds depth");
  ExponentEstimate est;
  est.x = address.left_endpoint(real.model().base);
  est.m = m;

  std::vector<double> log_len, log_osc;
  std::size_t zero_rungs = 0;
  NodeAddress ancestor;
  for (int k = lo_level; k <= hi; ++k) {
    ancestor.digits.assign(address.digits.begin(),
                           address.digits.begin() + k);
    double mass =
        evaluate_grid(real, Side::L, sub_depth, ancestor).values.back().real();
    double length = real.path_product_l(ancestor) * mass;
    double o = osc_interval_factored(real, ancestor, m, sub_depth);
    est.radii.push_back(length);
    if (o > 0.0 && length > 0.0) {
      log_len.push_back(std::log(length));
      log_osc.push_back(std::log(o));
    } else {
      ++zero_rungs;
    }
  }
  if (zero_rungs * 2 >= est.radii.size()) {
    est.infinite = true;
    est.h_hat = std::numeric_limits<double>::infinity();
    est.rungs_used = static_cast<int>(log_len.size());
    return est;
  }
  if (log_len.size() < 4)
    throw std::runtime_error("cylinder_exponent: fewer than 4 usable levels");
  OlsFit fit = ols_fit(log_len, log_osc);
  est.h_hat = fit.slope;
  est.residual = fit.rms_residual;
  est.rungs_used = static_cast<int>(log_len.size());
  return est;
}

}  // namespace cascademf
