#include "cascademf/analytic_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cascademf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kPhiTol = 1e-13;   // |Phi - 1| at the tau root
constexpr double kScanLimit = 64.0;  // |q| range searched by interval_J

// Phi(q, .) reduced to a fixed-q term list: Phi(q, t) = sum_i exp(logc_i -
// t logl_i). wlog_i is the |W|^q-weighted mean of log|W| inside term i, so
// the numerator of tau' is sum_i exp(logc_i - t logl_i) wlog_i.
struct PhiRep {
  std::vector<double> logc;
  std::vector<double> logl;
  std::vector<double> wlog;
};

PhiRep phi_rep(const WeightModel& model, double q) {
  PhiRep rep;
  const int b = model.base;
  if (model.atoms_only()) {
    for (const Atom& a : model.atoms) {
      if (a.p <= 0.0) continue;
      for (int i = 0; i < b; ++i) {
        double mag = std::abs(a.W[i]);
        if (mag == 0.0) continue;
        rep.logc.push_back(std::log(a.p) + q * std::log(mag));
        rep.logl.push_back(std::log(a.L[i]));
        rep.wlog.push_back(std::log(mag));
      }
    }
    return rep;
  }
  const GeneratorSpec& g = *model.generator;
  std::vector<double> subdiv = family_subdivision(g, b);
  for (int i = 0; i < b; ++i) {
    if (family_moment_diverges(g, i, q))
      throw std::domain_error("tau undefined: divergent moment at this q");
    CoordMoment cm = family_coord_moment(g, b, i, q);
    if (cm.value <= 0.0) continue;  // underflowed coordinate, contributes 0
    rep.logc.push_back(std::log(cm.value));
    rep.logl.push_back(std::log(subdiv[i]));
    rep.wlog.push_back(cm.log_weighted / cm.value);
  }
  return rep;
}

double log_phi(const PhiRep& rep, double t) {
  double m = -kInf;
  for (std::size_t i = 0; i < rep.logc.size(); ++i)
    m = std::max(m, rep.logc[i] - t * rep.logl[i]);
  if (!std::isfinite(m)) return m;
  KahanSum acc;
  for (std::size_t i = 0; i < rep.logc.size(); ++i)
    acc.add(std::exp(rep.logc[i] - t * rep.logl[i] - m));
  return m + std::log(acc.value());
}

// Shifted sums S0 = sum w_i, Sw = sum w_i wlog_i, Sl = sum w_i logl_i with
// w_i = exp(logc_i - t logl_i - max); shifts cancel in the ratios used.
// divergent_log marks a term whose mean log-modulus is -infinity (the
// left-sided family at q = 0), which drives tau' to +infinity.
struct PhiSums {
  double s0 = 0.0, sw = 0.0, sl = 0.0;
  bool divergent_log = false;
};

PhiSums phi_sums(const PhiRep& rep, double t) {
  double m = -kInf;
  for (std::size_t i = 0; i < rep.logc.size(); ++i)
    m = std::max(m, rep.logc[i] - t * rep.logl[i]);
  PhiSums s;
  if (!std::isfinite(m)) return s;
  KahanSum s0, sw, sl;
  for (std::size_t i = 0; i < rep.logc.size(); ++i) {
    double w = std::exp(rep.logc[i] - t * rep.logl[i] - m);
    s0.add(w);
    sl.add(w * rep.logl[i]);
    if (w > 0.0 && !std::isfinite(rep.wlog[i])) {
      s.divergent_log = true;
    } else {
      sw.add(w * rep.wlog[i]);
    }
  }
  s.s0 = s0.value();
  s.sw = sw.value();
  s.sl = sl.value();
  return s;
}

double tau_from_rep(const PhiRep& rep) {
  if (rep.logc.empty())
    throw std::domain_error("tau undefined: no nonzero weight coordinates");
  auto f = [&](double t) { return log_phi(rep, t); };
  double lo = -1.0, hi = 1.0;
  for (int i = 0; i < 80 && f(lo) > 0.0; ++i) lo *= 2.0;
  for (int i = 0; i < 80 && f(hi) < 0.0; ++i) hi *= 2.0;
  double t = bisect_increasing(f, lo, hi, 120, 1e-15);
  // Newton polish: d/dt log Phi = -Sl / S0 > 0.
  for (int i = 0; i < 6; ++i) {
    double v = f(t);
    if (std::abs(v) <= kPhiTol) break;
    PhiSums s = phi_sums(rep, t);
    t -= v / (-s.sl / s.s0);
  }
  return t;
}

double tau_prime_from_rep(const PhiRep& rep, double t) {
  PhiSums s = phi_sums(rep, t);
  // Both sums carry the negative log factors: sl < 0 always, so a divergent
  // numerator gives slope +infinity.
  if (s.divergent_log) return kInf;
  return s.sw / s.sl;
}

// g(q) = q tau'(q) - tau(q), with the q = 0 limit taken exactly (q tau'(q)
// vanishes there even when tau'(0) diverges logarithmically). When scale is
// requested it reports the magnitude of the cancelling terms, so callers can
// tell a true sign change from subtraction noise: at large |q| both terms
// grow like |q| while g itself can decay to zero.
double g_value(const WeightModel& model, double q, double* scale = nullptr) {
  PhiRep rep = phi_rep(model, q);
  double t = tau_from_rep(rep);
  if (q == 0.0) {
    if (scale) *scale = std::max(std::abs(t), 1.0);
    return -t;
  }
  double qtp = q * tau_prime_from_rep(rep, t);
  if (scale) *scale = std::max(std::abs(qtp), std::abs(t));
  return qtp - t;
}

bool tau_defined(const WeightModel& model, double q) {
  if (model.atoms_only()) return true;
  for (int i = 0; i < model.base; ++i)
    if (family_moment_diverges(*model.generator, i, q)) return false;
  return true;
}

}  // namespace

double Phi(const WeightModel& model, double q, double t) {
  return std::exp(log_phi(phi_rep(model, q), t));
}

double tau(const WeightModel& model, double q) {
  return tau_from_rep(phi_rep(model, q));
}

double tau_prime(const WeightModel& model, double q) {
  PhiRep rep = phi_rep(model, q);
  return tau_prime_from_rep(rep, tau_from_rep(rep));
}

bool IntervalJ::contains(double q, double margin) const {
  bool above = lo_unbounded || q > q_lo + margin;
  bool below = hi_unbounded || q < q_hi - margin;
  return above && below;
}

namespace {

// One side of J. g is monotone on each half-line (g'(q) = q tau''(q) and
// tau is concave), so a coarse scan outward from 0 plus bisection finds the
// single sign change exactly. When tau stops being defined before g turns
// negative, bisect the definedness boundary instead and clamp J there.
struct SideResult {
  double edge = 0.0;      // endpoint of J on this side
  bool unbounded = false;
  bool domain_limited = false;
  double residual = 0.0;  // g at the endpoint (or at the scan limit)
};

SideResult scan_side(const WeightModel& model, double direction) {
  auto g = [&](double q) { return g_value(model, q); };
  auto bisect_g = [&](double q_pos, double q_neg) {
    // g(q_pos) >= 0, g(q_neg) < 0; 80 halvings pin the root to ~1e-16.
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (q_pos + q_neg);
      (g(mid) >= 0.0 ? q_pos : q_neg) = mid;
    }
    return 0.5 * (q_pos + q_neg);
  };

  SideResult out;
  const double step = direction * 0.0625;
  double prev = 0.0;
  double gprev = g(0.0);
  for (int k = 1; k <= 1024; ++k) {
    double q = step * k;
    if (!tau_defined(model, q)) {
      // Walk the definedness boundary down to rounding, then decide
      // whether g changes sign in the sliver that remains.
      double q_def = prev, q_undef = q;
      for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (q_def + q_undef);
        (tau_defined(model, mid) ? q_def : q_undef) = mid;
      }
      double g_edge = g(q_def);
      if (g_edge < 0.0) {
        out.edge = bisect_g(prev, q_def);
        out.residual = g(out.edge);
      } else {
        out.edge = q_def;
        out.domain_limited = true;
        out.residual = g_edge;
      }
      return out;
    }
    double scale = 1.0;
    double gq = g_value(model, q, &scale);
    // Only a drop clearing the cancellation noise counts as a sign change.
    if (gq < -64.0 * std::numeric_limits<double>::epsilon() * scale) {
      out.edge = bisect_g(prev, q);
      out.residual = g(out.edge);
      return out;
    }
    prev = q;
    gprev = gq;
  }
  out.edge = direction * kInf;
  out.unbounded = true;
  out.residual = gprev;
  return out;
}

}  // namespace

IntervalJ interval_J(const WeightModel& model) {
  IntervalJ J;
  SideResult up = scan_side(model, +1.0);
  SideResult down = scan_side(model, -1.0);
  J.q_hi = up.edge;
  J.hi_unbounded = up.unbounded;
  J.residual_hi = up.residual;
  J.q_lo = down.edge;
  J.lo_unbounded = down.unbounded;
  J.lo_domain_limited = down.domain_limited;
  J.residual_lo = down.residual;
  // Extreme exponents: the slope at each endpoint (scan limit stands in
  // for an unbounded side).
  J.h_lo = tau_prime(model, J.hi_unbounded ? kScanLimit : J.q_hi);
  J.h_hi = tau_prime(model, J.lo_unbounded ? -kScanLimit : J.q_lo);
  return J;
}

double full_tau_m(const WeightModel& model, const IntervalJ& J, double q) {
  if (!J.hi_unbounded && q > J.q_hi) return J.h_lo * q;
  if (!J.lo_unbounded && q < J.q_lo) return J.h_hi * q;
  return tau(model, q);
}

SpectrumCurve analytic_curve(const WeightModel& model,
                             const std::vector<double>& q_grid) {
  SpectrumCurve curve;
  curve.source = CurveSource::Analytic;
  IntervalJ J = interval_J(model);
  curve.interval = J;
  for (double q : q_grid) {
    if (!tau_defined(model, q)) {
      curve.notes.push_back("tau undefined at q = " + std::to_string(q) +
                            "; point dropped");
      continue;
    }
    bool inside = J.contains(q);
    double tp;
    if (!J.hi_unbounded && q > J.q_hi) {
      tp = J.h_lo;
    } else if (!J.lo_unbounded && q < J.q_lo) {
      tp = J.h_hi;
    } else {
      tp = tau_prime(model, q);
    }
    curve.q.push_back(q);
    curve.tau.push_back(full_tau_m(model, J, q));
    curve.tau_prime.push_back(tp);
    curve.in_J.push_back(inside ? 1 : 0);
  }
  return curve;
}

LegendrePair legendre(const SpectrumCurve& curve,
                      const std::vector<double>& h_grid) {
  if (curve.q.empty()) throw std::invalid_argument("legendre: empty curve");
  LegendrePair out;
  out.h = h_grid;
  out.tau_star.reserve(h_grid.size());
  for (double h : h_grid) {
    double best = kInf;
    for (std::size_t i = 0; i < curve.q.size(); ++i) {
      if (std::isnan(curve.tau[i])) continue;
      best = std::min(best, h * curve.q[i] - curve.tau[i]);
    }
    out.tau_star.push_back(best);
  }
  return out;
}

LegendrePair legendre_parametric(const SpectrumCurve& curve) {
  LegendrePair out;
  for (std::size_t i = 0; i < curve.q.size(); ++i) {
    if (!curve.in_J[i] || std::isnan(curve.tau[i])) continue;
    if (!std::isfinite(curve.tau_prime[i])) continue;
    out.h.push_back(curve.tau_prime[i]);
    out.tau_star.push_back(curve.q[i] * curve.tau_prime[i] - curve.tau[i]);
  }
  return out;
}

TauGPrediction predicted_tau_G_root(const WeightModel& model, int order_m) {
  if (order_m < 1) throw std::invalid_argument("order must be >= 1");
  TauGPrediction pred;
  pred.order_m = order_m;
  auto gap = [&](double q) { return tau(model, q) - (q * order_m - 1.0); };

  const double step = 0.05;
  double last_pos = kNan;
  double first_nonpos_after = kNan;
  for (double q = step; q <= kScanLimit + 0.5 * step; q += step) {
    if (!tau_defined(model, q)) break;
    if (gap(q) > 0.0) {
      last_pos = q;
      first_nonpos_after = kNan;
    } else if (!std::isnan(last_pos) && std::isnan(first_nonpos_after)) {
      first_nonpos_after = q;
    }
  }
  if (std::isnan(last_pos)) {
    // tau never exceeds the line: the kink degenerates to q = 0 and the
    // prediction is tau itself for q > 0.
    pred.q_m = 0.0;
    pred.root_found = true;
    pred.residual = std::abs(gap(0.0));
    return pred;
  }
  if (std::isnan(first_nonpos_after)) {
    pred.line_dominates = true;  // still above the line at the scan edge
    pred.q_m = kScanLimit;
    return pred;
  }
  double lo = last_pos, hi = first_nonpos_after;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    if (gap(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  pred.q_m = 0.5 * (lo + hi);
  pred.root_found = true;
  pred.residual = std::abs(gap(pred.q_m));
  return pred;
}

double predicted_tau_G(const WeightModel& model, int order_m, double q) {
  if (q < 0.0)
    throw std::domain_error("predicted_tau_G defined for q >= 0");
  return std::min(tau(model, q), q * order_m - 1.0);
}

}  // namespace cascademf
