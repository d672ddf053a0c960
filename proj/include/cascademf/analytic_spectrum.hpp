#pragma once

// Analytic scaling exponents of a weight model. tau(q) is the unique root
// in t of Phi(q, t) = E(sum_i 1{W_i != 0} |W_i|^q L_i^{-t}) = 1; its
// derivative, the interval where the multifractal formalism is exact, the
// linearized full scaling function, Legendre transforms, and the predicted
// exponents after adding a smooth function all derive from it.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cascademf/weights.hpp"

namespace cascademf {

// Phi(q, t); throws std::domain_error when the q-th moment diverges.
double Phi(const WeightModel& model, double q, double t);

// Root of Phi(q, .) = 1, converged to |Phi - 1| <= 1e-13.
double tau(const WeightModel& model, double q);

// tau'(q) as the ratio of log-weighted to subdivision-log-weighted
// expectations at (q, tau(q)). Matches a central difference of tau to 1e-6.
double tau_prime(const WeightModel& model, double q);

struct IntervalJ {
  double q_lo = 0.0;
  double q_hi = 0.0;
  bool lo_unbounded = false;
  bool hi_unbounded = false;
  // Domain edges where tau itself stops existing (divergent moments).
  bool lo_domain_limited = false;
  // Slopes tau'(q_hi) and tau'(q_lo): the extreme exponents reached.
  double h_lo = 0.0;
  double h_hi = 0.0;
  // g = q tau'(q) - tau(q) at the reported endpoints (zero at interior
  // roots, the residual at a scan edge when unbounded).
  double residual_lo = 0.0;
  double residual_hi = 0.0;

  bool contains(double q, double margin = 0.0) const;
};

// Largest interval around 0 on which g(q) = q tau'(q) - tau(q) >= 0, found
// by scanning |q| <= 64 and bisecting the sign changes.
IntervalJ interval_J(const WeightModel& model);

// Linearized full scaling function: tau on J, extended linearly with the
// extreme slopes beyond it. Identical for every oscillation order m.
double full_tau_m(const WeightModel& model, const IntervalJ& J, double q);

enum class CurveSource { Analytic, Empirical };

struct SpectrumCurve {
  CurveSource source = CurveSource::Analytic;
  std::vector<double> q;
  std::vector<double> tau;
  std::vector<double> tau_prime;
  std::vector<double> std_error;  // empirical only, else empty
  std::vector<char> in_J;
  std::optional<IntervalJ> interval;  // analytic only
  std::vector<std::string> notes;
};

// Analytic curve over a q grid (full linearized values). Points where tau
// is undefined are dropped and recorded in the notes.
SpectrumCurve analytic_curve(const WeightModel& model,
                             const std::vector<double>& q_grid);

struct LegendrePair {
  std::vector<double> h;
  std::vector<double> tau_star;
};

// Discrete Legendre transform inf_q (h q - tau(q)) over the curve's grid.
LegendrePair legendre(const SpectrumCurve& curve,
                      const std::vector<double>& h_grid);

// Exact transform along the parametric form (tau'(q), q tau'(q) - tau(q)),
// restricted to the curve points inside J.
LegendrePair legendre_parametric(const SpectrumCurve& curve);

struct TauGPrediction {
  int order_m = 1;
  double q_m = 0.0;       // kink location (0 when tau never exceeds the line)
  bool root_found = false;
  bool line_dominates = false;  // tau stayed above the line through q = 64
  double residual = 0.0;        // |tau(q_m) - (q_m m - 1)| when root_found
};

// Crossing of tau(q) with the line q m - 1 (the kink of the predicted
// scaling function after adding a smooth non-degenerate function).
TauGPrediction predicted_tau_G_root(const WeightModel& model, int order_m);

// Predicted scaling function min(tau(q), q m - 1), for q >= 0.
double predicted_tau_G(const WeightModel& model, int order_m, double q);

}  // namespace cascademf
