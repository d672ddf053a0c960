#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cascademf/analytic_spectrum.hpp"
#include "cascademf/weights.hpp"

using namespace cascademf;

namespace {

double binomial_tau(double q) {
  return -std::log2(std::pow(0.3, q) + std::pow(0.7, q));
}

double bell_tau(double q) {
  return -std::log2(12.0 / ((2.0 + q) * (3.0 + q)));
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (double q = lo; q <= hi + 1e-12; q += step) g.push_back(q);
  return g;
}

}  // namespace

TEST_CASE("tau matches the closed forms of the catalogue") {
  WeightModel bino = binomial_model(0.3, 0.7);
  WeightModel mono = monofractal_model();
  WeightModel bell = beta_split_model();
  for (double q : grid(-4.0, 4.0, 0.5)) {
    CHECK(tau(bino, q) == doctest::Approx(binomial_tau(q)).epsilon(1e-12));
    CHECK(tau(mono, q) == doctest::Approx(q / 2.0 - 1.0).epsilon(1e-12));
  }
  for (double q : grid(-1.5, 4.0, 0.5))
    CHECK(tau(bell, q) == doctest::Approx(bell_tau(q)).epsilon(1e-12));

  // Conservative non-negative weights pin tau(1) = 0 and tau(0) = -1.
  CHECK(tau(bino, 1.0) == doctest::Approx(0.0));
  CHECK(tau(bell, 1.0) == doctest::Approx(0.0));
  CHECK(tau(bino, 0.0) == doctest::Approx(-1.0));
}

TEST_CASE("Phi is the partition expectation behind tau") {
  WeightModel bino = binomial_model(0.3, 0.7);
  // At the root, Phi(q, tau(q)) = 1 by construction.
  for (double q : {-2.0, 0.0, 1.0, 3.0})
    CHECK(Phi(bino, q, tau(bino, q)) == doctest::Approx(1.0).epsilon(1e-12));
  // Closed form at a hand value: 0.3^2 * 2^t + 0.7^2 * 2^t.
  CHECK(Phi(bino, 2.0, 1.0) == doctest::Approx(2.0 * 0.58).epsilon(1e-13));
  CHECK_THROWS_AS((void)Phi(beta_split_model(), -2.5, 0.0),
                  std::domain_error);
}

TEST_CASE("tau_prime agrees with differentiating the closed forms") {
  WeightModel bino = binomial_model(0.3, 0.7);
  WeightModel bell = beta_split_model();
  const double h = 1e-6;
  for (double q : {-1.0, 0.0, 0.5, 1.0, 2.0, 3.0}) {
    double fd_bino = (binomial_tau(q + h) - binomial_tau(q - h)) / (2.0 * h);
    CHECK(tau_prime(bino, q) == doctest::Approx(fd_bino).epsilon(1e-8));
    double fd_bell = (bell_tau(q + h) - bell_tau(q - h)) / (2.0 * h);
    CHECK(tau_prime(bell, q) == doctest::Approx(fd_bell).epsilon(1e-8));
  }
  // Frozen spot values.
  CHECK(tau_prime(bino, 0.0) ==
        doctest::Approx(1.1257693834979822).epsilon(1e-12));
  CHECK(tau_prime(bell, 1.0) ==
        doctest::Approx(0.8415721071852287).epsilon(1e-12));
  CHECK(tau_prime(monofractal_model(), 2.0) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("heavy-log slopes blow up toward q = 0") {
  WeightModel heavy = heavy_log_model();
  CHECK(tau_prime(heavy, 0.01) > 20.0);
  CHECK(tau_prime(heavy, 0.1) < 1.5);
  // tau exists right of 0 only.
  CHECK_THROWS_AS((void)tau(heavy, -0.5), std::domain_error);
}

TEST_CASE("interval J of the binomial stretches past the scan bounds") {
  // g(q) = q tau'(q) - tau(q) is strictly positive for the binomial at
  // every finite q, so both ends report unbounded.
  IntervalJ J = interval_J(binomial_model(0.3, 0.7));
  CHECK(J.lo_unbounded);
  CHECK(J.hi_unbounded);
  CHECK(J.contains(0.0));
  CHECK(J.contains(-10.0));
  // Extreme slopes approach -log2(0.7) and -log2(0.3).
  CHECK(J.h_lo == doctest::Approx(-std::log2(0.7)).epsilon(1e-3));
  CHECK(J.h_hi == doctest::Approx(-std::log2(0.3)).epsilon(1e-3));
}

TEST_CASE("interval J of the bell model has interior endpoints") {
  WeightModel bell = beta_split_model();
  IntervalJ J = interval_J(bell);
  CHECK(!J.lo_unbounded);
  CHECK(!J.hi_unbounded);
  CHECK(J.q_lo > -2.0);
  CHECK(J.q_lo < 0.0);
  CHECK(J.q_hi > 1.0);
  // Endpoints are roots of g.
  auto g = [&](double q) { return q * tau_prime(bell, q) - tau(bell, q); };
  CHECK(std::abs(g(J.q_lo)) <= 1e-9);
  CHECK(std::abs(g(J.q_hi)) <= 1e-9);
  CHECK(std::abs(J.residual_lo) <= 1e-9);
  CHECK(std::abs(J.residual_hi) <= 1e-9);
  // The slope range is [tau'(q_hi), tau'(q_lo)]: tau' decreases.
  CHECK(J.h_lo == doctest::Approx(tau_prime(bell, J.q_hi)).epsilon(1e-9));
  CHECK(J.h_hi == doctest::Approx(tau_prime(bell, J.q_lo)).epsilon(1e-9));
  CHECK(J.h_lo < J.h_hi);
  CHECK(J.contains(1.0));
  CHECK(!J.contains(J.q_hi + 0.5));
}

TEST_CASE("interval J of the heavy-log model is domain limited at zero") {
  IntervalJ J = interval_J(heavy_log_model());
  CHECK(J.lo_domain_limited);
  CHECK(J.q_lo == 0.0);
  CHECK(J.q_hi == doctest::Approx(1.5468).epsilon(1e-3));
  CHECK(std::isinf(J.h_hi));  // left-sided: slopes are unbounded
}

TEST_CASE("the linearized full scaling function extends tau by tangents") {
  WeightModel bell = beta_split_model();
  IntervalJ J = interval_J(bell);
  // Inside J it is tau itself.
  CHECK(full_tau_m(bell, J, 1.0) == doctest::Approx(tau(bell, 1.0)));
  // Beyond q_hi it continues with slope h_lo from (q_hi, tau(q_hi)).
  double q = J.q_hi + 1.5;
  CHECK(full_tau_m(bell, J, q) ==
        doctest::Approx(tau(bell, J.q_hi) + (q - J.q_hi) * J.h_lo)
            .epsilon(1e-10));
  // Continuity across the junction.
  CHECK(full_tau_m(bell, J, J.q_hi + 1e-9) ==
        doctest::Approx(tau(bell, J.q_hi)).epsilon(1e-6));
}

TEST_CASE("analytic curves carry concavity and the in_J flags") {
  WeightModel bell = beta_split_model();
  SpectrumCurve curve = analytic_curve(bell, grid(-1.0, 4.0, 0.25));
  REQUIRE(curve.q.size() == curve.tau.size());
  REQUIRE(curve.q.size() == curve.tau_prime.size());
  REQUIRE(curve.q.size() == curve.in_J.size());
  // Midpoint concavity on the grid.
  for (std::size_t k = 2; k < curve.q.size(); ++k)
    CHECK(curve.tau[k - 1] >=
          0.5 * (curve.tau[k] + curve.tau[k - 2]) - 1e-9);
  // in_J true exactly when g(q) >= 0 for the raw curve. Outside J the
  // stored tau and tau_prime switch to the linear extension, so recompute
  // g from the model itself.
  for (std::size_t k = 0; k < curve.q.size(); ++k) {
    double g = curve.q[k] * tau_prime(bell, curve.q[k]) - tau(bell, curve.q[k]);
    if (std::abs(g) < 1e-9) continue;  // too close to the boundary to call
    CHECK(static_cast<bool>(curve.in_J[k]) == (g > 0.0));
  }
  // tau(1) = 0 for non-negative weights.
  for (std::size_t k = 0; k < curve.q.size(); ++k)
    if (curve.q[k] == doctest::Approx(1.0))
      CHECK(curve.tau[k] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("analytic curve drops undefined points and says so") {
  // Heavy-log tau does not exist left of 0; those grid points disappear.
  SpectrumCurve curve = analytic_curve(heavy_log_model(), grid(-0.5, 1.0, 0.25));
  for (double q : curve.q) CHECK(q >= 0.0);
  CHECK(!curve.notes.empty());
}

TEST_CASE("tau(1) < 0 when weights are genuinely complex") {
  SpectrumCurve curve = analytic_curve(monofractal_model(), {1.0});
  REQUIRE(curve.tau.size() == 1);
  CHECK(curve.tau[0] == doctest::Approx(-0.5));  // q/2 - 1 at q = 1
  CHECK(curve.tau[0] < 0.0);
}

TEST_CASE("Legendre transform peaks at (tau'(0), -tau(0))") {
  WeightModel bell = beta_split_model();
  SpectrumCurve curve = analytic_curve(bell, grid(-1.0, 3.5, 0.05));
  LegendrePair par = legendre_parametric(curve);
  REQUIRE(!par.h.empty());
  double best = -1e300;
  for (double v : par.tau_star) best = std::max(best, v);
  CHECK(best == doctest::Approx(1.0).epsilon(1e-6));  // -tau(0) = 1

  // The discrete transform agrees near the peak and never exceeds it.
  double h0 = tau_prime(bell, 0.0);
  LegendrePair disc = legendre(curve, {h0 - 0.2, h0, h0 + 0.2});
  for (double v : disc.tau_star) CHECK(v <= 1.0 + 1e-9);
  CHECK(disc.tau_star[1] == doctest::Approx(1.0).epsilon(1e-3));

  // Concave along the h grid.
  LegendrePair wide = legendre(curve, grid(0.4, 1.4, 0.05));
  for (std::size_t k = 2; k < wide.tau_star.size(); ++k)
    CHECK(wide.tau_star[k - 1] >=
          0.5 * (wide.tau_star[k] + wide.tau_star[k - 2]) - 1e-9);
}

TEST_CASE("monofractal Legendre data collapses to one point") {
  SpectrumCurve curve = analytic_curve(monofractal_model(), grid(0.0, 3.0, 0.5));
  LegendrePair par = legendre_parametric(curve);
  for (std::size_t k = 0; k < par.h.size(); ++k) {
    CHECK(par.h[k] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(par.tau_star[k] == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("smooth-addend prediction: kink and envelope") {
  WeightModel bino = binomial_model(0.3, 0.7);
  // tau(1) = 0 meets the m=1 line q-1 exactly at q = 1, and tau' there is
  // below 1, so the crossing is the kink.
  TauGPrediction pred = predicted_tau_G_root(bino, 1);
  CHECK(pred.root_found);
  CHECK(pred.q_m == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pred.residual <= 1e-9);

  CHECK(predicted_tau_G(bino, 1, 2.0) ==
        doctest::Approx(binomial_tau(2.0)).epsilon(1e-12));
  CHECK(predicted_tau_G(bino, 1, 0.5) == doctest::Approx(-0.5));
  CHECK_THROWS_AS((void)predicted_tau_G(bino, 1, -0.5), std::domain_error);
}
