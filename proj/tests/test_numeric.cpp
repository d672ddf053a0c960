#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cascademf/numeric.hpp"

using namespace cascademf;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("compensated sum survives cancellation that defeats naive order") {
  // Classic Neumaier case: the large term swallows the small one, the
  // compensation recovers it.
  KahanSum s;
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  CHECK(s.value() == 1.0);

  KahanSum tenths;
  for (int i = 0; i < 10; ++i) tenths.add(0.1);
  CHECK(tenths.value() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("complex compensated sum tracks both parts") {
  KahanSumComplex s;
  s.add({1e100, -1.0});
  s.add({1.0, 1e100});
  s.add({-1e100, -1e100});
  CHECK(s.value().real() == 1.0);
  CHECK(s.value().imag() == -1.0);
}

TEST_CASE("log_sum_exp") {
  std::vector<double> logs = {std::log(1.0), std::log(2.0), std::log(3.0)};
  CHECK(log_sum_exp(logs) == doctest::Approx(std::log(6.0)).epsilon(1e-14));

  std::vector<double> with_ninf = {-kInf, 0.0};
  CHECK(log_sum_exp(with_ninf) == doctest::Approx(0.0));

  std::vector<double> all_ninf = {-kInf, -kInf};
  CHECK(log_sum_exp(all_ninf) == -kInf);

  // Huge magnitudes must not overflow: shift makes this exact.
  std::vector<double> big = {1000.0, 1000.0};
  CHECK(log_sum_exp(big) ==
        doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("median reorders its copy and averages even counts") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(median({7.0}) == 7.0);
}

TEST_CASE("least squares recovers an exact line") {
  std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  std::vector<double> y;
  for (double xi : x) y.push_back(2.5 * xi - 1.25);
  OlsFit fit = ols_fit(x, y);
  CHECK(fit.slope == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(fit.intercept == doctest::Approx(-1.25).epsilon(1e-14));
  CHECK(fit.rms_residual == doctest::Approx(0.0));
  CHECK(fit.n == 4);
}

TEST_CASE("least squares standard errors on a known dataset") {
  // y = x with the middle point displaced by 3e: residuals (e, -2e, e)
  // after the refit; hand computation gives slope 1, intercept e,
  // rms = e*sqrt(2), se_slope = e*sqrt(3).
  const double e = 0.01;
  std::vector<double> x = {0.0, 1.0, 2.0};
  std::vector<double> y = {0.0, 1.0 + 3.0 * e, 2.0};
  OlsFit fit = ols_fit(x, y);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(e).epsilon(1e-10));
  CHECK(fit.rms_residual ==
        doctest::Approx(e * std::sqrt(2.0)).epsilon(1e-10));
  CHECK(fit.se_slope == doctest::Approx(e * std::sqrt(3.0)).epsilon(1e-10));
}

TEST_CASE("two points give an exact fit with zero reported error") {
  std::vector<double> x = {1.0, 2.0};
  std::vector<double> y = {5.0, 9.0};
  OlsFit fit = ols_fit(x, y);
  CHECK(fit.slope == doctest::Approx(4.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.se_slope == 0.0);
  CHECK(fit.se_intercept == 0.0);
}

TEST_CASE("bisection root of an increasing function") {
  double r = bisect_increasing([](double t) { return t * t * t - 2.0; }, 0.0,
                               2.0);
  CHECK(r == doctest::Approx(std::cbrt(2.0)).epsilon(1e-14));

  // f_tol stops early once |f| is small enough; the root is still bracketed.
  double loose = bisect_increasing(
      [](double t) { return t - 0.3; }, 0.0, 1.0, 200, 1e-3);
  CHECK(std::abs(loose - 0.3) < 1e-3);
}

TEST_CASE("digamma against reference values and the recurrence") {
  // psi(1) = -euler_gamma, psi(1/2) = -euler_gamma - 2 log 2.
  CHECK(digamma(1.0) ==
        doctest::Approx(-std::numbers::egamma).epsilon(1e-13));
  CHECK(digamma(0.5) ==
        doctest::Approx(-1.9635100260214235).epsilon(1e-13));
  CHECK(digamma(5.25) ==
        doctest::Approx(1.5599773364075456).epsilon(1e-13));
  for (double x : {0.3, 1.7, 4.2}) {
    CHECK(digamma(x + 1.0) ==
          doctest::Approx(digamma(x) + 1.0 / x).epsilon(1e-12));
  }
}

TEST_CASE("exponential integral E1") {
  CHECK(expint_e1(1.0) ==
        doctest::Approx(0.21938393439552027).epsilon(1e-13));
  CHECK(expint_e1(0.5) ==
        doctest::Approx(0.5597735947761608).epsilon(1e-13));
  // Stable two-sided envelope: e^-x log(1+1/x)/2 < E1(x) < e^-x log(1+1/x).
  for (double x : {0.1, 1.0, 10.0, 50.0}) {
    double env = std::exp(-x) * std::log1p(1.0 / x);
    CHECK(expint_e1(x) > 0.5 * env);
    CHECK(expint_e1(x) < env);
  }
}

TEST_CASE("periodic trapezoid integral is spectrally accurate") {
  using std::numbers::pi;
  double c2 = periodic_integral(
      [](double t) { return std::cos(t) * std::cos(t); }, 64);
  CHECK(c2 == doctest::Approx(pi).epsilon(1e-14));
  // integral of exp(cos t) over a period = 2 pi I0(1).
  double bessel = periodic_integral(
      [](double t) { return std::exp(std::cos(t)); }, 64);
  CHECK(bessel == doctest::Approx(7.954926521012845).epsilon(1e-13));
}

TEST_CASE("thread budget is at least one") { CHECK(thread_budget() >= 1); }

TEST_CASE("parallel_for output does not depend on the worker count") {
  const std::size_t n = 1000;
  auto run = [n](int threads) {
    std::vector<double> out(n);
    parallel_for(n, threads,
                 [&](std::size_t i) { out[i] = std::sqrt(double(i)); });
    return out;
  };
  CHECK(run(1) == run(4));
  CHECK(run(4) == run(7));
}

TEST_CASE("parallel_for rethrows a worker exception") {
  CHECK_THROWS_AS(parallel_for(8, 4,
                               [](std::size_t i) {
                                 if (i == 5)
                                   throw std::runtime_error("worker 5");
                               }),
                  std::runtime_error);
}
