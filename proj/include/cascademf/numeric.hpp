#pragma once

// Small numeric helpers shared across the library: compensated summation,
// robust aggregation, least squares, scalar root finding and a couple of
// special functions that the standard library does not expose directly.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cascademf {

using complexd = std::complex<double>;

// Neumaier-compensated accumulator. Deterministic for a fixed visit order.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x);
  double value() const { return sum + comp; }
};

struct KahanSumComplex {
  KahanSum re, im;

  void add(complexd z) {
    re.add(z.real());
    im.add(z.imag());
  }
  complexd value() const { return {re.value(), im.value()}; }
};

// Sum of exp(logs[i]) returned in log space; tolerates -inf entries.
double log_sum_exp(std::span<const double> logs);

double median(std::vector<double> values);  // by value: reorders internally

struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
  double rms_residual = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares y ~ intercept + slope * x. Requires n >= 2; with
// n == 2 the fit is exact and the standard errors are reported as zero.
OlsFit ols_fit(std::span<const double> x, std::span<const double> y);

// Root of an increasing function on [lo, hi] (f(lo) <= 0 <= f(hi)).
double bisect_increasing(const std::function<double(double)>& f, double lo,
                         double hi, int iterations = 200,
                         double f_tol = 0.0);

double digamma(double x);

// Exponential integral E1(x) = int_x^inf exp(-u)/u du, x > 0.
double expint_e1(double x);

// Integral of a 2*pi-periodic smooth function over one period via the
// trapezoid rule (spectrally accurate for analytic periodic integrands).
double periodic_integral(const std::function<double(double)>& f, int points);

// Worker count for replica-parallel loops: CASCADEMF_THREADS when set to a
// positive integer, hardware concurrency otherwise, never below 1.
int thread_budget();

// fn(i) for i in [0, count) on up to `threads` workers, striding statically
// so the work split is a pure function of (count, threads). Callers must
// write results to disjoint slots; outputs then never depend on timing or
// on the worker count. The first exception thrown by any worker is
// rethrown after all join.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace cascademf
