#include "cascademf/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

namespace cascademf {

void KahanSum::add(double x) {
  double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) {
    comp += (sum - t) + x;
  } else {
    comp += (x - t) + sum;
  }
  sum = t;
}

double log_sum_exp(std::span<const double> logs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logs) m = std::max(m, v);
  if (!std::isfinite(m)) return m;  // empty or all -inf
  KahanSum acc;
  for (double v : logs) acc.add(std::exp(v - m));
  return m + std::log(acc.value());
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols_fit needs >= 2 matching points");
  const std::size_t n = x.size();
  KahanSum sx, sy;
  for (std::size_t i = 0; i < n; ++i) {
    sx.add(x[i]);
    sy.add(y[i]);
  }
  const double mx = sx.value() / static_cast<double>(n);
  const double my = sy.value() / static_cast<double>(n);
  KahanSum sxx, sxy;
  for (std::size_t i = 0; i < n; ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
  }
  if (sxx.value() <= 0.0)
    throw std::invalid_argument("ols_fit: degenerate abscissae");

  OlsFit fit;
  fit.n = n;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  KahanSum srr;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - fit.intercept - fit.slope * x[i];
    srr.add(r * r);
  }
  fit.rms_residual = std::sqrt(srr.value() / static_cast<double>(n));
  if (n > 2) {
    double s2 = srr.value() / static_cast<double>(n - 2);
    fit.se_slope = std::sqrt(s2 / sxx.value());
    fit.se_intercept =
        std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx.value()));
  }
  return fit;
}

double bisect_increasing(const std::function<double(double)>& f, double lo,
                         double hi, int iterations, double f_tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo > 0.0 || fhi < 0.0)
    throw std::invalid_argument("bisect_increasing: root not bracketed");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int i = 0; i < iterations; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval exhausted in doubles
    double fm = f(mid);
    if (f_tol > 0.0 && std::abs(fm) <= f_tol) return mid;
    if (fm < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma requires x > 0");
  double acc = 0.0;
  while (x < 10.0) {  // shift into the asymptotic regime
    acc -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series with Bernoulli coefficients.
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  double series =
      std::log(x) - 0.5 * inv -
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 - inv2 / 132.0))));
  return acc + series;
}

double expint_e1(double x) {
  if (!(x > 0.0)) throw std::domain_error("expint_e1 requires x > 0");
  return -std::expint(-x);
}

double periodic_integral(const std::function<double(double)>& f, int points) {
  if (points < 4) throw std::invalid_argument("periodic_integral: too coarse");
  const double step = 2.0 * std::numbers::pi / points;
  KahanSum acc;
  for (int k = 0; k < points; ++k) acc.add(f(k * step));
  return acc.value() * step;
}

int thread_budget() {
  if (const char* env = std::getenv("CASCADEMF_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  std::size_t workers = static_cast<std::size_t>(std::max(threads, 1));
  workers = std::min(workers, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cascademf
