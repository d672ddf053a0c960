#pragma once

// Oscillations of order m over intervals, restricted to sampled functions.
// The order-1 oscillation of a set of values is the diameter of its image;
// higher orders take the supremum of |m-th iterated differences| over all
// admissible translate/lag pairs. These are the measurements the partition
// functions and pointwise exponent estimates are built from.

#include <span>
#include <vector>

#include "cascademf/cascade.hpp"
#include "cascademf/numeric.hpp"

namespace cascademf {

// m-fold iterated difference with integer lag `step` (in sample units).
// Output length shrinks by m * step; throws when nothing remains.
std::vector<complexd> finite_difference(std::span<const complexd> values,
                                        int m, int step);

enum class LagPolicy {
  Auto,        // exhaustive when affordable, geometric otherwise
  Exhaustive,  // all (translate, lag) pairs
  Geometric,   // lags halved from the largest admissible one
};

// Oscillation of order m of uniformly spaced samples (whole span). For
// m == 1 this is the diameter of the value set, computed by convex hull
// and rotating calipers once the span outgrows brute force. For m >= 2 the
// supremum runs over integer lags according to the policy.
double osc_values(std::span<const complexd> values, int m,
                  LagPolicy policy = LagPolicy::Auto);

struct OscQuery {
  int m = 1;
  double a = 0.0;  // interval [a, b] inside the sample range
  double b = 1.0;
  LagPolicy policy = LagPolicy::Auto;
};

// Interval oscillation of samples given by sorted abscissae x and values y.
// Uniform abscissae reduce to osc_values on the covered slice; non-uniform
// ones use geometric real lags with piecewise-linear interpolation between
// samples (a documented under-approximation of the continuum supremum).
double osc(std::span<const double> x, std::span<const complexd> y,
           const OscQuery& query);

// Oscillation of the cascade over the cell addressed by w, via the exact
// factorization |path weight product| * (oscillation of the subtree
// approximant of depth sub_depth on [0,1]).
double osc_interval_factored(const CascadeRealization& real,
                             const NodeAddress& w, int m, int sub_depth);

struct ExponentEstimate {
  double x = 0.0;
  int m = 1;
  double h_hat = 0.0;
  bool infinite = false;  // at least half the rungs had zero oscillation
  int rungs_used = 0;
  double residual = 0.0;  // rms of the log-log regression
  std::vector<double> radii;
};

// Default radius ladder: r_k = r0 / 2^k with r0 = (range)/4, `rungs` rungs.
std::vector<double> default_radius_ladder(double range, int rungs = 10);

// Least-squares slope of log osc(B(x0, r)) against log r over the ladder.
// Zero-oscillation rungs are skipped; estimates with fewer than 4 usable
// rungs raise unless the zero count already flags the point as infinite.
ExponentEstimate pointwise_exponent(std::span<const double> x,
                                    std::span<const complexd> y, double x0,
                                    int m, std::span<const double> radii);

ExponentEstimate pointwise_exponent(const ComposedSamples& samples, double x0,
                                    int m, std::span<const double> radii);

// Exponent along the ancestor ladder of a cell: slope of log factored
// oscillation against log cell length over levels lo_level..level(address).
// Staying on the b-adic grid sidesteps the phase wobble a free ball ladder
// picks up at finite resolution; the subtree factor has the same law at
// every level, so deterministic models come out exact.
ExponentEstimate cylinder_exponent(const CascadeRealization& real,
                                   const NodeAddress& address, int m,
                                   int lo_level, int sub_depth);

}  // namespace cascademf
