#pragma once

// Scaling measurements on finite-depth realizations: per-cylinder
// oscillation tables, partition sums and their roots t_n(q), extrapolated
// scaling exponents with replica medians, coarse spectra by exponent
// binning, and sampling from the q-weighted cell measure.

#include <cstdint>
#include <string>
#include <vector>

#include "cascademf/analytic_spectrum.hpp"
#include "cascademf/cascade.hpp"
#include "cascademf/oscillation.hpp"

namespace cascademf {

// Per-cell oscillation O(w) and length Lambda(w) of every level-n cylinder
// of one realization, in digit order. O(w) factors exactly as |Q_W(w)|
// times the oscillation of the depth-`sub_depth` subtree approximant, and
// Lambda(w) as Q_L(w) times the subtree length mass. Cells with zero
// oscillation are counted, not stored: they contribute nothing to any
// partition sum.
struct CylinderTable {
  int m = 1;
  int level = 0;
  int sub_depth = 0;
  std::vector<double> log_osc;
  std::vector<double> log_len;
  std::size_t zero_cells = 0;
  std::size_t total_cells = 0;
};

// One pass over the tree. sub_depth 0 scores each cell by its bare weight
// product, which is exact for conservative monotone models; higher orders
// need base^sub_depth + 1 > m grid points per cell and throw otherwise.
CylinderTable collect_cylinders(const CascadeRealization& real, int m,
                                int level, int sub_depth);

// Same table measured directly from composed samples: cell w covers the
// sample indices [w*stride, (w+1)*stride] and its length is the abscissa
// difference. No factorization is assumed, so this works on any sampled
// function, in particular a cascade with a smooth addend. Requires the
// sample count minus one to be divisible by base^level.
CylinderTable sample_cylinders(const ComposedSamples& samples, int base,
                               int m, int level);

// log of theta(q, t) = sum_w O(w)^q Lambda(w)^{-t}. Summed directly when
// every term fits a double, in shifted log space otherwise.
double log_partition_theta(const CylinderTable& table, double q, double t);

// Root in t of theta(q, t) = 1 (log theta is strictly increasing in t);
// NaN when the table has no live cells.
double partition_root(const CylinderTable& table, double q);

struct EmpiricalTauConfig {
  int m = 1;
  int sub_depth = 0;
  std::vector<int> levels;  // resolutions entering the extrapolation
  std::vector<double> q_grid;
};

// Extrapolated scaling exponents. Per level, the median of the partition
// roots across realizations; then the 1/n -> 0 intercept of a least squares
// fit of t_n(q) against 1/n. std_error carries the intercept's standard
// error and tau_prime a centered difference on the q grid. Levels where
// fewer than half the realizations produced a root are skipped and noted.
SpectrumCurve empirical_tau(const std::vector<CascadeRealization>& reals,
                            const EmpiricalTauConfig& config);

struct CoarseBin {
  double h_lo = 0.0;
  double h_hi = 0.0;
  std::size_t count = 0;
  // ln(count) / -(mean log length of the bin's cells): the box-counting
  // dimension estimate the bin supports at this resolution.
  double d_hat = 0.0;
};

// Histogram of the coarse exponents e(w) = log O(w) / log Lambda(w) over
// the live cells of one table. Dead cells land in zero_cells.
struct CoarseSpectrum {
  int level = 0;
  int m = 1;
  double bin_width = 0.1;
  double min_exponent = 0.0;
  double max_exponent = 0.0;
  std::size_t zero_cells = 0;
  std::vector<CoarseBin> bins;  // empty bins are dropped
};

CoarseSpectrum coarse_spectrum(const CylinderTable& table, double bin_width);

// Smallest coarse exponent among live cells; NaN when all cells are dead.
double min_coarse_exponent(const CylinderTable& table);

struct MuAtom {
  NodeAddress address;
  double weight = 0.0;  // normalized cell mass
};

struct MuSample {
  double q = 0.0;
  double tau_q = 0.0;
  int level = 0;
  int trunc_depth = 0;
  double log_norm = 0.0;  // log of the unnormalized total mass
  // Largest relative violation of mu(parent) = sum over children, an exact
  // algebraic identity for the truncated weights (rounding only).
  double max_parent_residual = 0.0;
  std::vector<MuAtom> support;      // every level cell, digit order
  std::vector<NodeAddress> draws;   // sampled cells
};

// Cell measure mu_q at one resolution: cell w carries |Q_W(w)|^q
// Q_L(w)^{-tau_q} Y_q(w), with Y_q(w) the subtree partition sum truncated
// trunc_depth levels below w, normalized over the level. Draws are
// categorical samples from the normalized weights, deterministic in the
// seed. Only meaningful for q inside J; throws std::domain_error outside.
MuSample sample_mu_q(const CascadeRealization& real, const IntervalJ& J,
                     double q, double tau_q, int level, int trunc_depth,
                     int draws, std::uint64_t seed);

// log of the partition sum over a greedy packing of disjoint radius-r
// balls with centers advancing left to right. Cross-checks the cylinder
// sums against a grid-free covering.
double log_ball_partition(const ComposedSamples& samples, int m, double q,
                          double t, double radius);

}  // namespace cascademf
