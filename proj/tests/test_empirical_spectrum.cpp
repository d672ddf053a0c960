#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cascademf/analytic_spectrum.hpp"
#include "cascademf/cascade.hpp"
#include "cascademf/empirical_spectrum.hpp"
#include "cascademf/weights.hpp"

using namespace cascademf;

namespace {

double binomial_tau(double q) {
  return -std::log2(std::pow(0.3, q) + std::pow(0.7, q));
}

ComposedSamples composed_bell(int depth, std::uint64_t seed) {
  CascadeRealization real(beta_split_model(), depth, seed);
  return compose(evaluate_grid(real, Side::W, depth),
                 evaluate_grid(real, Side::L, depth));
}

}  // namespace

TEST_CASE("cylinder tables of the binomial are exact weight products") {
  CascadeRealization real(binomial_model(0.3, 0.7), 6, 1);
  CylinderTable table = collect_cylinders(real, 1, 2, 0);
  CHECK(table.total_cells == 4);
  CHECK(table.zero_cells == 0);
  REQUIRE(table.log_osc.size() == 4);
  // Digit order 00, 01, 10, 11.
  CHECK(table.log_osc[0] == doctest::Approx(std::log(0.09)).epsilon(1e-14));
  CHECK(table.log_osc[1] == doctest::Approx(std::log(0.21)).epsilon(1e-14));
  CHECK(table.log_osc[2] == doctest::Approx(std::log(0.21)).epsilon(1e-14));
  CHECK(table.log_osc[3] == doctest::Approx(std::log(0.49)).epsilon(1e-14));
  for (double ll : table.log_len)
    CHECK(ll == doctest::Approx(std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("deterministic partition roots reproduce tau at every level") {
  CascadeRealization real(binomial_model(0.3, 0.7), 8, 1);
  for (int n : {1, 3, 5, 8}) {
    CylinderTable table = collect_cylinders(real, 1, n, 0);
    for (double q : {-1.0, 0.5, 2.0, 4.0}) {
      CHECK(partition_root(table, q) ==
            doctest::Approx(binomial_tau(q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("partition sums: log-space path matches direct summation") {
  CylinderTable table;
  table.level = 1;
  table.total_cells = 3;
  table.log_osc = {std::log(0.2), std::log(0.5), std::log(0.1)};
  table.log_len = {std::log(0.25), std::log(0.5), std::log(0.25)};
  double direct = std::pow(0.2, 2.0) * std::pow(0.25, -0.5) +
                  std::pow(0.5, 2.0) * std::pow(0.5, -0.5) +
                  std::pow(0.1, 2.0) * std::pow(0.25, -0.5);
  CHECK(log_partition_theta(table, 2.0, 0.5) ==
        doctest::Approx(std::log(direct)).epsilon(1e-13));

  // Magnitudes far outside double range still come back finite.
  CylinderTable tiny = table;
  for (double& lo : tiny.log_osc) lo -= 500.0;
  CHECK(std::isfinite(log_partition_theta(tiny, 2.0, 0.5)));
  CHECK(log_partition_theta(tiny, 2.0, 0.5) ==
        doctest::Approx(std::log(direct) - 1000.0).epsilon(1e-12));
}

TEST_CASE("theta is strictly increasing in t and the root is a root") {
  CascadeRealization real(beta_split_model(), 8, 21);
  CylinderTable table = collect_cylinders(real, 1, 5, 0);
  double q = 1.7;
  double prev = log_partition_theta(table, q, -2.0);
  for (double t : {-1.0, 0.0, 1.0, 2.0}) {
    double cur = log_partition_theta(table, q, t);
    CHECK(cur > prev);
    prev = cur;
  }
  double root = partition_root(table, q);
  CHECK(std::abs(log_partition_theta(table, q, root)) <= 1e-10);

  CylinderTable empty;
  empty.total_cells = 4;
  empty.zero_cells = 4;
  CHECK(std::isnan(partition_root(empty, 1.0)));
}

TEST_CASE("sampled cylinders match factored cylinders on a bell run") {
  // Uniform subdivision puts the composed abscissae on the b-adic grid, so
  // the sample-sliced table must agree with the factored one cell by cell.
  const int depth = 8, level = 4;
  CascadeRealization real(beta_split_model(), depth, 33);
  ComposedSamples samples = composed_bell(depth, 33);
  CylinderTable factored = collect_cylinders(real, 1, level, depth - level);
  CylinderTable sliced = sample_cylinders(samples, 2, 1, level);
  REQUIRE(factored.log_osc.size() == sliced.log_osc.size());
  for (std::size_t k = 0; k < factored.log_osc.size(); ++k) {
    CHECK(factored.log_osc[k] ==
          doctest::Approx(sliced.log_osc[k]).epsilon(1e-12));
    CHECK(factored.log_len[k] ==
          doctest::Approx(sliced.log_len[k]).epsilon(1e-12));
  }

  CHECK_THROWS_AS((void)sample_cylinders(samples, 2, 1, 9),
                  std::invalid_argument);  // 2^9 cells, only 2^8 intervals
}

TEST_CASE("empirical tau on a deterministic model hits the closed form") {
  std::vector<CascadeRealization> reals;
  reals.emplace_back(binomial_model(0.3, 0.7), 8, 4);
  EmpiricalTauConfig cfg;
  cfg.levels = {4, 5, 6, 7, 8};
  cfg.q_grid = {-1.0, 0.0, 0.5, 1.0, 2.0, 3.0};
  SpectrumCurve curve = empirical_tau(reals, cfg);
  REQUIRE(curve.q == cfg.q_grid);
  for (std::size_t k = 0; k < curve.q.size(); ++k) {
    CHECK(curve.tau[k] ==
          doctest::Approx(binomial_tau(curve.q[k])).epsilon(1e-10));
    CHECK(curve.std_error[k] <= 1e-10);
    CHECK(static_cast<bool>(curve.in_J[k]));
  }
  CHECK(curve.source == CurveSource::Empirical);
}

TEST_CASE("coarse spectra: exponent range and bin bookkeeping") {
  CascadeRealization real(binomial_model(0.3, 0.7), 8, 2);
  CylinderTable table = collect_cylinders(real, 1, 8, 0);
  CoarseSpectrum spec = coarse_spectrum(table, 0.1);
  const double lo = std::log(0.7) / std::log(0.5);
  const double hi = std::log(0.3) / std::log(0.5);
  CHECK(spec.min_exponent == doctest::Approx(lo).epsilon(1e-12));
  CHECK(spec.max_exponent == doctest::Approx(hi).epsilon(1e-12));
  CHECK(min_coarse_exponent(table) ==
        doctest::Approx(spec.min_exponent).epsilon(1e-14));

  std::size_t counted = 0;
  for (std::size_t k = 0; k < spec.bins.size(); ++k) {
    const CoarseBin& bin = spec.bins[k];
    counted += bin.count;
    CHECK(bin.count > 0);  // empty bins are dropped
    CHECK(bin.h_lo < bin.h_hi);
    if (k > 0) CHECK(bin.h_lo >= spec.bins[k - 1].h_lo);
    CHECK(bin.d_hat >= 0.0);
    CHECK(bin.d_hat < 1.2);  // level-8 box-count estimate stays near [0,1]
  }
  CHECK(counted == table.total_cells - table.zero_cells);
  CHECK(counted == 256);
}

TEST_CASE("mu_q cell measures: normalization, consistency, reproducibility") {
  WeightModel bell = beta_split_model();
  CascadeRealization real(bell, 10, 55);
  IntervalJ J = interval_J(bell);
  for (double q : {1.0, 2.0}) {
    MuSample mu = sample_mu_q(real, J, q, tau(bell, q), 5, 3, 8, 97);
    REQUIRE(mu.support.size() == 32);
    KahanSum total;
    for (const MuAtom& atom : mu.support) {
      CHECK(atom.weight >= 0.0);
      CHECK(atom.address.level() == 5);
      total.add(atom.weight);
    }
    CHECK(total.value() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mu.max_parent_residual <= 1e-12);
    REQUIRE(mu.draws.size() == 8);
    for (const NodeAddress& a : mu.draws) CHECK(a.level() == 5);

    MuSample again = sample_mu_q(real, J, q, tau(bell, q), 5, 3, 8, 97);
    CHECK(again.draws == mu.draws);
  }
  CHECK_THROWS_AS(
      (void)sample_mu_q(real, J, 10.0, tau(bell, 3.9), 5, 3, 8, 97),
      std::domain_error);
}

TEST_CASE("mu_q weights concentrate where q says they should") {
  // Larger q favors cells with larger |Q_W|: for the binomial, the
  // all-ones cell (repeated 0.7 weights) must outweigh the all-zeros cell.
  WeightModel bino = binomial_model(0.3, 0.7);
  CascadeRealization real(bino, 8, 3);
  IntervalJ J = interval_J(bino);
  MuSample mu = sample_mu_q(real, J, 3.0, tau(bino, 3.0), 4, 2, 0, 1);
  CHECK(mu.support.front().weight < mu.support.back().weight);
}

TEST_CASE("ball partitions pack the expected number of balls") {
  ComposedSamples samples = composed_bell(8, 12);
  // q = 0, t = 0 counts the balls with nonzero oscillation; radius 2^-6
  // packs exactly 32 of them into the unit interval.
  double count = std::exp(log_ball_partition(samples, 1, 0.0, 0.0, 1.0 / 64));
  CHECK(count == doctest::Approx(32.0).epsilon(1e-9));
  // Increasing t inflates the sum: every ball diameter is below one.
  CHECK(log_ball_partition(samples, 1, 1.0, 1.0, 1.0 / 64) >
        log_ball_partition(samples, 1, 1.0, 0.0, 1.0 / 64));
  CHECK_THROWS_AS((void)log_ball_partition(samples, 1, 1.0, 0.0, -0.5),
                  std::invalid_argument);
}
