#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cascademf/cascade.hpp"
#include "cascademf/numeric.hpp"
#include "cascademf/weights.hpp"

using namespace cascademf;

namespace {

NodeAddress addr(std::initializer_list<std::uint8_t> digits) {
  NodeAddress a;
  a.digits.assign(digits);
  return a;
}

std::string temp_path(const char* name) {
  return std::string("cascademf_test_") + name;
}

}  // namespace

TEST_CASE("addresses: endpoints, strings, parsing") {
  CHECK(NodeAddress{}.level() == 0);
  CHECK(NodeAddress{}.left_endpoint(2) == 0.0);
  CHECK(NodeAddress{}.to_string() == "(root)");

  NodeAddress a = addr({1, 0, 1});
  CHECK(a.level() == 3);
  CHECK(a.left_endpoint(2) == doctest::Approx(0.625));
  CHECK(a.to_string() == "101");
  CHECK(address_from_string("101", 2) == a);

  // Base-3 digits weigh 3^-k.
  CHECK(address_from_string("21", 3).left_endpoint(3) ==
        doctest::Approx(2.0 / 3.0 + 1.0 / 9.0));

  CHECK_THROWS_AS((void)address_from_string("012", 2),
                  std::invalid_argument);  // digit 2 out of range for base 2
  CHECK_THROWS_AS((void)address_from_string("0a1", 2), std::invalid_argument);
}

TEST_CASE("neighbor walks one cell and stops at the boundary") {
  NodeAddress a = addr({0, 1});  // cell [1/4, 1/2)
  auto right = neighbor(a, 2, +1);
  REQUIRE(right.has_value());
  CHECK(*right == addr({1, 0}));
  auto left = neighbor(a, 2, -1);
  REQUIRE(left.has_value());
  CHECK(*left == addr({0, 0}));

  CHECK(!neighbor(addr({0, 0}), 2, -1).has_value());
  CHECK(!neighbor(addr({1, 1}), 2, +1).has_value());
}

TEST_CASE("node draws are pure functions of (seed, address)") {
  CascadeRealization real(beta_split_model(), 8, 31415);
  std::vector<complexd> w1, w2;
  std::vector<double> l1, l2;
  NodeAddress node = addr({0, 1, 1});
  real.node_draw(node, w1, l1);
  real.node_draw(node, w2, l2);
  CHECK(w1 == w2);
  CHECK(l1 == l2);

  // Sibling node, different stream.
  real.node_draw(addr({0, 1, 0}), w2, l2);
  CHECK(w1 != w2);

  // A second realization with the same seed regenerates the same tree.
  CascadeRealization again(beta_split_model(), 8, 31415);
  again.node_draw(node, w2, l2);
  CHECK(w1 == w2);
}

TEST_CASE("path products multiply the deterministic binomial weights") {
  CascadeRealization real(binomial_model(0.3, 0.7), 6, 1);
  CHECK(real.path_product_w(NodeAddress{}) == complexd(1.0, 0.0));
  CHECK(real.path_product_l(NodeAddress{}) == 1.0);

  NodeAddress a = addr({1, 0, 1, 1});
  CHECK(real.path_product_w(a).real() ==
        doctest::Approx(0.3 * 0.7 * 0.7 * 0.7).epsilon(1e-15));
  CHECK(real.path_product_w(a).imag() == 0.0);
  CHECK(real.path_product_l(a) == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("subdivision products telescope to one across a level") {
  // All catalogue families use conservative uniform halves (or thirds), so
  // the level-n lengths are exact powers and must sum to 1 exactly.
  for (const WeightModel& m :
       {beta_split_model(), critical_model(), heavy_log_model()}) {
    CascadeRealization real(m, 5, 7);
    KahanSum total;
    int b = m.base;
    int cells = 1;
    for (int k = 0; k < 5; ++k) cells *= b;
    for (int c = 0; c < cells; ++c) {
      NodeAddress a;
      int rem = c;
      for (int k = 4; k >= 0; --k) {
        a.digits.insert(a.digits.begin(),
                        static_cast<std::uint8_t>(rem % b));
        rem /= b;
      }
      double ql = real.path_product_l(a);
      CHECK(ql > 0.0);
      CHECK(ql < 1.0);
      total.add(ql);
    }
    CHECK(total.value() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("grids of the binomial approximant match hand computation") {
  CascadeRealization real(binomial_model(0.3, 0.7), 4, 9);
  GridFunction g = evaluate_grid(real, Side::W, 2);
  REQUIRE(g.values.size() == 5);
  CHECK(g.values[0] == complexd(0.0, 0.0));
  CHECK(g.values[1].real() == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(g.values[2].real() == doctest::Approx(0.30).epsilon(1e-15));
  CHECK(g.values[3].real() == doctest::Approx(0.51).epsilon(1e-15));
  CHECK(g.values[4].real() == doctest::Approx(1.0).epsilon(1e-15));
  for (const complexd& v : g.values) CHECK(v.imag() == 0.0);
}

TEST_CASE("non-negative models produce non-decreasing real grids") {
  CascadeRealization real(beta_split_model(), 10, 77);
  GridFunction g = evaluate_grid(real, Side::W, 10);
  for (std::size_t k = 1; k < g.values.size(); ++k) {
    CHECK(g.values[k].real() >= g.values[k - 1].real());
    CHECK(g.values[k].imag() == 0.0);
  }
}

TEST_CASE("subtree grids agree with slices of the global grid") {
  CascadeRealization real(monofractal_model(), 6, 3);
  NodeAddress w = addr({1, 0});
  GridFunction global = evaluate_grid(real, Side::W, 6);
  GridFunction sub = evaluate_grid(real, Side::W, 4, w);
  complexd q = real.path_product_w(w);
  std::size_t offset = 2 * 16;  // cell [1/2, 3/4) covers indices 32..48
  for (std::size_t k = 0; k < sub.values.size(); ++k) {
    complexd lhs = global.values[offset + k] - global.values[offset];
    CHECK(std::abs(lhs - q * sub.values[k]) < 1e-14);
  }
}

TEST_CASE("self-similarity residual is at rounding level") {
  for (const WeightModel& m :
       {binomial_model(0.3, 0.7), monofractal_model(), beta_split_model()}) {
    CascadeRealization real(m, 8, 2024);
    CHECK(check_self_similarity(real, 4) <= 1e-12);
  }
}

TEST_CASE("composition pairs the two grids and guards monotonicity") {
  CascadeRealization real(beta_split_model(), 8, 11);
  GridFunction fw = evaluate_grid(real, Side::W, 8);
  GridFunction fl = evaluate_grid(real, Side::L, 8);
  ComposedSamples samples = compose(fw, fl);
  REQUIRE(samples.x.size() == fw.values.size());
  for (std::size_t k = 1; k < samples.x.size(); ++k)
    CHECK(samples.x[k] > samples.x[k - 1]);
  CHECK(samples.x.back() == fl.values.back().real());
  CHECK(samples.y.back() == fw.values.back());

  // A stalled abscissa is rejected.
  GridFunction bad = fl;
  bad.values[3] = bad.values[2];
  CHECK_THROWS_AS((void)compose(fw, bad), std::runtime_error);
  // So are mismatched levels.
  GridFunction shallow = evaluate_grid(real, Side::L, 7);
  CHECK_THROWS_AS((void)compose(fw, shallow), std::invalid_argument);
}

TEST_CASE("moment estimates: conservative mass is exactly one") {
  MomentReport rep =
      estimate_moments(beta_split_model(), 1, 1.0, {1.0, 10.0}, 32, 6, 5);
  CHECK(rep.moment_mean == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!rep.heavy_tail_warning);
  REQUIRE(rep.laplace.size() == 2);
  // Z = 1 a.s., so psi(t) = exp(-t).
  CHECK(rep.laplace[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(rep.laplace[1] == doctest::Approx(std::exp(-10.0)).epsilon(1e-9));

  CHECK_THROWS_AS(
      (void)estimate_moments(beta_split_model(), 1, 1.0, {}, 1, 6, 5),
      std::invalid_argument);
}

TEST_CASE("realization dump round trip") {
  CascadeRealization real(beta_split_model(), 3, 400);
  std::string path = temp_path("dump.bin");
  export_realization(real, path);
  RealizationDump dump = read_realization_dump(path);
  CHECK(dump.base == 2);
  CHECK(dump.depth == 3);
  CHECK(dump.seed == 400);
  // Pre-order over levels 0..2 of a binary tree: 1 + 2 + 4 nodes.
  REQUIRE(dump.node_w.size() == 7);
  REQUIRE(dump.node_l.size() == 7);

  std::vector<complexd> w;
  std::vector<double> l;
  real.node_draw(NodeAddress{}, w, l);
  CHECK(dump.node_w[0] == w);
  CHECK(dump.node_l[0] == l);
  // Pre-order: root, 0, 00, 01, 1, 10, 11.
  real.node_draw(addr({0, 1}), w, l);
  CHECK(dump.node_w[3] == w);
  real.node_draw(addr({1, 0}), w, l);
  CHECK(dump.node_w[5] == w);
  std::remove(path.c_str());
}

TEST_CASE("grid CSV has one row per grid point") {
  CascadeRealization real(binomial_model(0.3, 0.7), 3, 0);
  GridFunction g = evaluate_grid(real, Side::W, 3);
  std::string path = temp_path("grid.csv");
  export_grid_csv(g, path);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "t,re,im");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == g.values.size());
  std::remove(path.c_str());
}

TEST_CASE("node budget rejects grids that cannot be materialized") {
  CHECK_THROWS_AS(CascadeRealization(binomial_model(0.3, 0.7), 25, 1),
                  std::length_error);
  // A tighter explicit budget trips earlier.
  CHECK_THROWS_AS(CascadeRealization(binomial_model(0.3, 0.7), 11, 1, 1 << 10),
                  std::length_error);
}
