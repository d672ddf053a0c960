#pragma once

// Finite-depth cascade realizations. A realization is fully determined by
// (model, depth, master seed): the weight draw at a tree node is a pure
// function of the master seed and the node's digit path, so any subtree can
// be regenerated in isolation and results do not depend on evaluation
// order. Grids of the level-n approximants are produced by prefix
// summation of the per-cell increments.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cascademf/numeric.hpp"
#include "cascademf/rng.hpp"
#include "cascademf/weights.hpp"

namespace cascademf {

// Digit path from the root; digits[k] is the branch taken at depth k.
struct NodeAddress {
  std::vector<std::uint8_t> digits;

  int level() const { return static_cast<int>(digits.size()); }
  // Left endpoint of the addressed b-adic cell.
  double left_endpoint(int base) const;
  std::string to_string() const;  // digit string, "(root)" when empty

  friend bool operator==(const NodeAddress&, const NodeAddress&) = default;
};

NodeAddress address_from_string(const std::string& digits, int base);

// Address shifted by one cell at the same level; disengaged at the ends of
// the unit interval. dir must be +1 or -1.
std::optional<NodeAddress> neighbor(const NodeAddress& addr, int base,
                                    int dir);

inline constexpr std::int64_t kDefaultNodeBudget = std::int64_t{1} << 24;

class CascadeRealization {
 public:
  // Throws std::length_error when base^depth exceeds the node budget.
  CascadeRealization(WeightModel model, int depth, std::uint64_t seed,
                     std::int64_t node_budget = kDefaultNodeBudget);

  const WeightModel& model() const { return model_; }
  int depth() const { return depth_; }
  std::uint64_t seed() const { return seed_; }

  rng::NodeKey node_key(const NodeAddress& addr) const;
  // The (W, L) vectors drawn at a node, regenerated on demand.
  void node_draw(const NodeAddress& addr, std::vector<complexd>& w,
                 std::vector<double>& l) const;

  // Products of the weight coordinates along the path to addr.
  complexd path_product_w(const NodeAddress& addr) const;
  double path_product_l(const NodeAddress& addr) const;

 private:
  WeightModel model_;
  int depth_;
  std::uint64_t seed_;
};

// Level-n grid of a cascade approximant on [0,1]: values[k] is the
// approximant at k * base^-n, values[0] == 0.
struct GridFunction {
  int base = 2;
  int level = 0;
  std::vector<complexd> values;

  std::size_t size() const { return values.size(); }
};

// Grid of the level-n approximant of the chosen side, for the subtree
// rooted at `root` (empty root = whole cascade). Increments over the b^n
// cells are exact weight products; the prefix sum is compensated.
GridFunction evaluate_grid(const CascadeRealization& real, Side side, int n,
                           const NodeAddress& root = {});

// Pairs (F_L(t), F_W(t)) over the level-n grid: the graph of the composed
// cascade against its intrinsic time change. Throws when the abscissae are
// not strictly increasing.
struct ComposedSamples {
  int level = 0;
  std::vector<double> x;
  std::vector<complexd> y;
};

ComposedSamples compose(const GridFunction& fw, const GridFunction& fl);

// Maximum residual of the branch decomposition at level n: the level-n grid
// restricted to each first-level cell must coincide with the offset, scaled
// level-(n-1) grid of that child subtree.
double check_self_similarity(const CascadeRealization& real, int n);

struct MomentReport {
  int order_m = 1;
  double q = 2.0;
  int depth = 0;
  int replicas = 0;
  double moment_mean = 0.0;
  double moment_std_error = 0.0;
  // Laplace transform estimates psi(t) = E exp(-t Z) at requested points.
  std::vector<double> t_points;
  std::vector<double> laplace;
  // Set when one replica contributes more than half of the q-th moment sum
  // (the estimate is then dominated by a single heavy draw).
  bool heavy_tail_warning = false;
};

// Monte Carlo moments of the total oscillation Z of the depth-limited
// weight-side approximant across independent replicas.
MomentReport estimate_moments(const WeightModel& model, int order_m, double q,
                              const std::vector<double>& t_points,
                              int replicas, int depth, std::uint64_t seed);

// Export helpers. The binary dump stores a fixed header (magic, base,
// depth, seed) followed by depth-first pre-order node records of the (W, L)
// draws as little-endian doubles; the CSV holds the level-n weight-side
// grid as rows t,re,im.
void export_realization(const CascadeRealization& real,
                        const std::string& path);
void export_grid_csv(const GridFunction& grid, const std::string& path);

// Reads back a realization dump; used to cross-check the writer.
struct RealizationDump {
  int base = 0;
  int depth = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<complexd>> node_w;  // pre-order
  std::vector<std::vector<double>> node_l;
};
RealizationDump read_realization_dump(const std::string& path);

}  // namespace cascademf
