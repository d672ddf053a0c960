#include "cascademf/cascade.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>

#include "cascademf/oscillation.hpp"

namespace cascademf {

namespace {

std::int64_t checked_pow(int base, int exp, std::int64_t limit) {
  std::int64_t v = 1;
  for (int i = 0; i < exp; ++i) {
    v *= base;
    if (v > limit) return -1;
  }
  return v;
}

}  // namespace

double NodeAddress::left_endpoint(int base) const {
  double t = 0.0;
  double cell = 1.0;
  for (std::uint8_t d : digits) {
    cell /= base;
    t += d * cell;
  }
  return t;
}

std::string NodeAddress::to_string() const {
  if (digits.empty()) return "(root)";
  std::string s;
  for (std::size_t k = 0; k < digits.size(); ++k) {
    if (k > 0 && digits[k - 1] >= 10) s += '.';
    if (digits[k] >= 10) {
      s += std::to_string(static_cast<int>(digits[k]));
    } else {
      s += static_cast<char>('0' + digits[k]);
    }
  }
  return s;
}

NodeAddress address_from_string(const std::string& digits, int base) {
  NodeAddress addr;
  if (digits == "(root)" || digits.empty()) return addr;
  if (digits.find('.') != std::string::npos) {
    std::size_t pos = 0;
    while (pos < digits.size()) {
      std::size_t dot = digits.find('.', pos);
      std::string tok = digits.substr(pos, dot - pos);
      int d = std::stoi(tok);
      if (d < 0 || d >= base) throw std::invalid_argument("digit out of range");
      addr.digits.push_back(static_cast<std::uint8_t>(d));
      pos = (dot == std::string::npos) ? digits.size() : dot + 1;
    }
    return addr;
  }
  for (char c : digits) {
    int d = c - '0';
    if (d < 0 || d >= base || d > 9)
      throw std::invalid_argument("digit out of range");
    addr.digits.push_back(static_cast<std::uint8_t>(d));
  }
  return addr;
}

std::optional<NodeAddress> neighbor(const NodeAddress& addr, int base,
                                    int dir) {
  if (dir == 0) return addr;
  if (dir != 1 && dir != -1)
    throw std::invalid_argument("neighbor direction must be -1, 0 or +1");
  NodeAddress out = addr;
  // Base-b increment/decrement with carry, most significant digit first.
  for (int k = out.level() - 1; k >= 0; --k) {
    int d = out.digits[k] + dir;
    if (d >= 0 && d < base) {
      out.digits[k] = static_cast<std::uint8_t>(d);
      return out;
    }
    out.digits[k] = static_cast<std::uint8_t>((d + base) % base);
  }
  return std::nullopt;  // stepped off the unit interval
}

CascadeRealization::CascadeRealization(WeightModel model, int depth,
                                       std::uint64_t seed,
                                       std::int64_t node_budget)
    : model_(std::move(model)), depth_(depth), seed_(seed) {
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  if (checked_pow(model_.base, depth, node_budget) < 0)
    throw std::length_error("depth overflow: base^depth exceeds node budget");
}

rng::NodeKey CascadeRealization::node_key(const NodeAddress& addr) const {
  rng::NodeKey key = rng::master_key(seed_);
  for (std::uint8_t d : addr.digits) key = rng::child_key(key, d);
  return key;
}

void CascadeRealization::node_draw(const NodeAddress& addr,
                                   std::vector<complexd>& w,
                                   std::vector<double>& l) const {
  rng::Stream stream(node_key(addr));
  sample_weights(model_, stream, w, l);
}

complexd CascadeRealization::path_product_w(const NodeAddress& addr) const {
  complexd prod = 1.0;
  NodeAddress prefix;
  std::vector<complexd> w;
  std::vector<double> l;
  for (std::uint8_t d : addr.digits) {
    node_draw(prefix, w, l);
    prod *= w[d];
    prefix.digits.push_back(d);
  }
  return prod;
}

double CascadeRealization::path_product_l(const NodeAddress& addr) const {
  double prod = 1.0;
  NodeAddress prefix;
  std::vector<complexd> w;
  std::vector<double> l;
  for (std::uint8_t d : addr.digits) {
    node_draw(prefix, w, l);
    prod *= l[d];
    prefix.digits.push_back(d);
  }
  return prod;
}

GridFunction evaluate_grid(const CascadeRealization& real, Side side, int n,
                           const NodeAddress& root) {
  const int b = real.model().base;
  if (n < 0 || root.level() + n > real.depth())
    throw std::invalid_argument("evaluate_grid: level exceeds tree depth");
  std::int64_t cells = checked_pow(b, n, kDefaultNodeBudget);
  if (cells < 0) throw std::length_error("evaluate_grid: grid too large");

  std::vector<complexd> increments;
  increments.reserve(static_cast<std::size_t>(cells));

  // Per-level scratch buffers keep the traversal allocation-free.
  std::vector<std::vector<complexd>> wbuf(n);
  std::vector<std::vector<double>> lbuf(n);

  std::function<void(const rng::NodeKey&, int, complexd)> visit =
      [&](const rng::NodeKey& key, int lvl, complexd prod) {
        if (lvl == n) {
          increments.push_back(prod);
          return;
        }
        rng::Stream stream(key);
        sample_weights(real.model(), stream, wbuf[lvl], lbuf[lvl]);
        for (int i = 0; i < b; ++i) {
          complexd factor = (side == Side::W)
                                ? wbuf[lvl][i]
                                : complexd(lbuf[lvl][i], 0.0);
          visit(rng::child_key(key, static_cast<unsigned>(i)), lvl + 1,
                prod * factor);
        }
      };
  visit(real.node_key(root), 0, complexd(1.0, 0.0));

  GridFunction grid;
  grid.base = b;
  grid.level = n;
  grid.values.resize(increments.size() + 1);
  grid.values[0] = 0.0;
  KahanSumComplex acc;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    acc.add(increments[k]);
    grid.values[k + 1] = acc.value();
  }
  return grid;
}

ComposedSamples compose(const GridFunction& fw, const GridFunction& fl) {
  if (fw.level != fl.level || fw.base != fl.base)
    throw std::invalid_argument("compose: mismatched grids");
  ComposedSamples out;
  out.level = fw.level;
  out.x.resize(fl.values.size());
  out.y = fw.values;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < fl.values.size(); ++k) {
    if (std::abs(fl.values[k].imag()) > 1e-12)
      throw std::runtime_error("compose: time change has imaginary part");
    double x = fl.values[k].real();
    if (!(x > prev))
      throw std::runtime_error(
          "compose: time change is not strictly increasing");
    out.x[k] = x;
    prev = x;
  }
  return out;
}

double check_self_similarity(const CascadeRealization& real, int n) {
  if (n < 1 || n > real.depth())
    throw std::invalid_argument("check_self_similarity: bad level");
  const int b = real.model().base;
  GridFunction whole = evaluate_grid(real, Side::W, n);
  std::vector<complexd> w;
  std::vector<double> l;
  real.node_draw(NodeAddress{}, w, l);

  const std::size_t stride = (whole.size() - 1) / b;
  double worst = 0.0;
  for (int i = 0; i < b; ++i) {
    NodeAddress child;
    child.digits.push_back(static_cast<std::uint8_t>(i));
    GridFunction sub = evaluate_grid(real, Side::W, n - 1, child);
    complexd offset = whole.values[i * stride];
    for (std::size_t j = 0; j < sub.size(); ++j) {
      complexd lhs = whole.values[i * stride + j];
      complexd rhs = offset + w[i] * sub.values[j];
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

MomentReport estimate_moments(const WeightModel& model, int order_m, double q,
                              const std::vector<double>& t_points,
                              int replicas, int depth, std::uint64_t seed) {
  if (replicas < 2) throw std::invalid_argument("estimate_moments: replicas");
  MomentReport rep;
  rep.order_m = order_m;
  rep.q = q;
  rep.depth = depth;
  rep.replicas = replicas;
  rep.t_points = t_points;

  std::vector<double> zq(replicas);
  std::vector<KahanSum> laplace(t_points.size());
  for (int r = 0; r < replicas; ++r) {
    CascadeRealization real(model, depth, rng::replica_seed(seed, r));
    GridFunction grid = evaluate_grid(real, Side::W, depth);
    double z = osc_values(grid.values, order_m, LagPolicy::Auto);
    zq[r] = std::pow(z, q);
    for (std::size_t j = 0; j < t_points.size(); ++j)
      laplace[j].add(std::exp(-t_points[j] * z));
  }
  KahanSum sum, sumsq;
  double top = 0.0;
  for (double v : zq) {
    sum.add(v);
    sumsq.add(v * v);
    top = std::max(top, v);
  }
  double n = static_cast<double>(replicas);
  rep.moment_mean = sum.value() / n;
  double var =
      std::max(0.0, sumsq.value() / n - rep.moment_mean * rep.moment_mean) *
      n / (n - 1.0);
  rep.moment_std_error = std::sqrt(var / n);
  rep.heavy_tail_warning = top > 0.5 * sum.value();
  rep.laplace.resize(t_points.size());
  for (std::size_t j = 0; j < t_points.size(); ++j)
    rep.laplace[j] = laplace[j].value() / n;
  return rep;
}

// ---- exports ------------------------------------------------------------

namespace {

constexpr char kDumpMagic[4] = {'C', 'M', 'F', '1'};

void write_bytes(std::ofstream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void dump_node(const CascadeRealization& real, const NodeAddress& addr,
               std::ofstream& os, std::vector<complexd>& w,
               std::vector<double>& l) {
  real.node_draw(addr, w, l);
  for (complexd wi : w) {
    double re = wi.real(), im = wi.imag();
    write_bytes(os, &re, sizeof re);
    write_bytes(os, &im, sizeof im);
  }
  for (double li : l) write_bytes(os, &li, sizeof li);
  if (addr.level() + 1 >= real.depth()) return;
  NodeAddress child = addr;
  child.digits.push_back(0);
  for (int i = 0; i < real.model().base; ++i) {
    child.digits.back() = static_cast<std::uint8_t>(i);
    dump_node(real, child, os, w, l);
  }
}

}  // namespace

void export_realization(const CascadeRealization& real,
                        const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_bytes(os, kDumpMagic, sizeof kDumpMagic);
  std::int32_t base = real.model().base;
  std::int32_t depth = real.depth();
  std::uint64_t seed = real.seed();
  write_bytes(os, &base, sizeof base);
  write_bytes(os, &depth, sizeof depth);
  write_bytes(os, &seed, sizeof seed);
  if (depth == 0) return;
  std::vector<complexd> w;
  std::vector<double> l;
  dump_node(real, NodeAddress{}, os, w, l);
}

RealizationDump read_realization_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, kDumpMagic, 4) != 0)
    throw std::runtime_error("bad realization dump header");
  RealizationDump dump;
  std::int32_t base = 0, depth = 0;
  is.read(reinterpret_cast<char*>(&base), sizeof base);
  is.read(reinterpret_cast<char*>(&depth), sizeof depth);
  is.read(reinterpret_cast<char*>(&dump.seed), sizeof dump.seed);
  dump.base = base;
  dump.depth = depth;
  while (is) {
    std::vector<complexd> w(base);
    std::vector<double> l(base);
    for (int i = 0; i < base; ++i) {
      double re = 0, im = 0;
      is.read(reinterpret_cast<char*>(&re), sizeof re);
      is.read(reinterpret_cast<char*>(&im), sizeof im);
      w[i] = complexd(re, im);
    }
    for (int i = 0; i < base; ++i)
      is.read(reinterpret_cast<char*>(&l[i]), sizeof l[i]);
    if (!is) break;
    dump.node_w.push_back(std::move(w));
    dump.node_l.push_back(std::move(l));
  }
  return dump;
}

void export_grid_csv(const GridFunction& grid, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "t,re,im\n";
  const double cell = std::pow(static_cast<double>(grid.base), -grid.level);
  char line[128];
  for (std::size_t k = 0; k < grid.values.size(); ++k) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n",
                  static_cast<double>(k) * cell, grid.values[k].real(),
                  grid.values[k].imag());
    os << line;
  }
}

}  // namespace cascademf
