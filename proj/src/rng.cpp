#include "cascademf/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace cascademf::rng {

std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

NodeKey master_key(std::uint64_t seed) {
  NodeKey k;
  k.hi = mix64(seed);
  k.lo = mix64(seed ^ 0xD1B54A32D192ED03ull);
  return k;
}

NodeKey child_key(const NodeKey& parent, unsigned digit) {
  // Absorb the digit into both halves so that sibling subtrees and
  // prefix-related paths decorrelate after one round.
  NodeKey k;
  k.lo = mix64(parent.lo ^ mix64(parent.hi + digit + 1));
  k.hi = mix64(parent.hi + (digit + 1) * kGolden) ^ parent.lo;
  return k;
}

std::uint64_t replica_seed(std::uint64_t master, std::uint64_t r) {
  return mix64(master ^ mix64(r * kGolden + 0x2545F4914F6CDD1Dull));
}

std::uint64_t Stream::next_u64() {
  std::uint64_t v = mix64(key_.lo + counter_ * kGolden);
  ++counter_;
  return mix64(v ^ key_.hi);
}

double Stream::unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::unit_pos() {
  return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
}

double Stream::normal() {
  // Marsaglia polar method; consumption order is deterministic per stream.
  for (;;) {
    double u = 2.0 * unit() - 1.0;
    double v = 2.0 * unit() - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double Stream::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be > 0");
  if (shape < 1.0) {
    // Boost to shape+1 and scale back (Marsaglia-Tsang augmentation).
    double g = gamma(shape + 1.0);
    return g * std::pow(unit_pos(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = unit_pos();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double Stream::beta(double a, double b) {
  double x = gamma(a);
  double y = gamma(b);
  return x / (x + y);
}

}  // namespace cascademf::rng
