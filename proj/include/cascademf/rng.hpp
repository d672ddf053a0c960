#pragma once

// Counter-based randomness addressed by tree position. Every node of a
// cascade tree owns an independent stream derived from (master seed, digit
// path), so a draw at a given node never depends on traversal order, tree
// depth, or the number of worker threads. Child keys are produced by
// absorbing one digit into a 128-bit running hash; stream values come from
// a splitmix-style finalizer applied to (key, counter).

#include <cstdint>

namespace cascademf::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z);  // splitmix64 finalizer (bijective)

struct NodeKey {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;

  friend bool operator==(const NodeKey&, const NodeKey&) = default;
};

NodeKey master_key(std::uint64_t seed);
NodeKey child_key(const NodeKey& parent, unsigned digit);

// Seed for replica r of an experiment keyed by one master seed.
std::uint64_t replica_seed(std::uint64_t master, std::uint64_t r);

class Stream {
 public:
  explicit Stream(const NodeKey& key) : key_(key) {}

  std::uint64_t next_u64();
  double unit();      // uniform on [0, 1)
  double unit_pos();  // uniform on (0, 1]
  double normal();    // standard normal, polar rejection method
  double gamma(double shape);  // shape > 0, unit scale
  double beta(double a, double b);

 private:
  NodeKey key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cascademf::rng
