#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace unibasis {

using NodeId = std::int32_t;
using Vector = Eigen::VectorXd;

// Dense node-signal matrix, one row per node, one column per feature
// dimension. Column-major so per-dimension slices are contiguous.
using SignalMatrix = Eigen::MatrixXd;

// File and parse failures. The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated preconditions, bad configuration, or dimension mismatches.
// The CLI maps these to exit code 1.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unrecoverable numeric failure (breakdown beyond tolerance, NaN loss).
// The CLI maps these to exit code 1.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives a named stream seed from a master seed so that every source of
// randomness in a multi-stage run is pinned by a single --seed value.
inline std::uint64_t sub_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::uint64_t state = master ^ h;
  return splitmix64(state);
}

// Unbiased draw from [0, bound). Implemented here (rejection sampling on the
// raw 64-bit stream) so results do not depend on the standard library's
// distribution implementation.
inline std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw ContractError("uniform_index: bound must be positive");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

}  // namespace unibasis
