#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tse {

// Deterministic random stream. Streams are keyed by (seed, name, index) so
// that pair i of a suite can be regenerated in isolation and in any order.
//
// Key derivation: k = mix(seed ^ mix(fnv1a(name))); k = mix(k + mix(index + 1)),
// where mix is the SplitMix64 finalizer. The key seeds std::mt19937_64, whose
// output sequence is fixed by the C++ standard. Bounded integers are drawn by
// rejection sampling here rather than through std::uniform_int_distribution,
// whose algorithm is implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : engine_(key) {}

  static RandomStream derive(std::uint64_t seed, std::string_view name, std::uint64_t index);

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

}  // namespace tse
