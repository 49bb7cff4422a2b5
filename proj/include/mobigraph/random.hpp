#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mobigraph {

// Seeded generator whose output sequence is identical on every platform.
// The standard distributions are implementation-defined, so sampling goes
// through the helpers below instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Fans one user seed out to independent, labelled stage seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

}  // namespace mobigraph
