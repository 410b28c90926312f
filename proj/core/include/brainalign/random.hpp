#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace brainalign {

/// Seeded generator whose outputs depend only on the seed: the standard
/// distributions are implementation-defined, so bounded integers and normals
/// are derived from raw mt19937_64 output here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed from a base seed and a salt.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace brainalign
