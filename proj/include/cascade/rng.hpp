#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace cascade {

// All randomness in the project flows through Rng instances seeded either
// directly or by derive_seed(global, name). Named derivation keeps every
// pipeline stage independently reproducible from one global seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name);

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  double uniform_real(); // [0, 1)

  double normal(double stddev);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_index(i)]);
    }
  }

  // k distinct values drawn uniformly from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

} // namespace cascade
