#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace ealgan {

// xoshiro256** seeded through splitmix64. This algorithm is pinned: every
// stream in the library (initialization, noise, shuffles, splits, synthetic
// data) derives from it, and changing it breaks reproducibility of recorded
// runs. Distributions are implemented here rather than with <random>, whose
// distribution algorithms are implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t next();

  // Uniform in [0, 1), 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal (Marsaglia polar method).
  double normal();
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // Independent child stream; the parent advances by one draw.
  SeededRng fork();

 private:
  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ealgan
