#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace wgcl {

// splitmix64 finalizer; used to derive independent stream seeds from one
// user-facing seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Portable random source. The engine (mt19937_64) is fully specified by the
// standard; the conversions below are spelled out so that draws do not depend
// on a particular standard library's distribution implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(values[i - 1], values[j]);
    }
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace wgcl
