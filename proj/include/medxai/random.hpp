#ifndef MEDXAI_RANDOM_HPP
#define MEDXAI_RANDOM_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace medxai {

// Seeded generator whose output is identical across standard libraries:
// only the raw mt19937_64 stream is used, never std::*_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); rejection sampling removes modulo bias.
  std::size_t below(std::size_t n);

  bool bit() { return (next() >> 63) != 0; }

  // Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Child seed for a named stream. Streams with different names are
// independent, so adding a consumer never perturbs the others.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace medxai

#endif  // MEDXAI_RANDOM_HPP
