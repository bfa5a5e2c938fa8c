#pragma once

#include <cstdint>
#include <random>

namespace brl {

/// Seeded random stream. One stream per chain / experiment cell; never shared
/// across threads. Substreams are derived deterministically so that parallel
/// cells reproduce independently of scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  double normal() { return normal_(gen_); }
  double uniform() { return uniform_(gen_); }

  /// Gamma with given shape and *scale* (mean = shape * scale).
  double gamma(double shape, double scale) {
    std::gamma_distribution<double> d(shape, scale);
    return d(gen_);
  }

  /// Inverse-gamma with shape a and rate b (density ∝ x^{-a-1} e^{-b/x}).
  double inverse_gamma(double shape, double rate) {
    return rate / gamma(shape, 1.0);
  }

  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return gen_; }

  /// Deterministic substream seed for cell `index` (splitmix64 mix).
  static std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  RngStream substream(std::uint64_t index) const {
    return RngStream(substream_seed(seed_, index));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace brl
