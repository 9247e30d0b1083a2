#pragma once

#include <cstdint>
#include <random>

#include "simfiber/types.hpp"

namespace simfiber {

// Derives a decorrelated child seed from a master seed and a stream index
// (splitmix64 finalizer over the combined words). Used to give every Monte
// Carlo trial / block its own independent stream while keeping the whole
// experiment a pure function of the master seed.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seedable generator with explicit, platform-independent draw algorithms.
// std::normal_distribution is implementation-defined, so Gaussians are
// produced by a hand-rolled Box-Muller transform over fixed-width uniforms
// to keep every experiment bit-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate of each pair is
  // cached so draws come in a fixed, seed-determined order.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the logarithm is finite.
    double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    double u2 = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * M_PI * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  Complex complex_gaussian(double variance) {
    double scale = std::sqrt(variance / 2.0);
    double re = gaussian();
    double im = gaussian();
    return Complex(scale * re, scale * im);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace simfiber
