#pragma once

// Deterministic random sources: mt19937_64 streams with splitmix64-derived
// sub-seeds (one independent stream per work batch, so results do not depend
// on thread count) and an explicit Box-Muller normal transform. The standard
// distributions are avoided because their algorithms are unspecified.

#include <cmath>
#include <cstdint>
#include <random>

namespace fermisea {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_subseed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on (0, 1]; never returns 0 so logs are safe.
  double uniform() {
    const std::uint64_t r = eng_();
    return (static_cast<double>(r >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 6.28318530717958647692 * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

  // Poisson count by Knuth's product method; fine for the small means used
  // here (exp(-lambda) must stay normal, i.e. lambda below ~700).
  std::size_t poisson(double lambda) {
    if (!(lambda > 0.0)) return 0;
    const double limit = std::exp(-lambda);
    std::size_t k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  // Uniform direction on the unit sphere.
  void unit_vector(double out[3]) {
    const double z = 2.0 * uniform() - 1.0;
    const double phi = 6.28318530717958647692 * uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    out[0] = s * std::cos(phi);
    out[1] = s * std::sin(phi);
    out[2] = z;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace fermisea
