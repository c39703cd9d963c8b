#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ldlab {

// Deterministic RNG wrapper. Every stochastic routine in the lab takes an
// explicit (seed, stream) pair; a given pair produces the same draw sequence
// on every platform (mt19937_64 plus arithmetic-only transforms — no
// std::*_distribution, whose output is implementation defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{seed, stream, std::uint64_t{0x9e3779b97f4a7c15ULL}};
    eng_.seed(seq);
  }

  std::uint64_t bits() { return eng_(); }

  // Uniform on the open interval (0,1): 53-bit mantissa, offset half a ulp so
  // 0 and 1 are unreachable.
  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (deterministic, cached spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Exponential(1).
  double exponential() { return -std::log(uniform()); }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ldlab
