#pragma once

#include <complex>

#include "ldlab/rng.hpp"
#include "ldlab/stats.hpp"

namespace ldlab {

// Alpha-stable law in the form
//   log E e^{itY} = -scale^alpha |t|^alpha (1 - i skew tan(pi alpha/2) sgn t),
// which is continuous in alpha on the supported range (0,1) u (1,2] -- the
// only discontinuity of this family sits at alpha = 1, which is excluded
// everywhere in this library.  At alpha = 2 the skew term vanishes and the
// law is exactly Gaussian with variance 2 scale^2.
struct StableLaw {
  double alpha;
  double skew;   // in [-1, 1]
  double scale;  // > 0

  StableLaw(double alpha_, double skew_, double scale_);

  // Law of the limit of normalized sums for tail weights (p, q) under the
  // norming a_n with unit tail constant: skew = p - q and
  // scale^alpha = Gamma(1-alpha) cos(pi alpha/2).  For alpha = 2 the limit
  // (under the integrated-factor norming) is Gaussian with variance 2, i.e.
  // scale = 1.  This fixes the scale convention for the whole library.
  static StableLaw limit_of(double alpha, double p, double q);

  // Gamma(1-alpha) cos(pi alpha/2); positive on (0,1) and (1,2), pole at 2
  static double tail_constant(double alpha);

  std::complex<double> cf(double t) const;
};

// one draw by the exact trigonometric (uniform + exponential) construction
double sample_stable(const StableLaw& law, Rng& rng);

// standard Gaussian upper tail
inline double gaussian_tail_bar_phi(double x) { return normal_upper_tail(x); }

// P(Y > x) by adaptive quadrature of the characteristic-function inversion
// integral; the absolute-error estimate is written to *abs_err when given
// and must come out below 1e-8 (otherwise a runtime error is thrown)
double stable_tail(const StableLaw& law, double x, double* abs_err = nullptr);

}  // namespace ldlab
