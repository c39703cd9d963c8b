#pragma once

#include <complex>
#include <cstdint>
#include <functional>

#include "ldlab/quad.hpp"
#include "ldlab/rng.hpp"

namespace ldlab {

// Smoothing variable Y: density proportional to sinc^4(eps x / 4), so its
// characteristic function is the C^2 cubic B-spline bump supported on
// [-eps, eps] with psi(0) = 1.  Closed forms exist on both sides, which is
// what makes the smoothing checks exactly testable.
class SmoothingKernel {
 public:
  explicit SmoothingKernel(double epsilon);

  double epsilon() const { return eps_; }
  double psi(double t) const;      // B-spline bump, exactly 0 for |t| >= eps
  double density(double x) const;  // (3 eps / 8 pi) sinc^4(eps x / 4)
  double second_moment() const { return 12.0 / (eps_ * eps_); }
  double tail_beyond(double h) const;  // P(|Y| > h), quadrature + remainder
  double sample(Rng& rng) const;       // rejection from min(1, y^-4)

 private:
  double eps_;
};

// spec'd operation names, thin aliases over the kernel methods
inline double psi_Y(const SmoothingKernel& k, double t) { return k.psi(t); }
inline double sample_Y(const SmoothingKernel& k, Rng& rng) { return k.sample(rng); }

// Monte Carlo comparison of P(Z > N) against P(Z + Y > N): smoothing must
// not move a heavy tail.  h is the half-width used for the bracket
// diagnostics P(Z > N -+ h) and the kernel-tail report P(|Y| > h).
struct ShiftReport {
  std::uint64_t samples = 0;
  std::uint64_t hits_plain = 0;
  std::uint64_t hits_smoothed = 0;
  double p_plain = 0.0, ci_plain_lo = 0.0, ci_plain_hi = 0.0;
  double p_smoothed = 0.0, ci_smoothed_lo = 0.0, ci_smoothed_hi = 0.0;
  double ratio = 0.0;        // p_smoothed / p_plain
  double bracket_lo = 0.0;   // estimate of P(Z > N + h)
  double bracket_hi = 0.0;   // estimate of P(Z > N - h)
  double y_exceed_h = 0.0;   // P(|Y| > h), exact quadrature
};

ShiftReport shift_insensitivity_check(const std::function<double(Rng&)>& tail_of_Z,
                                      const SmoothingKernel& kernel, double N, double h_N,
                                      std::uint64_t samples, std::uint64_t seed = 1);

// Oscillatory integral over [-eps, eps] of
//   (e^{-itN} - e^{-it(N+g)}) psi_Y(t) (Psi(t)^n - n Psi(t)) / (it).
// The slow factor psi (Psi^n - n Psi) does not depend on N or g, so it is
// tabulated once and reused across an N-sweep.  Psi must be a characteristic
// function (Hermitian, Psi(0) = 1); only t >= 0 is ever evaluated.
class GapIntegrand {
 public:
  GapIntegrand(const std::function<cplx(double)>& Psi, std::uint64_t n,
               const SmoothingKernel& kernel, double tol = 1e-9);

  cplx slow(double t) const;  // psi(t) (Psi^n - n Psi), t in [-eps, eps]
  double epsilon() const { return eps_; }
  std::uint64_t n() const { return n_; }
  double table_error() const { return table_err_; }

 private:
  double eps_;
  std::uint64_t n_;
  double table_err_;
  ComplexTable table_;
};

cplx cf_gap_integral(const GapIntegrand& integrand, double N, double g,
                     double* abs_err = nullptr);
cplx cf_gap_integral(const std::function<cplx(double)>& Psi, std::uint64_t n, double N, double g,
                     const SmoothingKernel& kernel, double* abs_err = nullptr);

}  // namespace ldlab
