#pragma once

#include <cstdint>

#include "ldlab/tail_model.hpp"

namespace ldlab {

// Norming data attached to one tail model:
//   ell0  — the scale factor: ell itself for alpha < 2, the integrated form
//           ell_hat(x) = 1 + integral_1^{1+x} ell(u)/u du at alpha = 2;
//   a(n)  — the scale solving a^alpha = n * ell0(a);
//   b(n)  — the centring: 0 for alpha < 1, n * E(X) for alpha in (1,2];
//   error_rate(N) — the acceptance envelope for |P(S_n - b_n > N) - n P(X > N)|:
//           (log N) ell(N) N^{-alpha} for alpha < 1, N^{-(alpha - delta)} above.
class NormingPlan {
 public:
  explicit NormingPlan(TailModel model, double delta = 0.1);

  const TailModel& model() const { return model_; }
  double delta() const { return delta_; }

  double ell0(double x) const;
  double a(std::uint64_t n) const;
  double b(std::uint64_t n) const;
  double error_rate(double N) const;

  // Gaussian-component scale for the alpha = 2 two-term tail: the square
  // root of n times the truncated variance, made self-consistent by solving
  // B^2 = n * var(|X| <= B).  This is the scale under which the bulk of S_n
  // is a standard Gaussian; a(n) itself norms S_n to variance 2 when ell0
  // grows, so using a(n) inside the Gaussian tail would misstate the bulk.
  double bulk_scale(std::uint64_t n) const;

  // residual |a^alpha - n ell0(a)| / (n ell0(a)) of the last a(n) solve
  double solve_residual(std::uint64_t n) const;

 private:
  TailModel model_;
  double delta_;
};

}  // namespace ldlab
