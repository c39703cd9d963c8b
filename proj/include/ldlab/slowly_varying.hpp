#pragma once

#include <complex>
#include <functional>
#include <string>

namespace ldlab {

// Slowly varying factor ell in a regularly varying tail ell(x) x^{-alpha}:
// ell(lambda*x)/ell(x) -> 1 as x -> infinity for every fixed lambda > 0.
// Built-in kinds are a positive constant and (log x)^gamma; a user callable
// is accepted for experiments, at the cost of slower tail quadrature (the
// built-in kinds admit analytic continuation and closed-form integrals).
class SlowlyVarying {
 public:
  enum class Kind { constant, log_power, custom };

  static SlowlyVarying constant(double c);
  static SlowlyVarying log_power(double gamma);
  static SlowlyVarying custom(std::function<double(double)> f, std::string label);

  double operator()(double x) const;
  // d ell / dx; central finite difference for custom callables
  double derivative(double x) const;

  Kind kind() const { return kind_; }
  double param() const { return param_; }  // c or gamma
  const std::string& label() const { return label_; }

  // integral over [1, 1+x] of ell(u)/u du; the alpha=2 norming uses 1 + this.
  // Closed form for the built-in kinds, adaptive quadrature for custom.
  double log_scale_integral(double x) const;

  // infimum of the usable evaluation domain (0 for constant, 1 for log-power)
  double domain_min() const;

  // built-in kinds extend analytically to the right half plane, which the
  // characteristic-function quadrature exploits via contour rotation
  bool analytic() const { return kind_ != Kind::custom; }
  std::complex<double> eval_complex(std::complex<double> z) const;
  std::complex<double> derivative_complex(std::complex<double> z) const;

  // ell(lambda*x)/ell(x), the quantity whose convergence to 1 defines slow
  // variation; exposed so property tests can probe it on growing grids
  double variation_ratio(double lambda, double x) const;

 private:
  SlowlyVarying(Kind k, double param, std::function<double(double)> f, std::string label);

  Kind kind_;
  double param_ = 0.0;
  std::function<double(double)> fn_;
  std::string label_;
};

}  // namespace ldlab
