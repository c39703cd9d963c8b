#include "ldlab/slowly_varying.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "ldlab/errors.hpp"
#include "ldlab/quad.hpp"

namespace ldlab {

SlowlyVarying::SlowlyVarying(Kind k, double param, std::function<double(double)> f,
                             std::string label)
    : kind_(k), param_(param), fn_(std::move(f)), label_(std::move(label)) {}

SlowlyVarying SlowlyVarying::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c))
    throw construction_error("slowly varying constant must be positive and finite");
  return SlowlyVarying(Kind::constant, c, {}, "const");
}

SlowlyVarying SlowlyVarying::log_power(double gamma) {
  if (!std::isfinite(gamma)) throw construction_error("log-power exponent must be finite");
  return SlowlyVarying(Kind::log_power, gamma, {}, "logpow");
}

SlowlyVarying SlowlyVarying::custom(std::function<double(double)> f, std::string label) {
  if (!f) throw construction_error("custom slowly varying callable is empty");
  return SlowlyVarying(Kind::custom, 0.0, std::move(f), std::move(label));
}

double SlowlyVarying::operator()(double x) const {
  switch (kind_) {
    case Kind::constant:
      return param_;
    case Kind::log_power:
      if (x <= 1.0) throw std::domain_error("log-power factor needs x > 1");
      return std::pow(std::log(x), param_);
    case Kind::custom:
      return fn_(x);
  }
  return 0.0;  // unreachable
}

double SlowlyVarying::derivative(double x) const {
  switch (kind_) {
    case Kind::constant:
      return 0.0;
    case Kind::log_power: {
      if (x <= 1.0) throw std::domain_error("log-power factor needs x > 1");
      // d/dx (log x)^g = g (log x)^{g-1} / x
      return param_ * std::pow(std::log(x), param_ - 1.0) / x;
    }
    case Kind::custom: {
      double h = std::max(1e-6, 1e-6 * x);
      return (fn_(x + h) - fn_(x - h)) / (2.0 * h);
    }
  }
  return 0.0;  // unreachable
}

double SlowlyVarying::log_scale_integral(double x) const {
  if (!(x >= 0.0)) throw std::domain_error("log_scale_integral needs x >= 0");
  if (x == 0.0) return 0.0;
  switch (kind_) {
    case Kind::constant:
      return param_ * std::log1p(x);
    case Kind::log_power: {
      // integral of (log u)^g / u over [1, 1+x] = (log(1+x))^{g+1} / (g+1),
      // finite only for g > -1
      if (param_ <= -1.0)
        throw construction_error("log-power integral diverges for exponent <= -1");
      return std::pow(std::log1p(x), param_ + 1.0) / (param_ + 1.0);
    }
    case Kind::custom: {
      auto f = [this](double u) { return fn_(u) / u; };
      return integrate_adaptive(f, 1.0, 1.0 + x, 1e-11);
    }
  }
  return 0.0;  // unreachable
}

double SlowlyVarying::domain_min() const {
  switch (kind_) {
    case Kind::constant:
      return 0.0;
    case Kind::log_power:
      return param_ == 0.0 ? 0.0 : 1.0;
    case Kind::custom:
      return 0.0;
  }
  return 0.0;  // unreachable
}

std::complex<double> SlowlyVarying::eval_complex(std::complex<double> z) const {
  switch (kind_) {
    case Kind::constant:
      return {param_, 0.0};
    case Kind::log_power:
      return std::pow(std::log(z), std::complex<double>(param_, 0.0));
    case Kind::custom:
      throw std::logic_error("custom slowly varying factor has no analytic continuation");
  }
  return {};  // unreachable
}

std::complex<double> SlowlyVarying::derivative_complex(std::complex<double> z) const {
  switch (kind_) {
    case Kind::constant:
      return {0.0, 0.0};
    case Kind::log_power:
      return param_ * std::pow(std::log(z), std::complex<double>(param_ - 1.0, 0.0)) / z;
    case Kind::custom:
      throw std::logic_error("custom slowly varying factor has no analytic continuation");
  }
  return {};  // unreachable
}

double SlowlyVarying::variation_ratio(double lambda, double x) const {
  return (*this)(lambda * x) / (*this)(x);
}

}  // namespace ldlab
