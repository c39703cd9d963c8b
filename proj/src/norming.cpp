#include "ldlab/norming.hpp"

#include <cmath>
#include <stdexcept>

#include "ldlab/errors.hpp"

namespace ldlab {

NormingPlan::NormingPlan(TailModel model, double delta) : model_(std::move(model)), delta_(delta) {
  if (!(delta > 0.0 && delta < model_.alpha()))
    throw construction_error("delta must lie in (0, alpha)");
  if (model_.alpha() == 2.0) {
    // make sure ell_hat is computable (log-power exponents <= -1 diverge)
    (void)model_.ell().log_scale_integral(1.0);
  }
}

double NormingPlan::ell0(double x) const {
  if (model_.alpha() < 2.0) return model_.ell()(x);
  return 1.0 + model_.ell().log_scale_integral(x);
}

namespace {

// fixed point of a = (n * ell0(a))^{1/alpha}, geometric damping, bisection
// fallback for safety on slowly converging factors
double solve_a(const NormingPlan& plan, double alpha, double x_floor, std::uint64_t n) {
  double nn = static_cast<double>(n);
  auto target = [&](double a) { return std::pow(nn * plan.ell0(a), 1.0 / alpha); };
  double a = std::pow(nn, 1.0 / alpha);
  a = std::max(a, x_floor);
  for (int it = 0; it < 400; ++it) {
    double next = std::max(target(a), x_floor);
    double damped = std::sqrt(a * next);
    if (std::abs(next - a) <= 1e-10 * std::abs(next)) return next;
    a = damped;
  }
  // bisection on F(a) = alpha*log a - log(n * ell0(a))
  auto f = [&](double a_) { return alpha * std::log(a_) - std::log(nn * plan.ell0(a_)); };
  double lo = x_floor, hi = std::max(std::pow(nn, 2.0 / alpha), x_floor * 2.0);
  int guard = 0;
  while (f(hi) < 0.0) {
    hi *= 4.0;
    if (++guard > 500) throw std::runtime_error("norming scale solve: no upper bracket");
  }
  while (f(lo) > 0.0 && lo > 1e-300) lo *= 0.5;
  for (int it = 0; it < 300; ++it) {
    double mid = std::sqrt(lo * hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

double NormingPlan::a(std::uint64_t n) const {
  if (n == 0) throw std::domain_error("norming scale needs n >= 1");
  // keep the iterates inside the factor's domain (log-power needs x > 1)
  double x_floor = std::max(model_.x_min() * 1e-6, model_.ell().domain_min() * (1.0 + 1e-9) + 1e-12);
  if (x_floor <= 0.0) x_floor = 1e-12;
  return solve_a(*this, model_.alpha(), x_floor, n);
}

double NormingPlan::solve_residual(std::uint64_t n) const {
  double an = a(n);
  double rhs = static_cast<double>(n) * ell0(an);
  return std::abs(std::pow(an, model_.alpha()) - rhs) / rhs;
}

double NormingPlan::b(std::uint64_t n) const {
  if (model_.alpha() < 1.0) return 0.0;
  return static_cast<double>(n) * model_.mean();
}

double NormingPlan::error_rate(double N) const {
  if (!(N > std::max(model_.x_min(), std::exp(1.0))))
    throw std::domain_error("error_rate needs N > max(x_min, e)");
  double alpha = model_.alpha();
  if (alpha < 1.0) return std::log(N) * model_.ell()(N) * std::pow(N, -alpha);
  return std::pow(N, -(alpha - delta_));
}

double NormingPlan::bulk_scale(std::uint64_t n) const {
  if (n == 0) throw std::domain_error("bulk_scale needs n >= 1");
  double nn = static_cast<double>(n);
  auto sigma2 = [&](double x) {
    double m1 = model_.truncated_mean(x);
    return model_.truncated_second_moment(x) - m1 * m1;
  };
  double scale = std::sqrt(nn * std::max(sigma2(a(n)), 1e-300));
  for (int it = 0; it < 200; ++it) {
    double next = std::sqrt(nn * std::max(sigma2(scale), 1e-300));
    if (std::abs(next - scale) <= 1e-12 * next) return next;
    scale = std::sqrt(scale * next);
  }
  return scale;
}

}  // namespace ldlab
