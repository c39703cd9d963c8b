#include "ldlab/tail_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ldlab/errors.hpp"
#include "ldlab/quad.hpp"

namespace ldlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TailModel::TailModel(double alpha, double p, double q, SlowlyVarying ell, double x_min,
                     bool centered)
    : alpha_(alpha), p_(p), q_(q), x_min_(x_min), ell_(std::move(ell)), centered_(centered) {
  if (alpha == 1.0) throw alpha_one_error();
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw construction_error("alpha must lie in (0,1) or (1,2]");
  if (!(p > 0.0 && p <= 1.0) || q < 0.0 || std::abs(p + q - 1.0) > 1e-12)
    throw construction_error("tail weights need p in (0,1], q >= 0, p+q = 1");
  if (!(x_min > 0.0) || x_min <= ell_.domain_min())
    throw construction_error("x_min must be positive and inside the factor's domain");

  double ell_xm = ell_(x_min_);
  if (!(ell_xm > 0.0) || !std::isfinite(ell_xm))
    throw construction_error("slowly varying factor must be positive at x_min");

  double total_tail = ell_xm * std::pow(x_min_, -alpha_);  // (p+q) * ell * x^{-a}
  if (total_tail > 1.0 + 1e-12)
    throw construction_error("tail mass exceeds 1 at x_min; increase x_min");
  tail_mass_right_ = p_ * ell_xm * std::pow(x_min_, -alpha_);
  tail_mass_left_ = q_ * ell_xm * std::pow(x_min_, -alpha_);
  interior_mass_ = std::max(0.0, 1.0 - tail_mass_right_ - tail_mass_left_);
  level_a_ = interior_mass_ / (2.0 * x_min_);

  // the tail density must be nonnegative, i.e. the survival function
  // decreasing; scan a geometric grid (the built-in kinds are monotone
  // between grid points, and custom factors get a best-effort check)
  for (double y = x_min_; y < x_min_ * 1e7; y *= 1.37) {
    if (tail_density_rho(y) < 0.0)
      throw construction_error("tail density negative; survival function not decreasing "
                               "(raise x_min above the factor's hump)");
  }

  if (centered_) {
    if (alpha_ <= 1.0)
      throw construction_error("centering requires alpha > 1 (finite mean)");
    // tail contribution to the mean: E[X 1_{X>xm}] - E[-X 1_{X<-xm}]
    double s_int = survival_integral(kInf);
    double tail_mean = (p_ - q_) * (x_min_ * ell_xm * std::pow(x_min_, -alpha_) + s_int);
    // interior tilt B gives mean contribution (2/3) B x_min^3
    double b = -tail_mean / ((2.0 / 3.0) * x_min_ * x_min_ * x_min_);
    if (std::abs(b) * x_min_ > level_a_ * (1.0 + 1e-12))
      throw construction_error("cannot center: tail mean too large for the interior tilt; "
                               "increase x_min or interior mass");
    tilt_b_ = b;
    mean_ = 0.0;
  } else if (alpha_ > 1.0) {
    double s_int = survival_integral(kInf);
    mean_ = (p_ - q_) * (x_min_ * ell_xm * std::pow(x_min_, -alpha_) + s_int);
  }
}

double TailModel::tail_prob(double x, Side side) const {
  if (!(x > 0.0)) throw std::domain_error("tail_prob needs x > 0");
  double w = side == Side::right ? p_ : q_;
  if (x >= x_min_) return w * ell_(x) * std::pow(x, -alpha_);
  // inside the interior: integrate the density out to the boundary
  double lo = side == Side::right ? x : -x;
  if (side == Side::right) {
    // P(X > x) = tail_mass_right + integral_x^{xm} (A + B u) du
    double t = x_min_ - lo;
    return tail_mass_right_ + level_a_ * t + 0.5 * tilt_b_ * (x_min_ * x_min_ - lo * lo);
  }
  double hi = -x;
  double t = hi + x_min_;
  return tail_mass_left_ + level_a_ * t + 0.5 * tilt_b_ * (hi * hi - x_min_ * x_min_);
}

double TailModel::density(double x) const {
  double ax = std::abs(x);
  if (ax < x_min_) return level_a_ + tilt_b_ * x;
  double w = x > 0.0 ? p_ : q_;
  return w * tail_density_rho(ax);
}

double TailModel::cdf(double x) const {
  if (x <= -x_min_) return tail_prob(-x, Side::left);
  if (x >= x_min_) return 1.0 - tail_prob(x, Side::right);
  double t = x + x_min_;
  return tail_mass_left_ + level_a_ * t + 0.5 * tilt_b_ * (x * x - x_min_ * x_min_);
}

double TailModel::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("quantile needs u in [0,1]");
  u = std::min(std::max(u, 1e-300), 1.0 - 1e-16);
  if (u <= tail_mass_left_) return -tail_solve(u, q_);
  double w = 1.0 - u;
  if (w <= tail_mass_right_) return tail_solve(w, p_);
  // interior: invert A t + (B/2)(x^2 - xm^2) with t = x + xm, which reads
  // (B/2) t^2 + A' t = d with A' = A - B*xm = f(-xm); the stable root is
  // t = 2d / (A' + sqrt(A'^2 + 2 B d))
  double d = u - tail_mass_left_;
  double a_edge = level_a_ - tilt_b_ * x_min_;
  double disc = a_edge * a_edge + 2.0 * tilt_b_ * d;
  disc = std::max(disc, 0.0);
  double t = 2.0 * d / (a_edge + std::sqrt(disc));
  return std::min(std::max(-x_min_ + t, -x_min_), x_min_);
}

double TailModel::tail_solve(double w, double weight) const {
  if (!(w > 0.0) || !(weight > 0.0)) throw std::domain_error("tail_solve needs positive inputs");
  if (ell_.kind() == SlowlyVarying::Kind::constant) {
    // weight * c * y^{-alpha} = w
    return std::pow(weight * ell_.param() / w, 1.0 / alpha_);
  }
  // solve on z = log y: log(weight) + log(ell(e^z)) - alpha z = log w,
  // monotone decreasing in z throughout the valid domain
  double z_lo = std::log(x_min_);
  auto g = [&](double z) {
    double y = std::exp(z);
    return std::log(weight) + std::log(ell_(y)) - alpha_ * z - std::log(w);
  };
  double g_lo = g(z_lo);
  if (g_lo <= 0.0) return x_min_;  // w at (or beyond) the boundary value
  double z_hi = z_lo + 1.0;
  while (g(z_hi) > 0.0) {
    z_lo = z_hi;
    z_hi += std::max(1.0, 0.5 * (z_hi - std::log(x_min_)));
    if (z_hi > 1400.0) throw std::runtime_error("tail_solve bracket expansion failed");
  }
  for (int it = 0; it < 200; ++it) {
    double z_mid = 0.5 * (z_lo + z_hi);
    if (g(z_mid) > 0.0)
      z_lo = z_mid;
    else
      z_hi = z_mid;
    if (z_hi - z_lo < 1e-15 * std::max(1.0, std::abs(z_hi))) break;
  }
  return std::exp(0.5 * (z_lo + z_hi));
}

double TailModel::tail_density_rho(double x) const {
  return std::pow(x, -alpha_ - 1.0) * (alpha_ * ell_(x) - x * ell_.derivative(x));
}

std::complex<double> TailModel::tail_density_rho_complex(std::complex<double> z) const {
  std::complex<double> a(alpha_, 0.0);
  return std::pow(z, -a - 1.0) * (a * ell_.eval_complex(z) - z * ell_.derivative_complex(z));
}

double TailModel::survival_integral(double x) const {
  // integral over [x_min, x] of ell(u) u^{-alpha} du, per unit side weight
  if (ell_.kind() == SlowlyVarying::Kind::constant && std::isinf(x)) {
    if (alpha_ <= 1.0) throw std::domain_error("survival integral diverges for alpha <= 1");
    return ell_.param() * std::pow(x_min_, 1.0 - alpha_) / (alpha_ - 1.0);
  }
  if (ell_.kind() == SlowlyVarying::Kind::constant) {
    double c = ell_.param();
    return c * (std::pow(x_min_, 1.0 - alpha_) - std::pow(x, 1.0 - alpha_)) / (alpha_ - 1.0);
  }
  // substitute u = x_min e^s so the integrand decays exponentially
  double s_hi = std::isinf(x) ? kInf : std::log(x / x_min_);
  auto f = [&](double s) {
    double u = x_min_ * std::exp(s);
    if (!std::isfinite(u)) return 0.0;  // far half-line nodes past the overflow edge
    double v = ell_(u) * std::pow(u, -alpha_) * u;  // du = u ds
    return std::isfinite(v) ? v : 0.0;
  };
  if (std::isinf(s_hi)) {
    if (alpha_ <= 1.0) throw std::domain_error("survival integral diverges for alpha <= 1");
    return integrate_halfline(f, 1e-12);
  }
  return integrate_adaptive(f, 0.0, s_hi, 1e-12);
}

double TailModel::u_survival_integral(double x) const {
  // integral over [x_min, x] of u * ell(u) * u^{-alpha} du, per unit weight
  if (ell_.kind() == SlowlyVarying::Kind::constant) {
    double c = ell_.param();
    if (alpha_ == 2.0) return c * std::log(x / x_min_);
    return c * (std::pow(x, 2.0 - alpha_) - std::pow(x_min_, 2.0 - alpha_)) / (2.0 - alpha_);
  }
  double s_hi = std::log(x / x_min_);
  auto f = [&](double s) {
    double u = x_min_ * std::exp(s);
    if (!std::isfinite(u)) return 0.0;
    double v = ell_(u) * std::pow(u, 1.0 - alpha_) * u;
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate_adaptive(f, 0.0, s_hi, 1e-12);
}

double TailModel::mean() const {
  if (alpha_ <= 1.0) throw std::domain_error("mean is undefined (infinite) for alpha < 1");
  if (centered_) return 0.0;
  return mean_ + tilt_b_ * (2.0 / 3.0) * x_min_ * x_min_ * x_min_;
}

double TailModel::truncated_mean(double x) const {
  if (!(x > 0.0)) throw std::domain_error("truncated_mean needs x > 0");
  if (x <= x_min_) {
    // integral_{-x}^{x} u (A + B u) du = (2/3) B x^3
    return (2.0 / 3.0) * tilt_b_ * x * x * x;
  }
  double interior = (2.0 / 3.0) * tilt_b_ * x_min_ * x_min_ * x_min_;
  // per side: E[X 1_{xm<X<=x}] = xm S(xm) - x S(x) + integral_{xm}^{x} S(u) du
  double s_xm = ell_(x_min_) * std::pow(x_min_, -alpha_);
  double s_x = ell_(x) * std::pow(x, -alpha_);
  double per_side = x_min_ * s_xm - x * s_x + survival_integral(x);
  return interior + (p_ - q_) * per_side;
}

double TailModel::truncated_second_moment(double x) const {
  if (!(x > 0.0)) throw std::domain_error("truncated_second_moment needs x > 0");
  if (x <= x_min_) {
    // integral_{-x}^{x} u^2 (A + B u) du = (2/3) A x^3
    return (2.0 / 3.0) * level_a_ * x * x * x;
  }
  double interior = (2.0 / 3.0) * level_a_ * x_min_ * x_min_ * x_min_;
  // per side: E[X^2 1_{xm<X<=x}] = xm^2 S(xm) - x^2 S(x) + 2 integral u S(u) du
  double s_xm = ell_(x_min_) * std::pow(x_min_, -alpha_);
  double s_x = ell_(x) * std::pow(x, -alpha_);
  double per_side =
      x_min_ * x_min_ * s_xm - x * x * s_x + 2.0 * u_survival_integral(x);
  return interior + (p_ + q_) * per_side;
}

std::string TailModel::config_record() const {
  std::ostringstream os;
  os.precision(17);
  os << "alpha=" << alpha_ << "\n";
  os << "p=" << p_ << "\n";
  os << "q=" << q_ << "\n";
  switch (ell_.kind()) {
    case SlowlyVarying::Kind::constant:
      os << "ell.kind=const\nell.c=" << ell_.param() << "\n";
      break;
    case SlowlyVarying::Kind::log_power:
      os << "ell.kind=logpow\nell.gamma=" << ell_.param() << "\n";
      break;
    case SlowlyVarying::Kind::custom:
      os << "ell.kind=custom\nell.label=" << ell_.label() << "\n";
      break;
  }
  os << "x_min=" << x_min_ << "\n";
  os << "centered=" << (centered_ ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace ldlab
