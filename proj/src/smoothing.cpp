#include "ldlab/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ldlab/errors.hpp"
#include "ldlab/stats.hpp"

namespace ldlab {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double sinc(double y) {
  if (y == 0.0) return 1.0;
  return std::sin(y) / y;
}

// integer power by squaring: bit-exact identity at n = 1, and no exp/log
// round trip for the large-n characteristic-function powers
cplx cpow_u64(cplx z, std::uint64_t n) {
  cplx acc(1.0, 0.0);
  while (n > 0) {
    if (n & 1) acc *= z;
    z *= z;
    n >>= 1;
  }
  return acc;
}
}  // namespace

SmoothingKernel::SmoothingKernel(double epsilon) : eps_(epsilon) {
  if (!(epsilon > 0.0)) throw construction_error("smoothing support half-width must be positive");
}

double SmoothingKernel::psi(double t) const {
  double u = std::abs(t) / eps_;
  if (u >= 1.0) return 0.0;
  if (u <= 0.5) return 1.0 + 6.0 * u * u * (u - 1.0);
  double v = 1.0 - u;
  return 2.0 * v * v * v;
}

double SmoothingKernel::density(double x) const {
  double s = sinc(0.25 * eps_ * x);
  return (3.0 * eps_ / (8.0 * kPi)) * s * s * s * s;
}

double SmoothingKernel::tail_beyond(double h) const {
  if (h <= 0.0) return 1.0;
  // P(|Y| > h) = (3/pi) int_z^inf sinc^4(y) dy with z = eps h / 4
  double z = 0.25 * eps_ * h;
  double cut = z + 200.0;
  auto f = [](double y) {
    double s = sinc(y);
    return s * s * s * s;
  };
  double head = integrate_adaptive(f, z, cut, 1e-11);
  double rest = 1.0 / (8.0 * cut * cut * cut);  // mean of sin^4 is 3/8
  return std::min(1.0, (3.0 / kPi) * (head + rest));
}

double SmoothingKernel::sample(Rng& rng) const {
  // envelope min(1, y^-4): mass 2 on (-1,1) and 2/3 on the tails
  for (;;) {
    double y;
    if (rng.uniform() < 0.75) {
      y = 2.0 * rng.uniform() - 1.0;
      double s = sinc(y);
      if (rng.uniform() < s * s * s * s) return 4.0 * y / eps_;
    } else {
      y = std::pow(rng.uniform(), -1.0 / 3.0);
      if (rng.uniform() < 0.5) y = -y;
      double s = std::sin(y);
      if (rng.uniform() < s * s * s * s) return 4.0 * y / eps_;
    }
  }
}

ShiftReport shift_insensitivity_check(const std::function<double(Rng&)>& tail_of_Z,
                                      const SmoothingKernel& kernel, double N, double h_N,
                                      std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw std::invalid_argument("shift check needs samples > 0");
  Rng rng(seed);
  std::uint64_t plain = 0, smoothed = 0, above = 0, below = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    double z = tail_of_Z(rng);
    double y = kernel.sample(rng);
    if (z > N) ++plain;
    if (z + y > N) ++smoothed;
    if (z > N + h_N) ++above;
    if (z > N - h_N) ++below;
  }
  if (plain < 100) {
    double need = plain == 0 ? static_cast<double>(samples) * 200.0
                             : std::ceil(static_cast<double>(samples) * 100.0 /
                                         static_cast<double>(plain));
    throw insufficient_samples_error(static_cast<double>(plain),
                                     static_cast<std::uint64_t>(std::min(need, 1e18)));
  }
  ShiftReport r;
  r.samples = samples;
  r.hits_plain = plain;
  r.hits_smoothed = smoothed;
  auto ep = wilson_ci(plain, samples);
  auto es = wilson_ci(smoothed, samples);
  r.p_plain = ep.value;
  r.ci_plain_lo = ep.ci_lo;
  r.ci_plain_hi = ep.ci_hi;
  r.p_smoothed = es.value;
  r.ci_smoothed_lo = es.ci_lo;
  r.ci_smoothed_hi = es.ci_hi;
  r.ratio = r.p_smoothed / r.p_plain;
  double n = static_cast<double>(samples);
  r.bracket_lo = static_cast<double>(above) / n;
  r.bracket_hi = static_cast<double>(below) / n;
  r.y_exceed_h = kernel.tail_beyond(h_N);
  return r;
}

GapIntegrand::GapIntegrand(const std::function<cplx(double)>& Psi, std::uint64_t n,
                           const SmoothingKernel& kernel, double tol)
    : eps_(kernel.epsilon()), n_(n), table_err_(0.0) {
  if (n == 0) throw std::invalid_argument("gap integrand needs n >= 1");
  auto slow_exact = [&](double t) -> cplx {
    double w = kernel.psi(t);
    if (w == 0.0) return {0.0, 0.0};
    cplx P = Psi(t);
    return w * (cpow_u64(P, n) - static_cast<double>(n) * P);
  };
  // tabulate on [0, eps]; refine by halving cells until cubic interpolation
  // reproduces every midpoint, reusing midpoint evaluations on the next level
  std::size_t m = 257;
  std::vector<double> grid(m);
  std::vector<cplx> vals(m);
  for (std::size_t i = 0; i < m; ++i) {
    grid[i] = eps_ * static_cast<double>(i) / static_cast<double>(m - 1);
    vals[i] = slow_exact(grid[i]);
  }
  for (;;) {
    ComplexTable coarse(grid, vals);
    double scale = 1.0;
    for (const auto& v : vals) scale = std::max(scale, std::abs(v));
    std::vector<cplx> mid_vals(m - 1);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      double t = 0.5 * (grid[i] + grid[i + 1]);
      mid_vals[i] = slow_exact(t);
      worst = std::max(worst, std::abs(coarse.eval(t) - mid_vals[i]));
    }
    table_err_ = worst;
    if (worst <= tol * scale || m >= (1u << 17)) {
      table_ = std::move(coarse);
      break;
    }
    std::vector<double> g2(2 * m - 1);
    std::vector<cplx> v2(2 * m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      g2[2 * i] = grid[i];
      v2[2 * i] = vals[i];
      g2[2 * i + 1] = 0.5 * (grid[i] + grid[i + 1]);
      v2[2 * i + 1] = mid_vals[i];
    }
    g2.back() = grid.back();
    v2.back() = vals.back();
    grid = std::move(g2);
    vals = std::move(v2);
    m = 2 * m - 1;
  }
}

cplx GapIntegrand::slow(double t) const {
  double a = std::abs(t);
  if (a >= eps_) return {0.0, 0.0};
  cplx v = table_.eval(a);
  return t < 0.0 ? std::conj(v) : v;
}

cplx cf_gap_integral(const GapIntegrand& integrand, double N, double g, double* abs_err) {
  if (!(g > 0.0)) throw std::invalid_argument("gap width g must be positive");
  double eps = integrand.epsilon();
  auto f = [&](double t) -> cplx { return fourier_window(t, N, g) * integrand.slow(t); };
  // integrate each piece of the B-spline separately (the slow factor is only
  // C^2 at 0 and +-eps/2) and keep panels at least 16 per piece so the slow
  // curvature is resolved even when the oscillation is mild
  const double seg[5] = {-eps, -0.5 * eps, 0.0, 0.5 * eps, eps};
  double omega = std::max(std::abs(N) + g, 32.0 * kPi / eps);
  cplx val(0.0, 0.0);
  double panel_err = 0.0;
  for (int s = 0; s < 4; ++s) {
    double e = 0.0;
    val += integrate_oscillatory<cplx>(f, seg[s], seg[s + 1], omega, &e);
    panel_err += e;
  }
  if (abs_err) {
    // |front| <= min(g, 2/t), so the interpolation error enters with weight
    // int min(g, 2/t) dt over [-eps, eps]
    double w = eps * g <= 2.0 ? 2.0 * eps * g : 4.0 + 4.0 * std::log(0.5 * eps * g);
    *abs_err = panel_err + w * integrand.table_error();
  }
  return val;
}

cplx cf_gap_integral(const std::function<cplx(double)>& Psi, std::uint64_t n, double N, double g,
                     const SmoothingKernel& kernel, double* abs_err) {
  GapIntegrand integrand(Psi, n, kernel);
  return cf_gap_integral(integrand, N, g, abs_err);
}

}  // namespace ldlab
