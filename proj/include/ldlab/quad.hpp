#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "ldlab/stats.hpp"

namespace ldlab {

using cplx = std::complex<double>;

// Adaptive Gauss-Kronrod (61 point) for smooth real integrands.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double tol = 1e-12, double* err = nullptr) {
  double e = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol, &e);
  if (err) *err = e;
  return v;
}

// tanh_sinh for integrable endpoint singularities.
template <typename F>
auto integrate_endpoints(F&& f, double a, double b, double tol = 1e-12) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, tol);
}

// exp_sinh on (0, inf); supports complex-valued integrands.
template <typename F>
auto integrate_halfline(F&& f, double tol = 1e-12) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, tol);
}

namespace detail {
// Gauss-Kronrod 15/7 nodes and weights on [-1,1] (positive half; symmetric).
inline constexpr double gk15_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double gk15_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
// Gauss-7 weights aligned with odd Kronrod nodes (indices 1,3,5,7).
inline constexpr double g7_w[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                                   0.417959183673469};
}  // namespace detail

// One fixed GK15 panel on [a,b]; err receives |K15 - G7|.
template <typename T, typename F>
T gk15_panel(F&& f, double a, double b, double* err = nullptr) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T k{}, g{};
  for (int i = 0; i < 8; ++i) {
    double x = detail::gk15_x[i];
    T v = f(c + h * x);
    if (i < 7) v += f(c - h * x);
    k += detail::gk15_wk[i] * v;
    if (i % 2 == 1) g += detail::g7_w[i / 2] * v;
  }
  if (err) *err = std::abs(k - g) * h;
  return k * h;
}

// Composite GK15 with panels no wider than pi/omega, so an oscillation
// e^{i omega t} is resolved by every panel. Works for real or complex f.
template <typename T, typename F>
T integrate_oscillatory(F&& f, double a, double b, double omega, double* err_out = nullptr) {
  if (!(b > a)) {
    if (err_out) *err_out = 0.0;
    return T{};
  }
  double width = 3.141592653589793 / std::max(omega, 1e-300);
  width = std::min(width, b - a);
  auto n = static_cast<std::size_t>(std::ceil((b - a) / width));
  n = std::max<std::size_t>(n, 1);
  if (n > 200000000ULL) throw std::invalid_argument("integrate_oscillatory: panel count too large");
  double h = (b - a) / static_cast<double>(n);
  KahanSum re, im, err;
  for (std::size_t k = 0; k < n; ++k) {
    double lo = a + h * static_cast<double>(k);
    double hi = (k + 1 == n) ? b : lo + h;
    double e = 0.0;
    T v = gk15_panel<T>(f, lo, hi, &e);
    if constexpr (std::is_same_v<T, cplx>) {
      re.add(v.real());
      im.add(v.imag());
    } else {
      re.add(v);
    }
    err.add(e);
  }
  if (err_out) *err_out = err.value();
  if constexpr (std::is_same_v<T, cplx>)
    return cplx(re.value(), im.value());
  else
    return re.value();
}

// Fourier transform of the indicator of (N, N+g]:
//   int_N^{N+g} e^{-itx} dx = e^{-itN} (1 - e^{-itg}) / (it),
// written with 2 sin^2(u/2) instead of 1 - cos u and a series near u = 0 so
// there is no cancellation for small t. |fourier_window| <= min(g, 2/|t|).
inline cplx fourier_window(double t, double N, double g) {
  double u = t * g;
  cplx w;
  if (std::abs(u) < 1e-6) {
    w = g * cplx(1.0 - u * u / 6.0, -0.5 * u);
  } else {
    double half = std::sin(0.5 * u);
    w = g * cplx(2.0 * half * half, std::sin(u)) / cplx(0.0, u);
  }
  return w * std::exp(cplx(0.0, -t * N));
}

// Complex-valued table on an increasing grid with local cubic (4-point
// Lagrange) interpolation. Used to tabulate slowly varying factors of
// oscillatory integrands so the panel quadrature can sample them cheaply.
class ComplexTable {
 public:
  ComplexTable() = default;
  ComplexTable(std::vector<double> t, std::vector<cplx> v) : t_(std::move(t)), v_(std::move(v)) {
    if (t_.size() != v_.size() || t_.size() < 2)
      throw std::invalid_argument("ComplexTable: need matching grids, n >= 2");
    for (std::size_t i = 1; i < t_.size(); ++i)
      if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("ComplexTable: grid not increasing");
  }

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }
  const std::vector<double>& grid() const { return t_; }
  const std::vector<cplx>& values() const { return v_; }

  cplx eval(double t) const {
    if (t < t_.front() - 1e-12 || t > t_.back() + 1e-12)
      throw std::out_of_range("ComplexTable::eval outside grid");
    t = std::clamp(t, t_.front(), t_.back());
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t j = static_cast<std::size_t>(it - t_.begin());
    if (t_.size() < 4) {  // too few nodes for a cubic stencil
      std::size_t i = std::min(j == 0 ? 0 : j - 1, t_.size() - 2);
      double w = (t - t_[i]) / (t_[i + 1] - t_[i]);
      return v_[i] + w * (v_[i + 1] - v_[i]);
    }
    if (j < 2) j = 2;
    if (j > t_.size() - 2) j = t_.size() - 2;
    std::size_t i0 = j - 2;
    cplx acc{0.0, 0.0};
    for (std::size_t p = 0; p < 4; ++p) {
      double w = 1.0;
      for (std::size_t q = 0; q < 4; ++q) {
        if (p == q) continue;
        w *= (t - t_[i0 + q]) / (t_[i0 + p] - t_[i0 + q]);
      }
      acc += w * v_[i0 + p];
    }
    return acc;
  }

 private:
  std::vector<double> t_;
  std::vector<cplx> v_;
};

// Tabulate f on the given increasing grid, refining until cubic interpolation
// at panel midpoints agrees with f to tol_abs or the grid reaches max_nodes.
// Every f evaluation is kept: each pass merges the probed midpoints into the
// grid, so the cost is one f call per final node, and a graded initial grid
// stays graded. Reports the worst midpoint residual seen.
template <typename F>
ComplexTable auto_refine_table(F&& f, std::vector<double> t, double tol_abs,
                               std::size_t max_nodes = (1u << 17) + 1, double* err_out = nullptr) {
  if (t.size() < 5) throw std::invalid_argument("auto_refine_table: need at least 5 nodes");
  std::map<double, cplx> nodes;  // every eval is kept
  for (double x : t) nodes.emplace(x, f(x));
  std::vector<std::pair<double, double>> pending(t.size() - 1);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) pending[i] = {t[i], t[i + 1]};
  // split only the panels whose midpoint defect exceeds tol_abs; a panel that
  // passes is still bisected for free by keeping its tested midpoint as a node
  double worst = 0.0;
  while (!pending.empty() && nodes.size() < max_nodes) {
    std::vector<double> tg;
    std::vector<cplx> vg;
    tg.reserve(nodes.size());
    vg.reserve(nodes.size());
    for (auto& [x, y] : nodes) {
      tg.push_back(x);
      vg.push_back(y);
    }
    ComplexTable table(tg, vg);
    std::vector<std::pair<double, double>> next;
    worst = 0.0;
    for (auto& [a, b] : pending) {
      if (nodes.size() >= max_nodes) break;
      double mid = 0.5 * (a + b);
      if (!(a < mid && mid < b)) continue;  // hit the double-precision floor
      cplx fm = f(mid);
      nodes.emplace(mid, fm);
      double r = std::abs(fm - table.eval(mid));
      worst = std::max(worst, r);
      if (r > tol_abs) {
        next.emplace_back(a, mid);
        next.emplace_back(mid, b);
      }
    }
    pending = std::move(next);
  }
  std::vector<double> tf;
  std::vector<cplx> vf;
  tf.reserve(nodes.size());
  vf.reserve(nodes.size());
  for (auto& [x, y] : nodes) {
    tf.push_back(x);
    vf.push_back(y);
  }
  if (err_out) *err_out = worst;
  return ComplexTable(std::move(tf), std::move(vf));
}

// uniform initial grid on [a, b]
template <typename F>
ComplexTable auto_refine_table(F&& f, double a, double b, double tol_abs,
                               std::size_t max_nodes = (1u << 17) + 1, double* err_out = nullptr) {
  std::size_t m = 257;
  std::vector<double> t(m);
  for (std::size_t i = 0; i < m; ++i)
    t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(m - 1);
  return auto_refine_table(std::forward<F>(f), std::move(t), tol_abs, max_nodes, err_out);
}

// {0} followed by a geometric ladder from t_max * lo_frac up to t_max; suits
// functions with a power cusp at 0, where uniform grids interpolate poorly.
inline std::vector<double> graded_grid(double t_max, std::size_t nodes, double lo_frac = 1e-8) {
  if (!(t_max > 0.0) || nodes < 5 || !(lo_frac > 0.0) || !(lo_frac < 1.0))
    throw std::invalid_argument("graded_grid: bad parameters");
  std::vector<double> t(nodes);
  t[0] = 0.0;
  double k = static_cast<double>(nodes) - 2.0;
  for (std::size_t i = 1; i < nodes; ++i)
    t[i] = t_max * std::pow(lo_frac, (k - static_cast<double>(i - 1)) / k);
  t.back() = t_max;
  return t;
}

}  // namespace ldlab
