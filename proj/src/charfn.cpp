#include "ldlab/charfn.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "ldlab/errors.hpp"

namespace ldlab {

namespace {

double sinc(double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; }

// int_{x_min}^inf e^{itx} rho(x) dx for t > 0 along the vertical contour
// x_min + i s (the arc at infinity vanishes since rho decays like a power).
// Substituting s = x_min (e^w - 1) spends nodes near the corner where rho
// varies fastest while still reaching the e^{-ts} decay scale; the upper
// limit W puts the truncation at t s = 40.
cplx tail_integral_rotated(const TailModel& model, double t, double* err) {
  const double xm = model.x_min();
  const double W = std::log1p(40.0 / (t * xm));
  auto h = [&](double w) -> cplx {
    double ew = std::exp(w);
    double s = xm * (ew - 1.0);
    cplx v = std::exp(-t * s) * model.tail_density_rho_complex(cplx(xm, s)) * (xm * ew);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return cplx(0.0, 0.0);
    return v;
  };
  double e_re = 0.0, e_im = 0.0;
  double re = integrate_adaptive([&](double w) { return h(w).real(); }, 0.0, W, 1e-12, &e_re);
  double im = integrate_adaptive([&](double w) { return h(w).imag(); }, 0.0, W, 1e-12, &e_im);
  double rho_cut = std::abs(model.tail_density_rho_complex(cplx(xm, 40.0 / t)));
  if (!std::isfinite(rho_cut)) rho_cut = 0.0;
  *err = e_re + e_im + 2.0 * std::exp(-40.0) * rho_cut / t;
  return cplx(0.0, 1.0) * std::exp(cplx(0.0, t * xm)) * cplx(re, im);
}

// fallback when rho has no complex continuation: oscillatory quadrature on
// [x_min, cut] plus the leading integration-by-parts boundary term at the
// cut. The remainder bound rho(cut)/t assumes the tail density is eventually
// monotone, which holds for the supported factors.
cplx tail_integral_real_line(const TailModel& model, double t, double* err) {
  const double xm = model.x_min();
  double cut = std::max(xm, 1.0 / t);
  while (2.0 * model.tail_density_rho(cut) / t > 5e-11 && cut < 1e10 * xm) cut *= 2.0;
  double qerr = 0.0;
  cplx body = integrate_oscillatory<cplx>(
      [&](double x) { return std::exp(cplx(0.0, t * x)) * model.tail_density_rho(x); }, xm, cut, t,
      &qerr);
  double rho_cut = model.tail_density_rho(cut);
  cplx boundary = std::exp(cplx(0.0, t * cut)) * cplx(0.0, rho_cut / t);
  *err = qerr + rho_cut / t;
  return body + boundary;
}

}  // namespace

cplx charfn_Psi(const TailModel& model, double t, double* abs_err) {
  if (abs_err) *abs_err = 0.0;
  if (t == 0.0) return cplx(1.0, 0.0);
  if (t < 0.0) return std::conj(charfn_Psi(model, -t, abs_err));

  const double xm = model.x_min();
  const double u = t * xm;
  cplx interior(model.interior_level() * 2.0 * xm * sinc(u), 0.0);
  if (model.interior_tilt() != 0.0) {
    // int_{-xm}^{xm} x e^{itx} dx = 2i (sin u - u cos u) / t^2
    double odd = u < 1e-4 ? 2.0 * xm * xm * xm * t / 3.0 * (1.0 - u * u / 10.0)
                          : 2.0 * (std::sin(u) - u * std::cos(u)) / (t * t);
    interior += cplx(0.0, model.interior_tilt() * odd);
  }

  double terr = 0.0;
  cplx tail = model.ell().analytic() ? tail_integral_rotated(model, t, &terr)
                                     : tail_integral_real_line(model, t, &terr);
  cplx psi = interior + model.p() * tail + model.q() * std::conj(tail);
  double err = terr + 1e-15;
  if (model.ell().analytic() && err > 1e-10)
    throw std::runtime_error("charfn_Psi: could not certify 1e-10 accuracy");
  if (abs_err) *abs_err = err;
  return psi;
}

CharFnTable::CharFnTable(std::vector<double> half_grid, std::vector<cplx> half_values,
                         std::vector<double> half_errors, Provenance prov,
                         double interp_residual)
    : half_grid_(std::move(half_grid)),
      half_values_(std::move(half_values)),
      half_errors_(std::move(half_errors)),
      prov_(prov),
      interp_residual_(interp_residual) {
  if (half_grid_.size() != half_values_.size() || half_grid_.size() != half_errors_.size() ||
      half_grid_.size() < 2)
    throw construction_error("CharFnTable: need matching half grids with at least 2 nodes");
  if (half_grid_.front() != 0.0)
    throw construction_error("CharFnTable: half grid must start at t = 0");
  for (std::size_t i = 1; i < half_grid_.size(); ++i)
    if (!(half_grid_[i] > half_grid_[i - 1]))
      throw construction_error("CharFnTable: grid not increasing");
  if (half_values_.front() != cplx(1.0, 0.0))
    throw construction_error("CharFnTable: value at t = 0 must be exactly 1");
  for (std::size_t i = 0; i < half_grid_.size(); ++i) {
    double e = half_errors_[i];
    if (!std::isfinite(e) || e < 0.0)
      throw construction_error("CharFnTable: node error bound must be finite and nonnegative");
    if (std::abs(half_values_[i]) > 1.0 + e + 1e-12)
      throw construction_error("CharFnTable: modulus exceeds 1 beyond the node bound");
    max_err_ = std::max(max_err_, e);
  }
  interp_ = ComplexTable(half_grid_, half_values_);
}

cplx CharFnTable::value(double t) const {
  return t < 0.0 ? std::conj(interp_.eval(-t)) : interp_.eval(t);
}

std::vector<double> CharFnTable::grid() const {
  std::vector<double> g;
  g.reserve(2 * half_grid_.size() - 1);
  for (std::size_t i = half_grid_.size(); i-- > 1;) g.push_back(-half_grid_[i]);
  g.insert(g.end(), half_grid_.begin(), half_grid_.end());
  return g;
}

std::vector<cplx> CharFnTable::values() const {
  std::vector<cplx> v;
  v.reserve(2 * half_values_.size() - 1);
  for (std::size_t i = half_values_.size(); i-- > 1;) v.push_back(std::conj(half_values_[i]));
  v.insert(v.end(), half_values_.begin(), half_values_.end());
  return v;
}

CharFnTable tabulate_charfn(const TailModel& model, double t_max, std::size_t nodes,
                            double refine_tol) {
  std::map<double, double> node_err;  // every refinement eval becomes a node
  auto f = [&](double t) {
    if (t == 0.0) {
      node_err[t] = 0.0;
      return cplx(1.0, 0.0);
    }
    double e = 0.0;
    cplx v = charfn_Psi(model, t, &e);
    node_err[t] = e;
    return v;
  };
  double worst = 0.0;
  ComplexTable refined = auto_refine_table(f, graded_grid(t_max, nodes, 1e-6), refine_tol,
                                           (std::size_t{1} << 17) + 1, &worst);
  std::vector<double> g = refined.grid();
  std::vector<cplx> v = refined.values();
  std::vector<double> e(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) e[i] = node_err.at(g[i]);
  return CharFnTable(std::move(g), std::move(v), std::move(e),
                     CharFnTable::Provenance::quadrature, worst);
}

CharFnTable tabulate_charfn_mc(const TailModel& model, double t_max, std::size_t nodes,
                               std::uint64_t draws, std::uint64_t seed) {
  if (draws == 0) throw std::invalid_argument("tabulate_charfn_mc: need draws >= 1");
  std::vector<double> g = graded_grid(t_max, nodes, 1e-6);
  std::vector<KahanSum> sum_cos(nodes), sum_sin(nodes);
  Rng rng(seed);
  for (std::uint64_t m = 0; m < draws; ++m) {
    double x = model.sample(rng);
    for (std::size_t i = 0; i < nodes; ++i) {
      sum_cos[i].add(std::cos(g[i] * x));
      sum_sin[i].add(std::sin(g[i] * x));
    }
  }
  std::vector<cplx> v(nodes);
  std::vector<double> e(nodes);
  // true division: for t = 0 the cosine sum is exactly `draws`, and x/x == 1
  double d = static_cast<double>(draws);
  double band = 2.0 / std::sqrt(d);
  for (std::size_t i = 0; i < nodes; ++i) {
    v[i] = cplx(sum_cos[i].value() / d, sum_sin[i].value() / d);
    e[i] = i == 0 ? 0.0 : band;
  }
  return CharFnTable(std::move(g), std::move(v), std::move(e),
                     CharFnTable::Provenance::monte_carlo);
}

}  // namespace ldlab
