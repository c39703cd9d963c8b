#include "ldlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "ldlab/errors.hpp"

namespace ldlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double l1w(const std::vector<double>& w, const std::vector<cplx>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * std::abs(f[i]);
  return s;
}

cplx dot_plain(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// perturbed operator M = P diag(d) and its transpose, sharing one phase vector
struct PhasedOp {
  const UlamOperator* U;
  std::vector<cplx> d;
  mutable std::vector<cplx> tmp;

  void mul(const std::vector<cplx>& f, std::vector<cplx>& y) const {
    tmp.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) tmp[i] = d[i] * f[i];
    U->apply(tmp, y);
  }
  void mul_t(const std::vector<cplx>& f, std::vector<cplx>& y) const {
    U->apply_transpose(f, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] *= d[i];
  }
};

PhasedOp make_op(const UlamOperator& U, const Observable& obs, double t) {
  return PhasedOp{&U, phase_vector(U, obs, t), {}};
}

// power iteration with Rayleigh-quotient eigenvalue estimates; f holds the
// start vector on entry and the l2-normalized eigenvector on exit
template <typename Mul>
cplx power_iterate(Mul&& mul, const std::vector<double>& w, std::vector<cplx>& f, double t) {
  std::vector<cplx> y;
  for (int it = 0; it < 5000; ++it) {
    mul(f, y);
    cplx num(0.0, 0.0);
    double den = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      num += std::conj(f[i]) * y[i];
      den += std::norm(f[i]);
    }
    cplx lam = num / den;
    double r = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      r += w[i] * std::abs(y[i] - lam * f[i]);
      nf += w[i] * std::abs(f[i]);
    }
    double ny = 0.0;
    for (const cplx& v : y) ny += std::norm(v);
    ny = std::sqrt(ny);
    if (!(ny > 0.0))
      throw spectral_degeneracy_error("power iteration collapsed at t = " + std::to_string(t));
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = y[i] / ny;
    if (r <= 1e-12 * std::max(1.0, nf) || (it > 50 && r <= 1e-11 * std::max(1.0, nf))) return lam;
  }
  throw spectral_degeneracy_error("power iteration did not converge at t = " + std::to_string(t));
}

// modulus of the second eigenvalue by deflated power iteration: repeatedly
// apply M and project out the leading pair, averaging the per-step growth
template <typename Mul>
double second_modulus(Mul&& mul, const std::vector<cplx>& zeta, const std::vector<cplx>& left,
                      std::size_t m) {
  std::vector<cplx> z(m), y;
  for (std::size_t i = 0; i < m; ++i) {
    double x = (static_cast<double>(i) + 0.25) / static_cast<double>(m);
    z[i] = cplx(std::sin(6.283185307179586 * x) + 0.3 * std::cos(18.849555921538759 * x), 0.0);
  }
  auto deflate = [&](std::vector<cplx>& v) {
    cplx c = dot_plain(left, v);
    for (std::size_t i = 0; i < m; ++i) v[i] -= c * zeta[i];
  };
  deflate(z);
  const int burn = 40, total = 160;
  double log_growth = 0.0;
  int counted = 0;
  for (int k = 0; k < total; ++k) {
    mul(z, y);
    deflate(y);
    double ny = 0.0;
    for (const cplx& v : y) ny += std::norm(v);
    ny = std::sqrt(ny);
    if (ny < 1e-250) return 0.0;
    if (k >= burn) {
      log_growth += std::log(ny);
      ++counted;
    }
    for (std::size_t i = 0; i < m; ++i) z[i] = y[i] / ny;
  }
  return std::exp(log_growth / counted);
}

// eigenvalue-only path for grid sweeps that do not need the gap
cplx leading_lambda(const UlamOperator& U, const Observable& obs, double t, double* resid = nullptr) {
  auto op = make_op(U, obs, t);
  std::vector<cplx> f(U.size(), cplx(1.0, 0.0));
  cplx lam = power_iterate([&](const std::vector<cplx>& a, std::vector<cplx>& b) { op.mul(a, b); },
                           U.weights(), f, t);
  if (resid) {
    std::vector<cplx> y;
    op.mul(f, y);
    double r = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) r += U.weights()[i] * std::abs(y[i] - lam * f[i]);
    *resid = r / std::max(1e-300, l1w(U.weights(), f));
  }
  return lam;
}

}  // namespace

SpectralData leading_eig(const UlamOperator& U, double t, const Observable& obs) {
  std::size_t m = U.size();
  auto op = make_op(U, obs, t);
  const auto& w = U.weights();

  SpectralData out;
  out.t = t;

  std::vector<cplx> zeta(m, cplx(1.0, 0.0));
  out.lambda = power_iterate(
      [&](const std::vector<cplx>& a, std::vector<cplx>& b) { op.mul(a, b); }, w, zeta, t);
  if (std::abs(out.lambda) > 1.0 + 1e-10)
    throw spectral_degeneracy_error("leading eigenvalue escaped the unit disc at t = " +
                                    std::to_string(t));

  std::vector<cplx> left(w.begin(), w.end());
  cplx lam_left = power_iterate(
      [&](const std::vector<cplx>& a, std::vector<cplx>& b) { op.mul_t(a, b); }, w, left, t);
  if (std::abs(lam_left - out.lambda) > 1e-6 * (1.0 + std::abs(out.lambda)))
    throw spectral_degeneracy_error("left/right eigenvalues disagree at t = " + std::to_string(t));

  // normalize: weighted sum of zeta is 1, and left . zeta = 1 (projector form)
  cplx wz(0.0, 0.0);
  for (std::size_t i = 0; i < m; ++i) wz += w[i] * zeta[i];
  if (std::abs(wz) < 1e-12)
    throw spectral_degeneracy_error("eigenvector has no mass against mu at t = " + std::to_string(t));
  for (auto& v : zeta) v /= wz;
  cplx lz = dot_plain(left, zeta);
  if (std::abs(lz) < 1e-300)
    throw spectral_degeneracy_error("left and right eigenvectors are orthogonal at t = " +
                                    std::to_string(t));
  for (auto& v : left) v /= lz;

  std::vector<cplx> y;
  op.mul(zeta, y);
  double resid = 0.0;
  for (std::size_t i = 0; i < m; ++i) resid += w[i] * std::abs(y[i] - out.lambda * zeta[i]);
  resid /= std::max(1e-300, l1w(w, zeta));
  if (resid > 1e-8)
    throw spectral_degeneracy_error("eigen-residual above tolerance at t = " + std::to_string(t));

  double mu2 = second_modulus(
      [&](const std::vector<cplx>& a, std::vector<cplx>& b) { op.mul(a, b); }, zeta, left, m);
  out.gap = std::abs(out.lambda) - mu2;
  if (out.gap <= 0.0)
    throw spectral_degeneracy_error("spectral gap collapsed at t = " + std::to_string(t));

  out.zeta = std::move(zeta);
  out.left = std::move(left);
  out.residual = resid;
  return out;
}

ScalingFit scaling_exponent_fit(const UlamOperator& U, const Observable& obs,
                                const std::vector<double>& t_grid) {
  if (obs.is_constant())
    throw construction_error("scaling fit: constant observables have a flat eigenvalue");
  if (t_grid.size() < 4) throw std::invalid_argument("scaling fit: need at least 4 frequencies");
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > 0.0)) throw std::invalid_argument("scaling fit: frequencies must be positive");
    if (k && t_grid[k] <= t_grid[k - 1])
      throw std::invalid_argument("scaling fit: frequencies must increase");
  }
  if (t_grid.back() / t_grid.front() < 99.9)
    throw std::invalid_argument("scaling fit: the grid must span at least two decades");

  ScalingFit out;
  out.t_grid = t_grid;
  std::vector<double> xs, ys;
  for (double t : t_grid) {
    cplx lam = leading_lambda(U, obs, t);
    double gap1 = std::abs(1.0 - lam);
    out.one_minus_lambda.push_back(gap1);
    if (!(gap1 > 0.0))
      throw fit_degenerate_error("scaling fit: eigenvalue sits at 1 for t = " + std::to_string(t));
    xs.push_back(std::log(t));
    ys.push_back(std::log(gap1));
  }
  out.fit = ols_fit(xs, ys);
  out.alpha_hat = out.fit.slope;
  out.c_hat = std::exp(out.fit.intercept);
  out.quadratic_shape = out.alpha_hat >= 1.9;
  return out;
}

std::string DiagnosticTable::csv() const {
  std::string s = "t,n," + quantity + ",envelope,ratio,m,residual\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%.17g,%llu,%.17g,%.17g,%.17g,%zu,%.3g\n", r.t,
                  static_cast<unsigned long long>(r.n), r.value, r.envelope, r.ratio, m,
                  r.residual);
    s += line;
  }
  return s;
}

DiagnosticTable V_diagnostic(const UlamOperator& U, const Observable& obs,
                             const std::vector<double>& t_grid) {
  if (obs.form() != ObservableForm::power)
    throw construction_error("V diagnostic: needs a power-tail observable");
  if (t_grid.empty()) throw std::invalid_argument("V diagnostic: empty frequency grid");
  double alpha = obs.alpha();
  double expo = alpha < 1.0 ? 2.0 * alpha : 2.0;

  DiagnosticTable table;
  table.m = U.size();
  table.quantity = "V";
  for (double t : t_grid) {
    double resid = 0.0;
    cplx lam = leading_lambda(U, obs, t, &resid);
    cplx psi = charfn_mu(U.system(), obs, t);
    double value = std::abs(lam - psi);
    double env = std::pow(std::fabs(t), expo);
    double ratio = env > 0.0 ? value / env : (value > 0.0 ? kInf : 0.0);
    table.rows.push_back({t, 0, value, env, ratio, resid});
    table.max_ratio = std::max(table.max_ratio, ratio);
  }
  return table;
}

DiagnosticTable U_diagnostic(const UlamOperator& U, const Observable& obs,
                             const std::vector<double>& t_grid,
                             const std::vector<std::uint64_t>& n_grid, double alpha_prime) {
  if (obs.form() != ObservableForm::power)
    throw construction_error("U diagnostic: needs a power-tail observable");
  if (t_grid.empty() || n_grid.empty())
    throw std::invalid_argument("U diagnostic: empty test grid");
  for (std::size_t k = 1; k < n_grid.size(); ++k)
    if (n_grid[k] <= n_grid[k - 1])
      throw std::invalid_argument("U diagnostic: n grid must increase");
  if (n_grid.front() == 0) throw std::invalid_argument("U diagnostic: n starts at 1");
  double alpha = obs.alpha();
  if (alpha > 1.0) {
    if (alpha_prime == 0.0) alpha_prime = 0.5 * (1.0 + alpha);
    if (!(alpha_prime > 1.0 && alpha_prime < alpha))
      throw std::invalid_argument("U diagnostic: alpha_prime must sit in (1, alpha)");
  }

  DiagnosticTable table;
  table.m = U.size();
  table.quantity = "U";
  std::size_t m = U.size();
  for (double t : t_grid) {
    auto d = phase_vector(U, obs, t);
    std::vector<cplx> f(m, cplx(1.0, 0.0)), y;
    // Psi here is the discretization's own one-step characteristic function,
    // so U(t,1) = 0 is a floating-point identity rather than a quadrature
    // comparison; the running power keeps it bit-exact
    cplx psi(1.0, 0.0), psi_pow(1.0, 0.0);
    std::size_t mark = 0;
    for (std::uint64_t n = 1; n <= n_grid.back() && mark < n_grid.size(); ++n) {
      for (std::size_t i = 0; i < m; ++i) f[i] *= d[i];
      U.apply(f, y);
      f.swap(y);
      if (n == 1) {
        psi = cplx(0.0, 0.0);
        for (std::size_t i = 0; i < m; ++i) psi += U.weights()[i] * f[i];
        psi_pow = psi;
      } else {
        psi_pow *= psi;
      }
      if (n == n_grid[mark]) {
        cplx cf(0.0, 0.0);
        for (std::size_t i = 0; i < m; ++i) cf += U.weights()[i] * f[i];
        double nn = static_cast<double>(n), at = std::fabs(t);
        double value = std::abs(cf - psi_pow);
        double shape = alpha < 1.0 ? std::pow(at, alpha) + nn * std::pow(at, 2.0 * alpha)
                                   : std::pow(at, alpha_prime) + nn * at * at;
        double env = shape * std::abs(psi_pow);
        double ratio = env > 0.0 ? value / env : (value > 0.0 ? kInf : 0.0);
        table.rows.push_back({t, n, value, env, ratio, 0.0});
        table.max_ratio = std::max(table.max_ratio, ratio);
        ++mark;
      }
    }
  }
  return table;
}

QDecay q_decay(const UlamOperator& U, const Observable& obs, double t, std::size_t n_max) {
  if (n_max < 2) throw std::invalid_argument("q_decay: need n_max >= 2");
  SpectralData eig = leading_eig(U, t, obs);
  auto op = make_op(U, obs, t);
  std::size_t m = U.size();
  const auto& w = U.weights();

  QDecay out;
  std::vector<cplx> q(m, cplx(1.0, 0.0)), y;
  for (std::size_t k = 1; k <= n_max; ++k) {
    op.mul(q, y);
    cplx c = dot_plain(eig.left, y);
    for (std::size_t i = 0; i < m; ++i) y[i] -= c * eig.zeta[i];
    q.swap(y);
    out.norms.push_back(l1w(w, q));
  }

  // geometric decay rate from the log-linear fit, keeping clear of the
  // floating-point floor where the norms stop decaying
  double peak = *std::max_element(out.norms.begin(), out.norms.end());
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < out.norms.size(); ++k)
    if (out.norms[k] > std::max(1e-280, 1e-13 * peak)) {
      xs.push_back(static_cast<double>(k + 1));
      ys.push_back(std::log(out.norms[k]));
    }
  if (peak <= 1e-10 || xs.size() < 2) {
    out.rate = 0.0;
  } else {
    out.rate = std::exp(ols_fit(xs, ys).slope);
  }
  return out;
}

namespace {
// projected one-step mass lambda(t) * integral of P(t)1 against mu; with the
// normalizations above this is lambda(t) times the plain sum of the left
// eigenvector
cplx projected_mass(const UlamOperator& U, const Observable& obs, double t) {
  SpectralData eig = leading_eig(U, t, obs);
  cplx u1(0.0, 0.0);
  for (const cplx& v : eig.left) u1 += v;
  return eig.lambda * u1;
}
}  // namespace

PPrimeReport p_prime_zero_check(const UlamOperator& U, const Observable& obs, double h_fd) {
  if (!(h_fd > 0.0 && h_fd < 0.3))
    throw std::invalid_argument("p_prime_zero_check: step must sit in (0, 0.3)");
  PPrimeReport rep;
  switch (obs.form()) {
    case ObservableForm::constant:
      rep.precondition_met = std::fabs(obs(0.5)) <= 1e-9;
      break;
    case ObservableForm::bounded:
      rep.precondition_met = std::fabs(obs.mean_mu()) <= 1e-9;
      break;
    case ObservableForm::power:
      rep.precondition_met = obs.alpha() > 1.0 && std::fabs(obs.mean_mu()) <= 1e-9;
      break;
  }
  cplx fd = (projected_mass(U, obs, h_fd) - projected_mass(U, obs, -h_fd)) / (2.0 * h_fd);
  rep.magnitude = std::abs(fd);
  return rep;
}

double select_epsilon(const UlamOperator& U, const Observable& obs, double eps_max) {
  if (!(eps_max > 0.0)) throw std::invalid_argument("select_epsilon: eps_max must be positive");
  for (double eps = eps_max; eps > 1e-4; eps *= 0.5) {
    bool ok = true;
    for (int k = 1; k <= 6 && ok; ++k) {
      double t = 3.0 * eps * static_cast<double>(k) / 6.0;
      try {
        ok = leading_eig(U, t, obs).gap > 0.05;
      } catch (const spectral_degeneracy_error&) {
        ok = false;
      }
    }
    if (ok) return eps;
  }
  throw spectral_degeneracy_error("no admissible frequency window below eps_max");
}

}  // namespace ldlab
