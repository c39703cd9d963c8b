#include "ldlab/dynamics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ldlab/errors.hpp"
#include "ldlab/parallel.hpp"
#include "ldlab/quad.hpp"

namespace ldlab {

namespace {
constexpr double kLog2 = 0.6931471805599453;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

std::vector<std::size_t> IntervalSystem::leading_cells(std::size_t j_max) const {
  if (j_max == 0) throw std::invalid_argument("leading_cells: need j_max >= 1");
  std::vector<std::size_t> ids;
  if (kind_ == Kind::doubling) {
    ids = {0, 1};
    if (j_max < 2) ids.resize(j_max);
  } else {
    ids.reserve(j_max);
    for (std::size_t j = 1; j <= j_max; ++j) ids.push_back(j);
  }
  return ids;
}

Interval IntervalSystem::cell(std::size_t id) const {
  if (kind_ == Kind::doubling) {
    if (id > 1) throw std::out_of_range("doubling map has cells 0 and 1");
    return id == 0 ? Interval{0.0, 0.5} : Interval{0.5, 1.0};
  }
  if (id == 0) throw std::out_of_range("gauss map cells are labelled by digits 1,2,...");
  double j = static_cast<double>(id);
  return {1.0 / (j + 1.0), 1.0 / j};
}

double IntervalSystem::cell_mass(std::size_t id) const {
  Interval c = cell(id);
  return cdf(c.hi) - cdf(c.lo);
}

double IntervalSystem::remainder_mass(std::size_t j_max) const {
  if (kind_ == Kind::doubling) return 0.0;
  return cdf(1.0 / (static_cast<double>(j_max) + 1.0));
}

bool IntervalSystem::degenerate_point(double x) const {
  if (!(x > 0.0 && x < 1.0)) return true;
  if (kind_ == Kind::doubling) return x == 0.5;
  double r = 1.0 / x;
  return r == std::floor(r);  // x = 1/j up to roundoff of the division
}

std::size_t IntervalSystem::cell_index(double x) const {
  if (degenerate_point(x)) throw orbit_degenerate_error(x, 0);
  if (kind_ == Kind::doubling) return x < 0.5 ? 0 : 1;
  return static_cast<std::size_t>(std::floor(1.0 / x));
}

double IntervalSystem::forward(double x) const {
  double j = static_cast<double>(cell_index(x));
  if (kind_ == Kind::doubling) return 2.0 * x - j;
  return 1.0 / x - j;
}

double IntervalSystem::derivative(double x) const {
  if (kind_ == Kind::doubling) return 2.0;
  return -1.0 / (x * x);
}

double IntervalSystem::branch_inverse(std::size_t id, double y) const {
  Interval img = branch_image(id);
  if (!(y > img.lo && y < img.hi)) throw std::domain_error("branch_inverse: y not in the image");
  double j = static_cast<double>(id);
  if (kind_ == Kind::doubling) return (y + j) / 2.0;
  return 1.0 / (y + j);
}

Interval IntervalSystem::branch_image(std::size_t id) const {
  cell(id);  // validate the label
  return {0.0, 1.0};  // both built-ins have full branches
}

double IntervalSystem::density(double x) const {
  if (kind_ == Kind::doubling) return 1.0;
  return 1.0 / ((1.0 + x) * kLog2);
}

double IntervalSystem::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (kind_ == Kind::doubling) return x;
  return std::log2(1.0 + x);
}

double IntervalSystem::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile: u must lie in (0,1)");
  if (kind_ == Kind::doubling) return u;
  return std::exp2(u) - 1.0;
}

IntervalSystem builtin_system(const std::string& name) {
  if (name == "doubling") return IntervalSystem(IntervalSystem::Kind::doubling, name);
  if (name == "gauss") return IntervalSystem(IntervalSystem::Kind::gauss, name);
  throw construction_error("unknown builtin system: " + name);
}

double sample_invariant(const IntervalSystem& sys, Rng& rng) { return sys.quantile(rng.uniform()); }

// ---------------------------------------------------------------- Observable

namespace {
constexpr double kTwoPi = 6.283185307179586;

// mu-mean of x^{-1/alpha}; the integrand has an integrable endpoint
// singularity at 0 (alpha > 1), which tanh-sinh resolves
double raw_power_mean(const IntervalSystem& sys, double alpha) {
  double e = -1.0 / alpha;
  return integrate_endpoints([&](double x) { return std::pow(x, e) * sys.density(x); }, 0.0, 1.0,
                             1e-13);
}

// mu-mean of cos(2 pi x); smooth, so plain adaptive quadrature
double raw_cos_mean(const IntervalSystem& sys) {
  return integrate_adaptive([&](double x) { return std::cos(kTwoPi * x) * sys.density(x); }, 0.0,
                            1.0, 1e-14);
}
}  // namespace

Observable Observable::power_tail(double alpha, const IntervalSystem& sys, bool centered) {
  if (alpha == 1.0) throw alpha_one_error();
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw construction_error("power_tail: alpha must lie in (0,1) u (1,2]");
  if (centered && alpha < 1.0)
    throw construction_error("power_tail: centering requires a finite mean (alpha > 1)");
  double c = centered ? raw_power_mean(sys, alpha) : 0.0;
  return Observable(sys, ObservableForm::power, alpha, c, 0.0);
}

Observable Observable::constant(double value, const IntervalSystem& sys) {
  return Observable(sys, ObservableForm::constant, kNaN, 0.0, value);
}

Observable Observable::bounded(const IntervalSystem& sys) {
  return Observable(sys, ObservableForm::bounded, kNaN, raw_cos_mean(sys), 0.0);
}

double Observable::alpha() const {
  if (form_ != ObservableForm::power) throw std::domain_error("observable has no tail index");
  return alpha_;
}

double Observable::operator()(double x) const {
  switch (form_) {
    case ObservableForm::constant: return value_;
    case ObservableForm::bounded: return std::cos(kTwoPi * x) - c_;
    case ObservableForm::power: break;
  }
  return std::pow(x, -1.0 / alpha_) - c_;
}

double Observable::mean_mu() const {
  switch (form_) {
    case ObservableForm::constant: return value_;
    case ObservableForm::bounded: return raw_cos_mean(sys_) - c_;
    case ObservableForm::power: break;
  }
  if (alpha_ < 1.0) throw std::domain_error("power observable has infinite mean for alpha < 1");
  return raw_power_mean(sys_, alpha_) - c_;
}

double Observable::tail_mu(double N) const {
  switch (form_) {
    case ObservableForm::constant: return value_ > N ? 1.0 : 0.0;
    case ObservableForm::bounded: {
      double s = N + c_;  // mu(cos(2 pi x) > s)
      if (s >= 1.0) return 0.0;
      if (s <= -1.0) return 1.0;
      double a = std::acos(s) / kTwoPi;  // level set (0,a) u (1-a,1)
      return sys_.cdf(a) + 1.0 - sys_.cdf(1.0 - a);
    }
    case ObservableForm::power: break;
  }
  double s = N + c_;
  if (s <= 1.0) return 1.0;  // x^{-1/alpha} > 1 almost surely
  return sys_.cdf(std::pow(s, -alpha_));
}

double Observable::tail_constant() const {
  if (form_ != ObservableForm::power) throw std::domain_error("observable has no power tail");
  return sys_.density(0.0);
}

double Observable::norming_a(std::uint64_t n) const {
  return std::pow(static_cast<double>(n) * tail_constant(), 1.0 / alpha());
}

StableLaw Observable::limit_law() const { return StableLaw::limit_of(alpha(), 1.0, 0.0); }

double Observable::lipschitz_on(std::size_t cell_id) const {
  if (form_ == ObservableForm::constant) return 0.0;
  Interval c = sys_.cell(cell_id);
  if (form_ == ObservableForm::bounded) {
    // |v'| = 2 pi |sin(2 pi x)|; extrema at the endpoints or at x = 1/4, 3/4
    double s = std::max(std::fabs(std::sin(kTwoPi * c.lo)), std::fabs(std::sin(kTwoPi * c.hi)));
    if (c.lo < 0.25 && 0.25 < c.hi) s = 1.0;
    if (c.lo < 0.75 && 0.75 < c.hi) s = 1.0;
    return kTwoPi * s;
  }
  if (c.lo == 0.0) return kInf;
  // |v'| = (1/alpha) x^{-1/alpha - 1}, decreasing: the sup sits at the left end
  return std::pow(c.lo, -1.0 / alpha_ - 1.0) / alpha_;
}

double Observable::inf_abs_on(std::size_t cell_id) const {
  if (form_ == ObservableForm::constant) return std::fabs(value_);
  Interval c = sys_.cell(cell_id);
  if (form_ == ObservableForm::bounded) {
    // monotone except across the interior extremum at x = 1/2
    double va = (*this)(c.lo), vb = (*this)(c.hi);
    double mn = std::min(va, vb), mx = std::max(va, vb);
    if (c.lo < 0.5 && 0.5 < c.hi) mn = std::min(mn, (*this)(0.5));
    if (mn > 0.0) return mn;
    if (mx < 0.0) return -mx;
    return 0.0;
  }
  double va = c.lo == 0.0 ? kInf : (*this)(c.lo);
  double vb = (*this)(c.hi);
  if (va > 0.0 && vb > 0.0) return std::min(va, vb);
  if (va < 0.0 && vb < 0.0) return std::min(-va, -vb);
  return 0.0;  // v is monotone and changes sign inside the cell
}

// -------------------------------------------------------------------- orbits

double ergodic_sum(const IntervalSystem& sys, const Observable& obs, double x0, std::uint64_t n) {
  KahanSum sum;
  double x = x0;
  for (std::uint64_t j = 0; j < n; ++j) {
    if (sys.degenerate_point(x)) throw orbit_degenerate_error(x, j);
    sum.add(obs(x));
    if (j + 1 < n) x = sys.forward(x);
  }
  return sum.value();
}

double sample_vn(const IntervalSystem& sys, const Observable& obs, std::uint64_t n, Rng& rng) {
  if (n == 0) return 0.0;
  if (sys.kind() == IntervalSystem::Kind::doubling) {
    // Exact orbit: the doubling map is the shift on binary expansions, so we
    // slide a 64-bit window along a stream of random bits. x_j is the window
    // read as a fraction (offset half an ulp to stay inside (0,1)); truncation
    // at 64 bits perturbs v by less than one part in 2^53 and, unlike naive
    // double iteration, survives arbitrarily many steps.
    std::uint64_t cur = rng.bits(), buf = rng.bits();
    unsigned avail = 64;
    KahanSum sum;
    for (std::uint64_t j = 0;; ++j) {
      double x = static_cast<double>(cur) * 0x1.0p-64 + 0x1.0p-65;
      sum.add(obs(x));
      if (j + 1 == n) break;
      cur = (cur << 1) | (buf >> 63);
      buf <<= 1;
      if (--avail == 0) {
        buf = rng.bits();
        avail = 64;
      }
    }
    return sum.value();
  }
  // Gauss orbits run in double precision from a stationary start 2^U - 1;
  // the measure-zero starts that reach a cell endpoint are redrawn.
  for (int attempt = 0; attempt < 256; ++attempt) {
    double x = std::exp2(rng.uniform()) - 1.0;
    KahanSum sum;
    bool ok = true;
    for (std::uint64_t j = 0; j < n; ++j) {
      if (!(x > 0.0 && x < 1.0)) {
        ok = false;
        break;
      }
      double r = 1.0 / x;
      double fl = std::floor(r);
      if (r == fl) {  // on a cell endpoint
        ok = false;
        break;
      }
      sum.add(obs(x));
      x = r - fl;
    }
    if (ok) return sum.value();
  }
  throw orbit_degenerate_error(0.0, n);
}

Estimate mc_tail_vn(const IntervalSystem& sys, const Observable& obs, std::uint64_t n, double N,
                    std::uint64_t samples, std::uint64_t seed, unsigned shards) {
  if (n == 0 || samples == 0 || shards == 0)
    throw std::invalid_argument("mc_tail_vn: need n, samples and shards >= 1");
  if (N <= -8.9e307) return wilson_ci(samples, samples);
  if (!obs.is_constant()) {
    double tail1 = obs.tail_mu(N);
    if (tail1 < 1.0) {
      double per_sum = std::min(1.0, static_cast<double>(n) * tail1);
      double expected = static_cast<double>(samples) * per_sum;
      if (expected < 100.0) {
        double need = per_sum > 0.0 ? std::ceil(100.0 / per_sum) : 0.0;
        std::uint64_t required = need > 0.0 && need < 1.8e19
                                     ? static_cast<std::uint64_t>(need)
                                     : std::numeric_limits<std::uint64_t>::max();
        throw insufficient_samples_error(expected, required);
      }
    }
  }
  bool heavy = obs.form() == ObservableForm::power;
  double b = heavy && obs.alpha() > 1.0 ? static_cast<double>(n) * obs.mean_mu() : 0.0;
  double threshold = N + b;
  std::uint64_t hits = 0;
  for (unsigned s = 0; s < shards; ++s) {
    auto [lo, hi] = shard_range(samples, shards, s);
    Rng rng(seed, s + 1);
    for (std::uint64_t k = lo; k < hi; ++k)
      if (sample_vn(sys, obs, n, rng) > threshold) ++hits;
  }
  return wilson_ci(hits, samples);
}

// --------------------------------------------------------------- diagnostics

H1Report check_H1(const IntervalSystem& sys, const Observable& obs,
                  const std::vector<double>& N_grid) {
  if (obs.system().kind() != sys.kind())
    throw construction_error("check_H1: observable is bound to a different system");
  if (N_grid.size() < 4) throw std::invalid_argument("check_H1: need at least 4 grid points");
  for (std::size_t i = 0; i + 1 < N_grid.size(); ++i)
    if (!(N_grid[i] < N_grid[i + 1]))
      throw std::invalid_argument("check_H1: grid must increase strictly");
  if (!(N_grid.front() > 0.0) || !(N_grid.back() >= 100.0 * N_grid.front()))
    throw std::invalid_argument("check_H1: grid must span at least two decades");

  H1Report r;
  r.grid = N_grid;
  r.tail.reserve(N_grid.size());
  std::vector<double> lx, ly;
  for (double N : N_grid) {
    double t = obs.tail_mu(N);
    if (!(t > 0.0) || t >= 0.5)
      throw model_mismatch_error("check_H1: mu(v > N) is not a tail at N = " + std::to_string(N));
    r.tail.push_back(t);
    lx.push_back(std::log(N));
    ly.push_back(std::log(t));
  }
  r.fit = ols_fit(lx, ly);
  r.alpha_fit = -r.fit.slope;
  r.const_fit = std::exp(r.fit.intercept);
  if (r.fit.max_abs_resid > 0.1)
    throw model_mismatch_error("check_H1: log-log residual " + std::to_string(r.fit.max_abs_resid) +
                               " exceeds 0.1; tail is not a clean power on this grid");
  return r;
}

namespace {

// least s >= 0 with T^s y and T^s y' in different cells, capped (the cap is
// also used when an orbit degenerates first)
unsigned separation_time(const IntervalSystem& sys, double y, double yp, unsigned cap) {
  for (unsigned s = 0; s < cap; ++s) {
    if (sys.degenerate_point(y) || sys.degenerate_point(yp)) return cap;
    if (sys.cell_index(y) != sys.cell_index(yp)) return s;
    y = sys.forward(y);
    yp = sys.forward(yp);
  }
  return cap;
}

// log g for g = dmu/(dmu o T) = h(x) / (h(Tx) |T'(x)|)
double log_g(const IntervalSystem& sys, double x) {
  return std::log(sys.density(x)) - std::log(sys.density(sys.forward(x))) -
         std::log(std::fabs(sys.derivative(x)));
}

}  // namespace

GibbsMarkovReport gibbs_markov_diagnostics(const IntervalSystem& sys, std::size_t j_max,
                                           std::size_t pair_samples, std::uint64_t seed,
                                           const Observable* obs) {
  if (pair_samples == 0) throw std::invalid_argument("gibbs_markov_diagnostics: need pairs >= 1");
  const unsigned cap = 48;  // theta^48 ~ 3.6e-15: deeper agreement is noise
  const double theta = sys.theta();
  Rng rng(seed, 0);

  GibbsMarkovReport rep;
  rep.min_image_measure = kInf;
  rep.min_expansion = kInf;
  rep.lip_ratio_sup = obs ? 0.0 : kNaN;
  for (std::size_t id : sys.leading_cells(j_max)) {
    Interval c = sys.cell(id);
    Interval img = sys.branch_image(id);
    BranchDiagnostic d;
    d.id = id;
    d.image_measure = sys.cdf(img.hi) - sys.cdf(img.lo);
    d.expansion_inf =
        std::min(std::fabs(sys.derivative(c.lo)), std::fabs(sys.derivative(c.hi)));
    double dist = 0.0, lip = 0.0;
    for (std::size_t k = 0; k < pair_samples; ++k) {
      double y = c.lo + c.length() * rng.uniform();
      double yp = c.lo + c.length() * rng.uniform();
      if (y == yp || sys.degenerate_point(y) || sys.degenerate_point(yp)) continue;
      double dth = std::pow(theta, separation_time(sys, y, yp, cap));
      dist = std::max(dist, std::fabs(log_g(sys, y) - log_g(sys, yp)) / dth);
      if (obs) lip = std::max(lip, std::fabs((*obs)(y) - (*obs)(yp)) / dth);
    }
    d.distortion_C = dist;
    if (obs) {
      double inf_v = obs->inf_abs_on(id);
      d.lip_ratio = inf_v > 0.0 ? lip / inf_v : (lip == 0.0 ? 0.0 : kInf);
      rep.lip_ratio_sup = std::max(rep.lip_ratio_sup, d.lip_ratio);
    } else {
      d.lip_ratio = kNaN;
    }
    rep.min_image_measure = std::min(rep.min_image_measure, d.image_measure);
    rep.max_distortion_C = std::max(rep.max_distortion_C, d.distortion_C);
    rep.min_expansion = std::min(rep.min_expansion, d.expansion_inf);
    rep.branches.push_back(d);
  }
  rep.remainder_mass = sys.remainder_mass(j_max);
  return rep;
}

}  // namespace ldlab
