#include "ldlab/ulam.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>

#include "ldlab/errors.hpp"
#include "ldlab/stats.hpp"

namespace ldlab {

namespace {
constexpr std::size_t kMaxGrid = 1u << 16;   // CSR stays ~m^{3/2} entries
constexpr std::size_t kMaxDense = 2048;      // dense dump is m^2 doubles

double digamma(double x) { return boost::math::digamma(x); }
}  // namespace

UlamOperator::UlamOperator(const IntervalSystem& sys, std::size_t m) : sys_(sys), m_(m) {
  if (m < 2) throw construction_error("ulam: the grid needs at least two cells");
  if (m > kMaxGrid) throw construction_error("ulam: grid too large for the memory budget");
  build_rows();
  weights_.resize(m_);
  for (std::size_t i = 0; i < m_; ++i)
    weights_[i] = sys_.cdf(boundary(i + 1)) - sys_.cdf(boundary(i));
  // same exact-sum pinning as the rows, so integrating 1 against mu gives 1
  double pre = 0.0;
  for (std::size_t i = 0; i + 1 < m_; ++i) pre += weights_[i];
  if (1.0 - pre > 0.0) weights_[m_ - 1] = 1.0 - pre;
}

double UlamOperator::boundary(std::size_t j) const {
  return static_cast<double>(j) / static_cast<double>(m_);
}

double UlamOperator::midpoint(std::size_t i) const {
  return (static_cast<double>(i) + 0.5) / static_cast<double>(m_);
}

void UlamOperator::build_rows() {
  std::vector<double> acc(m_, 0.0);       // scratch row, reset after harvest
  std::vector<std::int32_t> touched;      // columns hit when the row is sparse
  bool full_row = false;

  auto add = [&](std::int64_t j, double mass) {
    if (mass <= 0.0) return;
    if (j < 0) j = 0;
    if (j >= static_cast<std::int64_t>(m_)) j = static_cast<std::int64_t>(m_) - 1;
    if (!full_row && acc[static_cast<std::size_t>(j)] == 0.0)
      touched.push_back(static_cast<std::int32_t>(j));
    acc[static_cast<std::size_t>(j)] += mass;
  };

  // spread the Lebesgue mass of one monotone branch piece over the grid cells
  // its image crosses; inv is the closed-form inverse of that branch
  auto spread = [&](double img_lo, double img_hi, auto&& inv) {
    img_lo = std::max(img_lo, 0.0);
    img_hi = std::min(img_hi, 1.0);
    if (img_hi <= img_lo) return;
    auto j0 = static_cast<std::int64_t>(img_lo * static_cast<double>(m_));
    auto j1 = static_cast<std::int64_t>(img_hi * static_cast<double>(m_));
    if (j1 >= static_cast<std::int64_t>(m_)) j1 = static_cast<std::int64_t>(m_) - 1;
    for (std::int64_t j = j0; j <= j1; ++j) {
      double seg_lo = std::max(img_lo, boundary(static_cast<std::size_t>(j)));
      double seg_hi = std::min(img_hi, boundary(static_cast<std::size_t>(j) + 1));
      if (seg_hi > seg_lo) add(j, std::fabs(inv(seg_hi) - inv(seg_lo)));
    }
  };

  rowptr_.assign(m_ + 1, 0);
  cols_.clear();
  vals_.clear();
  cols_.reserve(4 * m_);
  vals_.reserve(4 * m_);

  bool gauss = sys_.kind() == IntervalSystem::Kind::gauss;

  for (std::size_t i = 0; i < m_; ++i) {
    double lo = boundary(i), hi = boundary(i + 1);
    touched.clear();
    full_row = false;

    if (!gauss) {
      for (int b = 0; b < 2; ++b) {
        double plo = std::max(lo, 0.5 * b), phi = std::min(hi, 0.5 * (b + 1));
        if (phi <= plo) continue;
        spread(2.0 * plo - b, 2.0 * phi - b, [&](double y) { return 0.5 * (y + b); });
      }
    } else {
      // integer range of branches whose whole domain (1/(b+1), 1/b) sits
      // inside [lo, hi]; everything outside the range is handled explicitly
      std::int64_t bf_lo = static_cast<std::int64_t>(std::ceil(1.0 / hi)) - 1;
      if (bf_lo < 1) bf_lo = 1;
      while (1.0 / static_cast<double>(bf_lo) > hi) ++bf_lo;
      while (bf_lo > 1 && 1.0 / static_cast<double>(bf_lo - 1) <= hi) --bf_lo;

      bool infinite = lo <= 0.0;
      std::int64_t bf_hi = -1;
      if (!infinite) {
        bf_hi = static_cast<std::int64_t>(std::floor(1.0 / lo));
        while (bf_hi >= bf_lo && 1.0 / static_cast<double>(bf_hi + 1) < lo) --bf_hi;
        while (1.0 / static_cast<double>(bf_hi + 2) >= lo) ++bf_hi;
      }
      bool has_range = infinite || bf_hi >= bf_lo;

      // boundary branches: a handful of candidates around the range ends,
      // validated by direct domain intersection
      auto explicit_branch = [&](std::int64_t b) {
        if (b < 1) return;
        if (has_range && b >= bf_lo && (infinite || b <= bf_hi)) return;  // covered by the range
        double dlo = 1.0 / static_cast<double>(b + 1), dhi = 1.0 / static_cast<double>(b);
        double plo = std::max(lo, dlo), phi = std::min(hi, dhi);
        if (phi <= plo) return;
        double bb = static_cast<double>(b);
        spread(1.0 / phi - bb, 1.0 / plo - bb, [&](double y) { return 1.0 / (y + bb); });
      };
      for (std::int64_t b = bf_lo - 3; b <= bf_lo + 1; ++b) explicit_branch(b);
      if (!infinite)
        for (std::int64_t b = bf_hi - 1; b <= bf_hi + 3; ++b)
          if (b > bf_lo + 1) explicit_branch(b);

      if (has_range) {
        // sum over the whole branch range in closed form: the mass sent into
        // column j by branches b = B0..B1 telescopes to differences of
        // digamma values at the column boundaries
        full_row = true;
        double B0 = static_cast<double>(bf_lo);
        double prev = infinite ? -digamma(B0) : digamma(static_cast<double>(bf_hi) + 1.0) - digamma(B0);
        for (std::size_t j = 0; j < m_; ++j) {
          double a = boundary(j + 1);
          double cur = infinite ? -digamma(B0 + a)
                                : digamma(static_cast<double>(bf_hi) + 1.0 + a) - digamma(B0 + a);
          acc[j] += prev - cur;
          prev = cur;
        }
      }
    }

    // harvest the row: normalize by its own mass so the row sums to one
    rowptr_[i] = static_cast<std::int64_t>(cols_.size());
    KahanSum mass;
    if (full_row) {
      for (std::size_t j = 0; j < m_; ++j) mass.add(acc[j]);
    } else {
      std::sort(touched.begin(), touched.end());
      for (std::int32_t j : touched) mass.add(acc[static_cast<std::size_t>(j)]);
    }
    double width = hi - lo;
    if (!(mass.value() > 0.0) || std::fabs(mass.value() / width - 1.0) > 1e-9)
      throw construction_error("ulam: branch mass does not add up to the cell width");
    double inv_mass = 1.0 / mass.value();
    if (full_row) {
      for (std::size_t j = 0; j < m_; ++j) {
        if (acc[j] <= 0.0) { acc[j] = 0.0; continue; }
        cols_.push_back(static_cast<std::int32_t>(j));
        vals_.push_back(acc[j] * inv_mass);
        acc[j] = 0.0;
      }
    } else {
      for (std::int32_t j : touched) {
        cols_.push_back(j);
        vals_.push_back(acc[static_cast<std::size_t>(j)] * inv_mass);
        acc[static_cast<std::size_t>(j)] = 0.0;
      }
    }
    exact_stochastic(static_cast<std::size_t>(rowptr_[i]), vals_.size());
  }
  rowptr_[m_] = static_cast<std::int64_t>(cols_.size());
}

// pin the row so its left-to-right sum is 1 to the bit: the rounding defect
// (~1 ulp) lands on the last entry, which keeps constant vectors exact fixed
// points of apply()
void UlamOperator::exact_stochastic(std::size_t lo, std::size_t hi) {
  if (hi <= lo) return;
  for (int pass = 0; pass < 4; ++pass) {
    double pre = 0.0;
    for (std::size_t k = lo; k + 1 < hi; ++k) pre += vals_[k];
    double want = 1.0 - pre;
    if (want <= 0.0) return;  // defect larger than the last entry: leave the row alone
    vals_[hi - 1] = want;
    if (pre + want == 1.0) return;
  }
}

void UlamOperator::apply(const std::vector<cplx>& f, std::vector<cplx>& y) const {
  if (f.size() != m_) throw std::invalid_argument("ulam apply: vector length mismatch");
  y.assign(m_, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < m_; ++i) {
    cplx s(0.0, 0.0);
    for (std::int64_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
      s += vals_[static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])];
    y[i] = s;
  }
}

void UlamOperator::apply_transpose(const std::vector<cplx>& f, std::vector<cplx>& y) const {
  if (f.size() != m_) throw std::invalid_argument("ulam apply: vector length mismatch");
  y.assign(m_, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < m_; ++i) {
    cplx fi = f[i];
    for (std::int64_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
      y[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])] +=
          vals_[static_cast<std::size_t>(k)] * fi;
  }
}

double UlamOperator::entry(std::size_t i, std::size_t j) const {
  if (i >= m_ || j >= m_) throw std::out_of_range("ulam entry: index outside the grid");
  auto lo = cols_.begin() + rowptr_[i], hi = cols_.begin() + rowptr_[i + 1];
  auto it = std::lower_bound(lo, hi, static_cast<std::int32_t>(j));
  if (it == hi || *it != static_cast<std::int32_t>(j)) return 0.0;
  return vals_[static_cast<std::size_t>(it - cols_.begin())];
}

double UlamOperator::row_sum_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < m_; ++i) {
    KahanSum s;
    for (std::int64_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
      s.add(vals_[static_cast<std::size_t>(k)]);
    worst = std::max(worst, std::fabs(s.value() - 1.0));
  }
  return worst;
}

std::vector<double> UlamOperator::stationary_density() const {
  std::vector<double> u = weights_, next(m_, 0.0);
  for (int it = 0; it < 20000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double fi = u[i];
      for (std::int64_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
        next[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])] +=
            vals_[static_cast<std::size_t>(k)] * fi;
    }
    double total = 0.0, diff = 0.0;
    for (std::size_t j = 0; j < m_; ++j) total += next[j];
    for (std::size_t j = 0; j < m_; ++j) {
      next[j] /= total;
      diff += std::fabs(next[j] - u[j]);
    }
    u.swap(next);
    if (diff <= 1e-14) break;
  }
  for (std::size_t j = 0; j < m_; ++j) u[j] *= static_cast<double>(m_);
  return u;
}

void UlamOperator::dump_dense(const std::string& path) const {
  if (m_ > kMaxDense) throw construction_error("ulam dump: grid too large for a dense dump");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("ulam dump: cannot open " + path);
  std::uint64_t header = m_;
  out.write(reinterpret_cast<const char*>(&header), sizeof header);
  std::vector<double> row(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (std::int64_t k = rowptr_[i]; k < rowptr_[i + 1]; ++k)
      row[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])] =
          vals_[static_cast<std::size_t>(k)];
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(m_ * sizeof(double)));
  }
  if (!out) throw config_error("ulam dump: short write to " + path);
}

UlamOperator build_ulam(const IntervalSystem& sys, std::size_t m) { return UlamOperator(sys, m); }

namespace {
// cell average of exp(i t v) under mu over (a, b), for cells where the
// midpoint phase misrepresents a power spike: the cell next to zero (v
// unbounded there) and its neighbours where the phase winds through many
// radians. Substituting u = x^{-1/alpha} turns the integral into oscillatory
// tail integrals I(s) = int_s^inf exp(itu) g(u) du; rotating the contour to
// u = s + iy/|t| makes the integrand decay like exp(-y) (the continued
// densities are analytic and bounded on Re u >= s > 1, poles of
// 1/(1+u^{-alpha}) sit on |u| = 1).
cplx cell_phase_average(const IntervalSystem& sys, const Observable& obs, double t, double a,
                        double b) {
  double alpha = obs.alpha();
  double at = std::fabs(t);
  bool gauss = sys.kind() == IntervalSystem::Kind::gauss;
  auto dens = [&](cplx u) -> cplx {  // alpha u^{-alpha-1} h(u^{-alpha})
    cplx g = alpha * std::pow(u, -alpha - 1.0);
    if (gauss) g /= (1.0 + std::pow(u, -alpha)) * 0.6931471805599453;
    return g;
  };
  auto tail = [&](double s) -> cplx {  // I(s) along the rotated contour
    cplx integral = integrate_halfline(
        [&](double y) { return std::exp(-y) * dens(cplx(s, y / at)); }, 1e-12);
    return integral * cplx(0.0, 1.0 / at) * std::exp(cplx(0.0, at * s));
  };
  cplx integral = tail(std::pow(b, -1.0 / alpha));
  if (a > 0.0) integral -= tail(std::pow(a, -1.0 / alpha));
  double cell_mass = sys.cdf(b) - (a > 0.0 ? sys.cdf(a) : 0.0);
  cplx avg = std::exp(cplx(0.0, -at * obs.centering())) * integral / cell_mass;
  if (!(std::abs(avg) <= 1.0 + 1e-9))
    throw construction_error("ulam phases: spike-cell average failed to converge");
  return t >= 0.0 ? avg : std::conj(avg);
}
}  // namespace

std::vector<cplx> phase_vector(const UlamOperator& U, const Observable& obs, double t) {
  std::size_t m = U.size();
  std::vector<cplx> d(m, cplx(1.0, 0.0));
  if (t == 0.0) return d;
  for (std::size_t i = 0; i < m; ++i) d[i] = std::exp(cplx(0.0, t * obs(U.midpoint(i))));
  if (obs.form() == ObservableForm::power) {
    // exact averages wherever the phase swings more than an eighth radian
    // across the cell; past that the midpoint rule is accurate
    double alpha = obs.alpha();
    auto raw = [&](std::size_t j) { return std::pow(U.boundary(j), -1.0 / alpha); };
    d[0] = cell_phase_average(U.system(), obs, t, 0.0, U.boundary(1));
    for (std::size_t j = 1; j < m; ++j) {
      if (std::fabs(t) * (raw(j) - raw(j + 1)) <= 0.125) break;
      d[j] = cell_phase_average(U.system(), obs, t, U.boundary(j), U.boundary(j + 1));
    }
  }
  return d;
}

std::vector<cplx> perturbed_apply(const UlamOperator& U, double t, const Observable& obs,
                                  const std::vector<cplx>& f) {
  auto d = phase_vector(U, obs, t);
  if (f.size() != U.size()) throw std::invalid_argument("perturbed_apply: vector length mismatch");
  std::vector<cplx> g(U.size()), y;
  for (std::size_t i = 0; i < U.size(); ++i) g[i] = d[i] * f[i];
  U.apply(g, y);
  return y;
}

cplx charfn_mu(const IntervalSystem& sys, const Observable& obs, double t) {
  if (t == 0.0) return cplx(1.0, 0.0);
  switch (obs.form()) {
    case ObservableForm::constant:
      return std::exp(cplx(0.0, t * obs(0.5)));
    case ObservableForm::power:
      // the whole interval is one "spike cell": same contour integral, cdf(1)=1
      return cell_phase_average(sys, obs, t, 0.0, 1.0);
    case ObservableForm::bounded: {
      double re = integrate_adaptive(
          [&](double x) { return std::cos(t * obs(x)) * sys.density(x); }, 0.0, 1.0, 1e-13);
      double im = integrate_adaptive(
          [&](double x) { return std::sin(t * obs(x)) * sys.density(x); }, 0.0, 1.0, 1e-13);
      return cplx(re, im);
    }
  }
  throw std::logic_error("charfn_mu: unhandled observable form");
}

cplx charfn_vn(const UlamOperator& U, const Observable& obs, double t, std::uint64_t n) {
  auto d = phase_vector(U, obs, t);
  std::vector<cplx> f(U.size(), cplx(1.0, 0.0)), y;
  for (std::uint64_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < U.size(); ++i) f[i] *= d[i];
    U.apply(f, y);
    f.swap(y);
  }
  cplx out(0.0, 0.0);
  const auto& w = U.weights();
  for (std::size_t i = 0; i < U.size(); ++i) out += w[i] * f[i];
  return out;
}

}  // namespace ldlab
