#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ldlab {

// Compensated (Kahan) accumulator; used wherever long sums of wildly
// different magnitudes are formed (ergodic sums, quadrature tallies).
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// Upper tail of the standard normal, exact via erfc.
inline double normal_upper_tail(double x) { return 0.5 * std::erfc(x * 0x1.6a09e667f3bcdp-1); }

// z for a two-sided 99% normal interval.
inline constexpr double z99 = 2.5758293035489004;

struct Estimate {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
};

// Wilson score interval for a binomial proportion.
inline Estimate wilson_ci(std::uint64_t hits, std::uint64_t samples, double z = z99) {
  Estimate e;
  e.hits = hits;
  e.samples = samples;
  if (samples == 0) throw std::invalid_argument("wilson_ci: zero samples");
  double n = static_cast<double>(samples);
  double p = static_cast<double>(hits) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (p + z2 / (2.0 * n)) / denom;
  double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  e.value = p;
  e.ci_lo = std::max(0.0, center - half);
  e.ci_hi = std::min(1.0, center + half);
  return e;
}

// Asymptotic Kolmogorov-Smirnov 99% critical distance for n samples
// (one-sample). Two-sample versions rescale by the effective n.
inline double ks_band_99(double n) { return 1.6276236115189501 / std::sqrt(n); }

// Exact one-sample KS distance of a sorted sample against a CDF callable.
inline double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
  std::size_t n = sorted.size();
  if (n == 0) throw std::invalid_argument("ks_distance: empty sample");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = cdf(sorted[i]);
    double hi = static_cast<double>(i + 1) / static_cast<double>(n) - f;
    double lo = f - static_cast<double>(i) / static_cast<double>(n);
    d = std::max({d, hi, lo});
  }
  return d;
}

// One-sample KS distance evaluated on an explicit grid (for CDFs that are
// expensive per point: exact at the grid, a slight underestimate of the sup).
inline double ks_distance_grid(const std::vector<double>& sorted, const std::vector<double>& grid_x,
                               const std::vector<double>& grid_cdf) {
  if (grid_x.size() != grid_cdf.size() || grid_x.empty())
    throw std::invalid_argument("ks_distance_grid: bad grid");
  double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t k = 0; k < grid_x.size(); ++k) {
    auto it = std::upper_bound(sorted.begin(), sorted.end(), grid_x[k]);
    double emp = static_cast<double>(it - sorted.begin()) / n;
    d = std::max(d, std::fabs(emp - grid_cdf[k]));
  }
  return d;
}

// Two-sample KS distance (both inputs sorted).
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    // consume every point at the current value on both sides, then compare
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline std::vector<double> ranks_of(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank, 1-based
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Spearman rank correlation.
inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("spearman_rho: need n >= 3");
  auto rx = ranks_of(x), ry = ranks_of(y);
  return pearson(rx, ry);
}

// One-sided p-value for positive association, exact permutation distribution
// for n <= 8, normal approximation above. p = P(rho_perm >= rho_observed).
inline double spearman_p_positive(const std::vector<double>& x, const std::vector<double>& y) {
  double rho_obs = spearman_rho(x, y);
  std::size_t n = x.size();
  auto ry = ranks_of(y);
  if (n <= 8) {
    std::vector<double> perm = ranks_of(x);
    std::sort(perm.begin(), perm.end());
    std::uint64_t total = 0, ge = 0;
    do {
      ++total;
      if (pearson(perm, ry) >= rho_obs - 1e-12) ++ge;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(ge) / static_cast<double>(total);
  }
  double z = rho_obs * std::sqrt(static_cast<double>(n) - 1.0);
  return normal_upper_tail(z);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_resid = 0.0;
  double rms_resid = 0.0;
};

// Ordinary least squares y = intercept + slope*x.
inline LinearFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_fit: need n >= 2");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = n * sxx - sx * sx;
  if (det == 0.0) throw std::invalid_argument("ols_fit: degenerate abscissae");
  LinearFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    f.max_abs_resid = std::max(f.max_abs_resid, std::fabs(r));
    ss += r * r;
  }
  f.rms_resid = std::sqrt(ss / n);
  return f;
}

}  // namespace ldlab
