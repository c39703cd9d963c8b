#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "ldlab/parallel.hpp"
#include "ldlab/quad.hpp"
#include "ldlab/rng.hpp"
#include "ldlab/stats.hpp"

using namespace ldlab;

TEST_CASE("rng: deterministic across instances, distinct across streams") {
  Rng a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.bits() == b.bits());
  }
  // streams decorrelate: first draws differ
  Rng a2(42, 0);
  CHECK(a2.bits() != c.bits());
}

TEST_CASE("rng: uniform stays strictly inside (0,1)") {
  Rng r(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(lo < 1e-3);
  CHECK(hi > 1.0 - 1e-3);
}

TEST_CASE("rng: normal moments") {
  Rng r(11);
  KahanSum s1, s2;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    s1.add(x);
    s2.add(x * x);
  }
  CHECK(std::abs(s1.value() / n) < 0.01);
  CHECK(std::abs(s2.value() / n - 1.0) < 0.02);
}

TEST_CASE("kahan: compensates 1e16 + many small") {
  KahanSum s;
  s.add(1e16);
  for (int i = 0; i < 10000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == doctest::Approx(10000.0));
}

TEST_CASE("normal_upper_tail oracle values") {
  CHECK(normal_upper_tail(0.0) == doctest::Approx(0.5));
  // 1 - Phi(1.96) = 0.0249978951...
  CHECK(normal_upper_tail(1.96) == doctest::Approx(0.024997895148220428).epsilon(1e-12));
  CHECK(normal_upper_tail(-1.0) + normal_upper_tail(1.0) == doctest::Approx(1.0));
}

TEST_CASE("wilson interval covers and shrinks") {
  auto e = wilson_ci(50, 100);
  CHECK(e.value == doctest::Approx(0.5));
  CHECK(e.ci_lo < 0.5);
  CHECK(e.ci_hi > 0.5);
  auto e2 = wilson_ci(5000, 10000);
  CHECK(e2.ci_hi - e2.ci_lo < e.ci_hi - e.ci_lo);
  // zero hits: lower bound 0, upper bound positive
  auto z = wilson_ci(0, 1000);
  CHECK(z.ci_lo == doctest::Approx(0.0));
  CHECK(z.ci_hi > 0.0);
}

TEST_CASE("ks distance against exact uniform cdf") {
  // points 0.1..0.9: empirical cdf steps of 1/9, exact max deviation known
  std::vector<double> x;
  for (int i = 1; i <= 9; ++i) x.push_back(i / 10.0);
  double d = ks_distance(x, [](double v) { return v; });
  // sup over steps: max(|i/9 - i/10|, |(i-1)/9 - i/10|)
  double expect = 0.0;
  for (int i = 1; i <= 9; ++i) {
    expect = std::max(expect, std::abs(i / 9.0 - i / 10.0));
    expect = std::max(expect, std::abs((i - 1) / 9.0 - i / 10.0));
  }
  CHECK(d == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("ks two-sample on identical samples is zero") {
  std::vector<double> a{0.1, 0.2, 0.5, 0.9};
  CHECK(ks_two_sample(a, a) == doctest::Approx(0.0));
  std::vector<double> b{10.0, 11.0, 12.0, 13.0};
  CHECK(ks_two_sample(a, b) == doctest::Approx(1.0));
}

TEST_CASE("spearman: exact permutation p-value on small n") {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> yup{2, 3, 5, 7, 11};
  double rho = spearman_rho(x, yup);
  CHECK(rho == doctest::Approx(1.0));
  // perfectly increasing: P(rho >= 1) = 1/5! = 1/120
  CHECK(spearman_p_positive(x, yup) == doctest::Approx(1.0 / 120.0).epsilon(1e-12));
  std::vector<double> ydown{11, 7, 5, 3, 2};
  CHECK(spearman_rho(x, ydown) == doctest::Approx(-1.0));
  CHECK(spearman_p_positive(x, ydown) == doctest::Approx(1.0));
}

TEST_CASE("ols fit recovers line") {
  std::vector<double> x{0, 1, 2, 3, 4}, y;
  for (double v : x) y.push_back(3.0 - 0.75 * v);
  auto fit = ols_fit(x, y);
  CHECK(fit.slope == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.max_abs_resid < 1e-12);
}

TEST_CASE("quad: adaptive and panel rules on closed forms") {
  double e1 = 0.0;
  double v = integrate_adaptive([](double x) { return std::exp(-x * x); }, 0.0, 6.0, 1e-13, &e1);
  CHECK(v == doctest::Approx(0.8862269254527580).epsilon(1e-12));  // sqrt(pi)/2

  // endpoint singularity 1/sqrt(x)
  double s = integrate_endpoints([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0);
  CHECK(s == doctest::Approx(2.0).epsilon(1e-10));

  // halfline decay
  double h = integrate_halfline([](double x) { return std::exp(-3.0 * x); });
  CHECK(h == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("quad: oscillatory panels resolve e^{i w t}") {
  // int_0^10 cos(50 t) dt = sin(500)/50
  double w = 50.0;
  double err = 0.0;
  double v = integrate_oscillatory<double>([&](double t) { return std::cos(w * t); }, 0.0, 10.0, w,
                                           &err);
  CHECK(v == doctest::Approx(std::sin(500.0) / 50.0).epsilon(1e-10));
  CHECK(err < 1e-8);

  // complex variant: int_0^1 e^{i w t} dt = (e^{iw}-1)/(iw)
  cplx z = integrate_oscillatory<cplx>(
      [&](double t) { return std::exp(cplx(0.0, w * t)); }, 0.0, 1.0, w);
  cplx want = (std::exp(cplx(0.0, w)) - cplx(1.0, 0.0)) / cplx(0.0, w);
  CHECK(std::abs(z - want) < 1e-12);
}

TEST_CASE("quad: halfline handles complex integrands") {
  // int_0^inf e^{-(1 - i) s} ds = 1/(1 - i) = (1 + i)/2
  cplx z = integrate_halfline([](double s) { return std::exp(-s) * std::exp(cplx(0.0, s)); });
  CHECK(std::abs(z - cplx(0.5, 0.5)) < 1e-10);
}

TEST_CASE("complex table: cubic interpolation reproduces smooth data") {
  std::vector<double> t;
  std::vector<cplx> v;
  for (int i = 0; i <= 160; ++i) {
    double x = i * 0.0125;
    t.push_back(x);
    v.push_back(std::exp(cplx(0.0, 2.0 * x)) * (1.0 + x));
  }
  ComplexTable tab(std::move(t), std::move(v));
  for (double x : {0.013, 0.51, 1.23, 1.987}) {
    cplx want = std::exp(cplx(0.0, 2.0 * x)) * (1.0 + x);
    CHECK(std::abs(tab.eval(x) - want) < 5e-7);
  }
  CHECK_THROWS_AS(tab.eval(2.5), std::out_of_range);
}

TEST_CASE("parallel_for_jobs covers all jobs exactly once") {
  std::vector<int> hits(257, 0);
  parallel_for_jobs(hits.size(), [&](std::size_t k) { hits[k]++; });
  for (int h : hits) CHECK(h == 1);
  auto [lo, hi] = shard_range(100, 7, 6);
  CHECK(hi == 100);
  std::size_t total = 0;
  for (std::size_t k = 0; k < 7; ++k) {
    auto [a, b] = shard_range(100, 7, k);
    total += b - a;
  }
  CHECK(total == 100);
}
