#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "ldlab/charfn.hpp"
#include "ldlab/errors.hpp"
#include "ldlab/quad.hpp"
#include "ldlab/stats.hpp"
#include "ldlab/tail_model.hpp"

using namespace ldlab;

namespace {

TailModel sym075() { return TailModel(0.75, 0.5, 0.5, SlowlyVarying::constant(1.0), 1.0, false); }
TailModel pareto15() { return TailModel(1.5, 1.0, 0.0, SlowlyVarying::constant(1.0), 1.0, false); }

// independent oracle: brute-force oscillatory quadrature of the tail piece on
// the real line out to a fixed cut; |remainder| <= 2 rho(cut)/t for the
// monotone densities used here
cplx direct_tail(const TailModel& m, double t, double cut, double* bound) {
  double qerr = 0.0;
  cplx body = integrate_oscillatory<cplx>(
      [&](double x) { return std::exp(cplx(0.0, t * x)) * m.tail_density_rho(x); }, m.x_min(), cut,
      t, &qerr);
  *bound = 2.0 * m.tail_density_rho(cut) / t + qerr;
  return body;
}

}  // namespace

TEST_CASE("charfn: exact point, symmetry, modulus") {
  auto m = sym075();
  double err = 1.0;
  CHECK(charfn_Psi(m, 0.0, &err) == cplx(1.0, 0.0));
  CHECK(err == 0.0);
  for (double t : {1e-4, 0.03, 0.4, 2.0, 15.0}) {
    cplx v = charfn_Psi(m, t, &err);
    CHECK(err <= 1e-10);
    CHECK(std::abs(v) <= 1.0 + 1e-12);
    // p = q makes Psi real by exact conjugate cancellation
    CHECK(v.imag() == 0.0);
    cplx w = charfn_Psi(m, -t);
    CHECK(w == std::conj(v));
  }
}

TEST_CASE("charfn: contour agrees with brute-force real-line quadrature") {
  // pure right tail, no interior: Psi is exactly the tail integral
  auto m = pareto15();
  CHECK(m.interior_mass() == 0.0);
  for (double t : {0.3, 2.0}) {
    double bound = 0.0;
    cplx direct = direct_tail(m, t, 1e5, &bound);
    cplx via_contour = charfn_Psi(m, t);
    CHECK(std::abs(via_contour - direct) <= bound + 1e-9);
  }
  // interior + two tails, alpha < 1
  auto mi = TailModel(0.75, 0.5, 0.5, SlowlyVarying::constant(1.0), 2.0, false);
  CHECK(mi.interior_mass() > 0.3);
  for (double t : {0.5, 3.0}) {
    double bound = 0.0;
    cplx tail = direct_tail(mi, t, 1e5, &bound);
    double interior = integrate_adaptive(
        [&](double x) { return mi.interior_level() * std::cos(t * x); }, -2.0, 2.0);
    cplx direct = interior + 0.5 * tail + 0.5 * std::conj(tail);
    CHECK(std::abs(charfn_Psi(mi, t) - direct) <= bound + 1e-9);
  }
  // centered asymmetric model exercises the interior tilt term
  auto mc = TailModel(1.5, 0.7, 0.3, SlowlyVarying::constant(1.0), 4.0, true);
  CHECK(mc.interior_tilt() != 0.0);
  {
    double t = 0.7, bound = 0.0;
    cplx tail = direct_tail(mc, t, 1e5, &bound);
    double re = integrate_adaptive(
        [&](double x) { return (mc.interior_level() + mc.interior_tilt() * x) * std::cos(t * x); },
        -4.0, 4.0);
    double im = integrate_adaptive(
        [&](double x) { return (mc.interior_level() + mc.interior_tilt() * x) * std::sin(t * x); },
        -4.0, 4.0);
    cplx direct = cplx(re, im) + 0.7 * tail + 0.3 * std::conj(tail);
    CHECK(std::abs(charfn_Psi(mc, t) - direct) <= bound + 1e-8);
    // centering shows up as a vanishing first derivative: Im Psi(t)/t is down
    // to the t^{alpha-1} correction (~1e-3 here), not the mean (~0.85)
    CHECK(std::abs(charfn_Psi(mc, 1e-6).imag() / 1e-6) < 2e-3);
  }
  // uncentered mean appears as the slope of Im Psi at 0
  CHECK(charfn_Psi(m, 1e-6).imag() / 1e-6 == doctest::Approx(3.0).epsilon(1e-3));
}

TEST_CASE("charfn: custom factor fallback matches the analytic path") {
  // same slowly varying function once with and once without a continuation
  auto lg = SlowlyVarying::log_power(1.0);
  auto cu = SlowlyVarying::custom([](double x) { return std::log(x); }, "log");
  CHECK(lg.analytic());
  CHECK(!cu.analytic());
  auto ma = TailModel(0.75, 0.5, 0.5, lg, 4.0, false);
  auto mf = TailModel(0.75, 0.5, 0.5, cu, 4.0, false);
  for (double t : {0.5, 2.0}) {
    double ea = 0.0, ef = 0.0;
    cplx a = charfn_Psi(ma, t, &ea);
    cplx f = charfn_Psi(mf, t, &ef);
    CHECK(ea <= 1e-10);
    CHECK(std::abs(a - f) <= ea + ef + 1e-9);
  }
}

TEST_CASE("charfn: tail exponent and amplitude from the cusp") {
  auto m = sym075();
  std::vector<double> lt, lv;
  for (int k = 0; k < 25; ++k) {
    double t = 1e-4 * std::pow(10.0, 3.0 * k / 24.0);  // [1e-4, 1e-1]
    lt.push_back(std::log(t));
    lv.push_back(std::log(1.0 - charfn_Psi(m, t).real()));
  }
  auto fit = ols_fit(lt, lv);
  CHECK(fit.slope == doctest::Approx(0.75).epsilon(0.027));  // 0.75 +- 0.02
  // 1 - Psi(t) ~ Gamma(1-alpha) cos(pi alpha / 2) t^alpha for the symmetric law
  double c0 = std::tgamma(0.25) * std::cos(3.0 * 3.141592653589793 / 8.0);
  double t0 = 1e-3;
  double amp = (1.0 - charfn_Psi(m, t0).real()) / (c0 * std::pow(t0, 0.75));
  CHECK(amp == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("charfn table: construction guards and symmetry") {
  std::vector<double> g{0.0, 0.1, 0.2};
  std::vector<cplx> v{cplx(1.0, 0.0), cplx(0.9, -0.05), cplx(0.8, -0.1)};
  std::vector<double> e{0.0, 1e-10, 1e-10};
  CharFnTable tab(g, v, e, CharFnTable::Provenance::quadrature);
  CHECK(tab.value(0.0) == cplx(1.0, 0.0));
  CHECK(tab.value(-0.1) == std::conj(tab.value(0.1)));
  CHECK(tab.t_max() == 0.2);
  CHECK(tab.grid().size() == 5);
  CHECK(tab.grid().front() == -0.2);
  CHECK(tab.values().front() == std::conj(tab.values().back()));
  CHECK_THROWS_AS(tab.value(0.3), std::out_of_range);

  auto bad_start = g;
  bad_start[0] = 0.05;
  CHECK_THROWS_AS(CharFnTable(bad_start, v, e, CharFnTable::Provenance::quadrature),
                  construction_error);
  auto bad_one = v;
  bad_one[0] = cplx(0.5, 0.0);
  CHECK_THROWS_AS(CharFnTable(g, bad_one, e, CharFnTable::Provenance::quadrature),
                  construction_error);
  auto too_big = v;
  too_big[2] = cplx(1.2, 0.0);
  CHECK_THROWS_AS(CharFnTable(g, too_big, e, CharFnTable::Provenance::quadrature),
                  construction_error);
  auto slack = e;
  slack[2] = 0.25;  // modulus 1.2 is fine if the node bound allows it
  CHECK_NOTHROW(CharFnTable(g, too_big, slack, CharFnTable::Provenance::monte_carlo));
}

TEST_CASE("charfn table: quadrature vs empirical characteristic function") {
  auto m = sym075();
  const std::uint64_t M = 1000000;
  auto quad = tabulate_charfn(m, 0.5, 17);
  auto mc = tabulate_charfn_mc(m, 0.5, 17, M, 20240816);
  CHECK(quad.provenance() == CharFnTable::Provenance::quadrature);
  CHECK(mc.provenance() == CharFnTable::Provenance::monte_carlo);
  CHECK(mc.value(0.0) == cplx(1.0, 0.0));
  // the quadrature grid is refined beyond the seed, so compare at the MC nodes
  double band = 4.0 / std::sqrt(static_cast<double>(M));
  for (std::size_t i = 0; i < mc.half_grid().size(); ++i)
    CHECK(std::abs(quad.value(mc.half_grid()[i]) - mc.half_values()[i]) <= band);
  // interpolation between nodes stays close on a denser table
  auto fine = tabulate_charfn(m, 0.5, 400);
  for (double t : {0.013, 0.11, 0.37})
    CHECK(std::abs(fine.value(t) - charfn_Psi(m, t)) <= 2e-8);
}
