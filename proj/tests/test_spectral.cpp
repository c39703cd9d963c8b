#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ldlab/errors.hpp"
#include "ldlab/rng.hpp"
#include "ldlab/spectral.hpp"
#include "ldlab/ulam.hpp"

using namespace ldlab;

namespace {
constexpr double kLn2 = 0.6931471805599453;

std::vector<double> geomgrid(double a, double b, int k) {
  std::vector<double> g;
  for (int i = 0; i < k; ++i)
    g.push_back(a * std::pow(b / a, static_cast<double>(i) / (k - 1)));
  return g;
}

double l1_weights(const std::vector<cplx>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}
}  // namespace

TEST_CASE("ulam matrix: doubling by hand") {
  auto dbl = builtin_system("doubling");
  auto U = build_ulam(dbl, 2);

  // each cell's image covers both cells with equal mass
  CHECK(U.size() == 2);
  CHECK(U.nonzeros() == 4);
  CHECK(U.entry(0, 0) == 0.5);
  CHECK(U.entry(0, 1) == 0.5);
  CHECK(U.entry(1, 0) == 0.5);
  CHECK(U.entry(1, 1) == 0.5);
  CHECK(U.row_sum_defect() == 0.0);
  CHECK(U.weights()[0] == 0.5);
  CHECK(U.weights()[1] == 0.5);
  CHECK(U.boundary(1) == 0.5);
  CHECK(U.midpoint(1) == 0.75);
  CHECK_THROWS_AS(U.entry(2, 0), std::out_of_range);

  // dyadic grids resolve the map exactly: two entries of 1/2 per row
  auto U1024 = build_ulam(dbl, 1024);
  CHECK(U1024.nonzeros() == 2048);
  CHECK(U1024.entry(3, 6) == 0.5);
  CHECK(U1024.entry(3, 7) == 0.5);
  CHECK(U1024.entry(600, (1200) % 1024) == 0.5);
  CHECK(U1024.row_sum_defect() == 0.0);

  // grid-size validation
  CHECK_THROWS_AS(build_ulam(dbl, 1), construction_error);
  CHECK_THROWS_AS(build_ulam(dbl, (1u << 16) + 1), construction_error);
}

TEST_CASE("ulam matrix: continued-fraction map, closed-form oracles") {
  auto gau = builtin_system("gauss");

  // m=2 by hand: row 0 collects branches k>=2 via the digamma telescope,
  // 2(psi(2.5)-psi(2)) and 2(psi(3)-psi(2.5)); row 1 is branch 1 alone,
  // split (2/3, 1/3) by the exact inverse images
  auto U2 = build_ulam(gau, 2);
  CHECK(U2.entry(0, 0) == doctest::Approx(0.56074461109355211).epsilon(1e-14));
  CHECK(U2.entry(0, 1) == doctest::Approx(0.43925538890644789).epsilon(1e-14));
  CHECK(U2.entry(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(U2.entry(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  // weights are exact invariant cell masses, pinned to sum to one
  auto U = build_ulam(gau, 1024);
  CHECK(U.weights()[0] == doctest::Approx(std::log2(1.0 + 1.0 / 1024.0)).epsilon(1e-13));
  double ws = 0.0;
  for (double w : U.weights()) ws += w;
  CHECK(ws == 1.0);
  CHECK(U.row_sum_defect() <= 1e-12);

  // the stationary density of the chain approaches 1/((1+x) log 2)
  auto U4096 = build_ulam(gau, 4096);
  CHECK(U4096.nonzeros() == 524218);
  CHECK(U4096.row_sum_defect() <= 1e-12);
  auto dens = U4096.stationary_density();
  double l1 = 0.0;
  for (std::size_t i = 0; i < 4096; ++i) {
    double x = U4096.midpoint(i);
    l1 += std::fabs(dens[i] - 1.0 / ((1.0 + x) * kLn2)) / 4096.0;
  }
  CHECK(l1 <= 0.01);    // required accuracy
  CHECK(l1 <= 1e-3);    // achieved accuracy has two orders of margin
}

TEST_CASE("ulam matrix: dense dump round-trips") {
  auto dbl = builtin_system("doubling");
  auto U = build_ulam(dbl, 8);
  const char* path = "ulam_dump_test.bin";
  U.dump_dense(path);

  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::uint64_t m = 0;
  in.read(reinterpret_cast<char*>(&m), sizeof m);
  CHECK(m == 8);
  std::array<double, 64> a{};
  in.read(reinterpret_cast<char*>(a.data()), sizeof a);
  CHECK(static_cast<bool>(in));
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      double want = (j == (2 * i) % 8 || j == (2 * i + 1) % 8) ? 0.5 : 0.0;
      CHECK(a[8 * i + j] == want);
    }
  std::remove(path);

  auto big = build_ulam(dbl, 4096);
  CHECK_THROWS_AS(big.dump_dense("never_written.bin"), construction_error);
}

TEST_CASE("perturbed step: phases factor the ulam action") {
  auto dbl = builtin_system("doubling");
  auto U = build_ulam(dbl, 2);
  auto unit = Observable::constant(1.0, dbl);

  // t = 0 is the plain matrix, and constants are exact fixed points
  std::vector<cplx> f{cplx(0.3, -0.1), cplx(-0.7, 0.2)}, plain;
  U.apply(f, plain);
  auto same = perturbed_apply(U, 0.0, unit, f);
  CHECK(same[0] == plain[0]);
  CHECK(same[1] == plain[1]);
  std::vector<cplx> ones{cplx(1, 0), cplx(1, 0)}, out;
  U.apply(ones, out);
  CHECK(out[0] == cplx(1.0, 0.0));
  CHECK(out[1] == cplx(1.0, 0.0));

  // v identically 1 at t = pi multiplies the plain action by exp(i pi) = -1
  constexpr double kPi = 3.141592653589793;
  auto flipped = perturbed_apply(U, kPi, unit, f);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(flipped[i] + plain[i]) <= 1e-15);

  CHECK_THROWS_AS(perturbed_apply(U, 0.0, unit, std::vector<cplx>(3)), std::invalid_argument);

  // the invariant density is fixed by the transpose action at t = 0
  std::vector<cplx> w{cplx(0.5, 0), cplx(0.5, 0)}, wout;
  U.apply_transpose(w, wout);
  CHECK(wout[0] == cplx(0.5, 0.0));
  CHECK(wout[1] == cplx(0.5, 0.0));
}

TEST_CASE("leading eigendata: unperturbed limit and symmetry") {
  auto gau = builtin_system("gauss");
  auto obs = Observable::power_tail(1.5, gau, true);
  auto U = build_ulam(gau, 1024);

  // t = 0: eigenvalue exactly one, eigenvector exactly constant, and the left
  // vector within refinement error of the invariant weights
  auto e0 = leading_eig(U, 0.0, obs);
  CHECK(e0.lambda == cplx(1.0, 0.0));
  CHECK(e0.residual == 0.0);
  CHECK(e0.gap > 0.5);
  for (std::size_t i : {0u, 511u, 1023u}) CHECK(e0.zeta[i] == cplx(1.0, 0.0));
  CHECK(l1_weights(e0.left, U.weights()) <= 1e-3);

  // second eigenvalue of the unperturbed operator: the known value is
  // 0.3036630029..., and the m=256 grid resolves it to about 5e-4
  auto e256 = leading_eig(build_ulam(gau, 256), 0.0, obs);
  CHECK(1.0 - e256.gap == doctest::Approx(0.3036630029).epsilon(0.008));
  CHECK(1.0 - e256.gap == doctest::Approx(0.303152893).epsilon(1e-6));  // pinned

  // perturbed values, pinned against the m=1024 computation
  auto e1 = leading_eig(U, 0.01, obs);
  CHECK(e1.lambda.real() == doctest::Approx(0.997288816698).epsilon(1e-9));
  CHECK(e1.lambda.imag() == doctest::Approx(-0.003492011607).epsilon(1e-9));
  CHECK(e1.residual <= 1e-8);
  CHECK(std::abs(e1.lambda) <= 1.0 + 1e-10);
  double wz = 0.0;  // zeta keeps weighted-sum normalization
  cplx acc(0, 0);
  for (std::size_t i = 0; i < U.size(); ++i) acc += U.weights()[i] * e1.zeta[i];
  wz = std::abs(acc - cplx(1.0, 0.0));
  CHECK(wz <= 1e-12);

  // aggregate positivity of Re(1 - lambda) at small t
  for (double t : {0.001, 0.01, 0.05}) {
    auto e = leading_eig(U, t, obs);
    CHECK(e.lambda.real() < 1.0);
    CHECK(e.gap > 0.0);
    CHECK(e.residual <= 1e-8);
  }

  // real-operator symmetry: lambda(-t) is the conjugate of lambda(t)
  auto ep = leading_eig(U, 0.05, obs);
  auto en = leading_eig(U, -0.05, obs);
  CHECK(std::abs(en.lambda - std::conj(ep.lambda)) <= 1e-14);
  CHECK(ep.lambda.real() == doctest::Approx(0.977757840073).epsilon(1e-9));
}

TEST_CASE("leading eigendata: refinement is cauchy in the grid") {
  auto gau = builtin_system("gauss");
  auto obs = Observable::power_tail(1.5, gau, true);
  auto dbl = builtin_system("doubling");
  auto od = Observable::power_tail(0.75, dbl, false);

  // the m -> 2m difference must not exceed ten times the 2m -> 4m difference
  for (double t : {0.01, 0.05, 0.3}) {
    cplx l1 = leading_eig(build_ulam(gau, 1024), t, obs).lambda;
    cplx l2 = leading_eig(build_ulam(gau, 2048), t, obs).lambda;
    cplx l4 = leading_eig(build_ulam(gau, 4096), t, obs).lambda;
    CHECK(std::abs(l1 - l2) < 10.0 * std::abs(l2 - l4));
  }
  cplx d1 = leading_eig(build_ulam(dbl, 1024), 0.05, od).lambda;
  cplx d2 = leading_eig(build_ulam(dbl, 2048), 0.05, od).lambda;
  cplx d4 = leading_eig(build_ulam(dbl, 4096), 0.05, od).lambda;
  CHECK(std::abs(d1 - d2) < 10.0 * std::abs(d2 - d4));
}

TEST_CASE("eigenvalue scaling recovers the tail index") {
  auto gau = builtin_system("gauss");
  auto dbl = builtin_system("doubling");
  auto og = Observable::power_tail(1.5, gau, true);
  auto od = Observable::power_tail(0.75, dbl, false);
  auto grid = geomgrid(1e-3, 1e-1, 13);

  auto fg = scaling_exponent_fit(build_ulam(gau, 4096), og, grid);
  CHECK(fg.alpha_hat == doctest::Approx(1.5).epsilon(0.1 / 1.5));     // required band
  CHECK(fg.alpha_hat == doctest::Approx(1.4162).epsilon(0.015));      // pinned value
  CHECK(fg.c_hat > 0.0);
  CHECK_FALSE(fg.quadratic_shape);
  CHECK(fg.t_grid.size() == 13);
  CHECK(fg.one_minus_lambda.size() == 13);

  auto fd = scaling_exponent_fit(build_ulam(dbl, 4096), od, grid);
  CHECK(fd.alpha_hat == doctest::Approx(0.75).epsilon(0.1 / 0.75));   // required band
  CHECK(fd.alpha_hat == doctest::Approx(0.6898).epsilon(0.015));      // pinned value

  // a bounded smooth observable has an analytic eigenvalue: exponent two,
  // flagged as outside the heavy-tail hypothesis
  auto fb = scaling_exponent_fit(build_ulam(gau, 1024), Observable::bounded(gau), grid);
  CHECK(fb.alpha_hat == doctest::Approx(2.0).epsilon(0.03));
  CHECK(fb.quadratic_shape);

  // grid validation: at least four nodes spanning two decades, ascending
  auto U = build_ulam(gau, 64);
  CHECK_THROWS_AS(scaling_exponent_fit(U, og, {1e-3, 1e-2, 1e-1}), std::invalid_argument);
  CHECK_THROWS_AS(scaling_exponent_fit(U, og, geomgrid(1e-3, 1e-2, 8)), std::invalid_argument);
  CHECK_THROWS_AS(scaling_exponent_fit(U, og, geomgrid(1e-1, 1e-3, 8)), std::invalid_argument);
  CHECK_THROWS_AS(scaling_exponent_fit(U, Observable::constant(1.0, gau), geomgrid(1e-3, 1e-1, 8)),
                  construction_error);
}

TEST_CASE("n-step characteristic function: identities and orbit oracle") {
  auto gau = builtin_system("gauss");
  auto obs = Observable::power_tail(1.5, gau, true);
  auto U = build_ulam(gau, 4096);

  // t = 0 and n = 0 are exactly one
  CHECK(charfn_vn(U, obs, 0.0, 0) == cplx(1.0, 0.0));
  CHECK(charfn_vn(U, obs, 0.0, 1) == cplx(1.0, 0.0));
  CHECK(charfn_vn(U, obs, 0.0, 1000) == cplx(1.0, 0.0));
  CHECK(charfn_vn(U, obs, 0.7, 0) == cplx(1.0, 0.0));

  // fifty-step characteristic function against a million stationary orbits
  cplx disc = charfn_vn(U, obs, 0.05, 50);
  Rng rng(17, 1);
  cplx mc(0, 0);
  const int M = 1000000;
  for (int k = 0; k < M; ++k) mc += std::exp(cplx(0.0, 0.05 * sample_vn(gau, obs, 50, rng)));
  mc /= static_cast<double>(M);
  CHECK(std::abs(disc - mc) <= 4.0 / std::sqrt(static_cast<double>(M)));

  // the doubling chain, where consecutive spike visits cluster, pinned
  auto dbl = builtin_system("doubling");
  auto od = Observable::power_tail(0.75, dbl, false);
  cplx dd = charfn_vn(build_ulam(dbl, 2048), od, 0.05, 20);
  CHECK(dd.real() == doctest::Approx(-0.129400099915).epsilon(1e-8));
  CHECK(dd.imag() == doctest::Approx(-0.069714252448).epsilon(1e-8));
}

TEST_CASE("characteristic function grid agrees with monte carlo") {
  auto gau = builtin_system("gauss");
  auto obs = Observable::power_tail(1.5, gau, true);
  auto U = build_ulam(gau, 4096);

  // one orbit batch, partial sums recorded at the three n marks
  const int M = 200000;
  std::vector<std::array<double, 3>> sums(M);
  Rng rng(23, 1);
  for (int k = 0; k < M; ++k) {
    double s = 0.0;
    double x = sample_invariant(gau, rng);
    int mark = 0;
    for (int j = 1; j <= 20; ++j) {
      s += obs(x);
      double y = 1.0 / x;
      x = y - std::floor(y);
      if (j == 1 || j == 5 || j == 20) sums[k][mark++] = s;
    }
  }
  double tol = 4.0 / std::sqrt(static_cast<double>(M));
  for (double t : {0.02, 0.05, 0.1, 0.4, 1.0}) {
    int mark = 0;
    for (std::uint64_t n : {1ull, 5ull, 20ull}) {
      cplx mc(0, 0);
      for (const auto& rec : sums) mc += std::exp(cplx(0.0, t * rec[mark]));
      mc /= static_cast<double>(M);
      ++mark;
      CHECK(std::abs(charfn_vn(U, obs, t, n) - mc) <= tol);
    }
  }
}

TEST_CASE("marginal characteristic function by quadrature") {
  auto gau = builtin_system("gauss");
  auto dbl = builtin_system("doubling");
  auto og = Observable::power_tail(1.5, gau, true);
  auto od = Observable::power_tail(0.75, dbl, false);

  CHECK(charfn_mu(gau, og, 0.0) == cplx(1.0, 0.0));

  // pinned quadrature values, cross-checked against invariant-law sampling
  cplx p = charfn_mu(gau, og, 0.01);
  CHECK(p.real() == doctest::Approx(0.99720570).epsilon(1e-7));
  CHECK(p.imag() == doctest::Approx(-0.00350748).epsilon(1e-5));
  Rng rng(29, 3);
  cplx mc(0, 0);
  const int M = 400000;
  for (int k = 0; k < M; ++k)
    mc += std::exp(cplx(0.0, 0.05 * od(sample_invariant(dbl, rng))));
  mc /= static_cast<double>(M);
  CHECK(std::abs(charfn_mu(dbl, od, 0.05) - mc) <= 4.0 / std::sqrt(static_cast<double>(M)));

  // conjugate symmetry and constant observables
  CHECK(std::abs(charfn_mu(gau, og, -0.3) - std::conj(charfn_mu(gau, og, 0.3))) <= 1e-14);
  auto c2 = Observable::constant(2.0, gau);
  CHECK(std::abs(charfn_mu(gau, c2, 0.7) - std::exp(cplx(0.0, 1.4))) <= 1e-15);

  // bounded observable: smooth quadrature path, pinned
  auto ob = Observable::bounded(gau);
  cplx b = charfn_mu(gau, ob, 2.0);
  CHECK(b.real() == doctest::Approx(0.220389).epsilon(1e-5));
  CHECK(b.imag() == doctest::Approx(0.016175).epsilon(1e-4));

  // modulus decays under the fitted stretched-exponential envelope over the
  // whole admissible window (three times epsilon), for both observables
  for (double t : geomgrid(1e-3, 1.5, 9)) {
    double c = -std::log(std::abs(charfn_mu(gau, og, t))) / std::pow(t, 1.5);
    CHECK(c > 0.35);
  }
  for (double t : geomgrid(1e-3, 0.1875, 7)) {
    double c = -std::log(std::abs(charfn_mu(dbl, od, t))) / std::pow(t, 0.75);
    CHECK(c > 1.0);
  }
}

TEST_CASE("eigenvalue-vs-marginal table") {
  auto gau = builtin_system("gauss");
  auto og = Observable::power_tail(1.5, gau, true);

  // t = 0 is exact, and the quadratic envelope holds with a constant near one
  auto U = build_ulam(gau, 2048);
  auto tv = V_diagnostic(U, og, {0.0, 0.001, 0.01, 0.031623, 0.1});
  CHECK(tv.rows[0].value == 0.0);
  CHECK(tv.rows[0].n == 0);
  CHECK(tv.quantity == "V");
  CHECK(tv.max_ratio < 5.0);
  CHECK(tv.rows[2].ratio == doctest::Approx(0.843252).epsilon(0.02));
  CHECK(tv.rows[4].ratio == doctest::Approx(0.444733).epsilon(0.02));

  // the resolved part of the table is stable under grid doubling
  auto tv4 = V_diagnostic(build_ulam(gau, 4096), og, {0.01, 0.031623, 0.1});
  CHECK(tv4.rows[0].ratio == doctest::Approx(0.843252).epsilon(0.01));
  CHECK(tv4.rows[1].ratio == doctest::Approx(0.663210).epsilon(0.01));
  CHECK(tv4.rows[2].ratio == doctest::Approx(0.444733).epsilon(0.01));

  // doubling with the spike at the fixed point: consecutive large values
  // cluster, the eigenvalue and marginal coefficients differ at leading
  // order, and the fitted envelope constant is large; the table is still
  // finite and stable under grid doubling, which is what it claims to check
  auto dbl = builtin_system("doubling");
  auto od = Observable::power_tail(0.75, dbl, false);
  auto dv2 = V_diagnostic(build_ulam(dbl, 2048), od, {0.001, 0.01, 0.1});
  auto dv4 = V_diagnostic(build_ulam(dbl, 4096), od, {0.001, 0.01, 0.1});
  CHECK(dv2.rows[0].ratio == doctest::Approx(158.5).epsilon(0.10));
  CHECK(dv2.max_ratio < 250.0);
  for (int i = 0; i < 3; ++i)
    CHECK(dv4.rows[i].ratio == doctest::Approx(dv2.rows[i].ratio).epsilon(0.05));

  CHECK_THROWS_AS(V_diagnostic(U, Observable::bounded(gau), {0.01}), construction_error);
  CHECK_THROWS_AS(V_diagnostic(U, og, {}), std::invalid_argument);
}

TEST_CASE("memory-term table against its envelopes") {
  auto gau = builtin_system("gauss");
  auto og = Observable::power_tail(1.5, gau, true);
  auto U2 = build_ulam(gau, 2048);
  auto U4 = build_ulam(gau, 4096);

  // both identities: exact zero at t = 0 for every n, exact zero at n = 1
  auto tu = U_diagnostic(U2, og, {0.0, 0.001, 0.01, 0.1}, {1, 10, 100, 1000}, 0.0);
  CHECK(tu.quantity == "U");
  for (int k = 0; k < 4; ++k) CHECK(tu.rows[k].value == 0.0);   // t = 0 rows
  for (int k = 0; k < 16; k += 4) CHECK(tu.rows[k].value == 0.0);  // n = 1 rows

  // envelope ratio bounded and stable within 20% under grid doubling
  auto g2 = U_diagnostic(U2, og, {0.001, 0.01, 0.1}, {10, 100, 1000}, 0.0);
  auto g4 = U_diagnostic(U4, og, {0.001, 0.01, 0.1}, {10, 100, 1000}, 0.0);
  CHECK(g2.max_ratio < 10.0);
  CHECK(g4.max_ratio < 10.0);
  CHECK(std::fabs(g4.max_ratio - g2.max_ratio) <= 0.2 * g2.max_ratio);
  CHECK(g2.max_ratio == doctest::Approx(4.6714).epsilon(0.02));

  // doubling inside the perturbative regime n t^{2 alpha} <= 1: bounded with
  // a large fitted constant (clustered spike), stable under grid doubling
  auto dbl = builtin_system("doubling");
  auto od = Observable::power_tail(0.75, dbl, false);
  auto d2 = U_diagnostic(build_ulam(dbl, 2048), od, {0.001, 0.01, 0.03}, {1, 10, 100}, 0.0);
  auto d4 = U_diagnostic(build_ulam(dbl, 4096), od, {0.001, 0.01, 0.03}, {1, 10, 100}, 0.0);
  CHECK(d2.max_ratio < 100.0);
  CHECK(std::fabs(d4.max_ratio - d2.max_ratio) <= 0.1 * d2.max_ratio);

  // csv layout: header plus one line per row, n = 1 values printed as zero
  auto small = U_diagnostic(build_ulam(gau, 256), og, {0.001}, {1, 10}, 0.0);
  auto csv = small.csv();
  CHECK(csv.rfind("t,n,U,envelope,ratio,m,residual\n", 0) == 0);
  CHECK(csv.find("0.001,1,0,") != std::string::npos);
  CHECK(csv.find(",256,") != std::string::npos);

  // parameter validation
  CHECK_THROWS_AS(U_diagnostic(U2, og, {0.01}, {10, 5}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(U_diagnostic(U2, og, {0.01}, {0, 5}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(U_diagnostic(U2, og, {0.01}, {1, 5}, 1.7), std::invalid_argument);
  CHECK_THROWS_AS(U_diagnostic(U2, Observable::constant(1.0, gau), {0.01}, {1}, 0.0),
                  construction_error);
}

TEST_CASE("remainder decay after peeling the leading eigenpair") {
  auto gau = builtin_system("gauss");
  auto og = Observable::power_tail(1.5, gau, true);

  // at t = 0 the remainder annihilates constants outright
  auto q0 = q_decay(build_ulam(gau, 512), og, 0.0, 6);
  for (double v : q0.norms) CHECK(v <= 1e-10);
  CHECK(q0.rate == 0.0);

  // doubling m=2: the complement of the leading eigenspace is the zero matrix
  auto dbl = builtin_system("doubling");
  auto qd = q_decay(build_ulam(dbl, 2), Observable::constant(0.0, dbl), 0.0, 4);
  for (double v : qd.norms) CHECK(v == 0.0);
  CHECK(qd.rate == 0.0);

  // perturbed: geometric decay at the deflated-eigenvalue rate
  auto U = build_ulam(gau, 2048);
  auto q = q_decay(U, og, 0.05, 14);
  auto e = leading_eig(U, 0.05, og);
  CHECK(q.rate < 1.0);
  CHECK(std::fabs(q.rate - (1.0 - e.gap)) <= 0.05);
  CHECK(std::fabs(q.rate - (1.0 - e.gap)) <= 0.01);  // achieved accuracy
  for (std::size_t k = 2; k < q.norms.size(); ++k) CHECK(q.norms[k] < q.norms[k - 1]);

  CHECK_THROWS_AS(q_decay(U, og, 0.05, 1), std::invalid_argument);
}

TEST_CASE("projected-mass derivative vanishes only when centered") {
  auto gau = builtin_system("gauss");
  auto U = build_ulam(gau, 2048);

  // a flat observable is even in t: the central difference is exactly zero
  auto flat = Observable::constant(0.0, gau);
  auto rz = p_prime_zero_check(U, flat, 1e-3);
  CHECK(rz.magnitude == 0.0);
  CHECK(rz.precondition_met);

  // centered spike: magnitude shrinks under step refinement like h^{1/2}
  auto oc = Observable::power_tail(1.5, gau, true);
  auto r3 = p_prime_zero_check(U, oc, 1e-3);
  auto r4 = p_prime_zero_check(U, oc, 1e-4);
  CHECK(r3.precondition_met);
  CHECK(r4.magnitude < r3.magnitude);
  CHECK(r3.magnitude == doctest::Approx(0.116735).epsilon(0.02));
  CHECK(r4.magnitude == doctest::Approx(0.0389811).epsilon(0.02));

  // uncentered negative control: the derivative tends to the observable mean
  // instead of vanishing, and the precondition flag reports the breach
  auto ou = Observable::power_tail(1.5, gau, false);
  auto u3 = p_prime_zero_check(U, ou, 1e-3);
  auto u4 = p_prime_zero_check(U, ou, 1e-4);
  CHECK_FALSE(u3.precondition_met);
  CHECK(u3.magnitude == doctest::Approx(ou.mean_mu()).epsilon(0.05));
  CHECK(u4.magnitude > u3.magnitude);  // refinement does not help

  CHECK_THROWS_AS(p_prime_zero_check(U, oc, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(p_prime_zero_check(U, oc, 0.5), std::invalid_argument);
}

TEST_CASE("admissible frequency window") {
  auto gau = builtin_system("gauss");
  auto dbl = builtin_system("doubling");
  auto og = Observable::power_tail(1.5, gau, true);
  auto od = Observable::power_tail(0.75, dbl, false);
  auto Ug = build_ulam(gau, 1024);
  auto Ud = build_ulam(dbl, 1024);

  // the continued-fraction spectrum keeps a wide gap: the cap comes back
  double eg = select_epsilon(Ug, og, 0.5);
  CHECK(eg == 0.5);
  // the doubling window is narrower; pinned at this grid
  double ed = select_epsilon(Ud, od, 0.5);
  CHECK(ed == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(select_epsilon(Ud, od, 0.03) == doctest::Approx(0.03).epsilon(1e-12));

  // consistency: the gap stays open across the whole reported window
  for (int k = 1; k <= 6; ++k) {
    auto e = leading_eig(Ug, 3.0 * eg * k / 6.0, og);
    CHECK(e.gap > 0.0);
    auto f = leading_eig(Ud, 3.0 * ed * k / 6.0, od);
    CHECK(f.gap > 0.0);
  }

  CHECK_THROWS_AS(select_epsilon(Ug, og, 0.0), std::invalid_argument);
}
