#include "ldlab/inversion.hpp"

#include <cmath>
#include <stdexcept>

namespace ldlab {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

InversionResult invert_core(const std::function<cplx(double)>& eval, double N, double g, double T,
                            double tab_err) {
  if (!(g > 0.0) || !(T > 0.0))
    throw std::invalid_argument("inversion_tail: need g > 0 and T > 0");
  auto f = [&](double t) { return fourier_window(t, N, g) * eval(t); };
  double omega = std::abs(N) + g;
  const double edge[4] = {0.0, 0.25 * T, 0.5 * T, T};
  cplx acc(0.0, 0.0);
  double cum[3];
  double qerr = 0.0;
  for (int s = 0; s < 3; ++s) {
    double e = 0.0;
    acc += integrate_oscillatory<cplx>(f, edge[s], edge[s + 1], omega, &e);
    qerr += e;
    cum[s] = acc.real() / kPi;
  }
  InversionResult r;
  r.value = cum[2];
  r.sensitivity = std::abs(cum[2] - cum[1]);
  r.decaying = r.sensitivity <= std::abs(cum[1] - cum[0]) * 1.000001 + 1e-15;
  // |window| <= min(g, 2/t), so tabulation error enters with weight
  // int_0^T min(g, 2/t) dt
  double w = T * g <= 2.0 ? T * g : 2.0 + 2.0 * std::log(0.5 * T * g);
  r.err_bound = qerr / kPi + w * tab_err / kPi;
  return r;
}

}  // namespace

InversionResult inversion_tail(const std::function<cplx(double)>& Psi, double N, double g,
                               double T) {
  // tabulate first: the panel quadrature samples Psi about 15 T (|N| + g) / pi
  // times, far more often than the table costs to build
  double worst = 0.0;
  ComplexTable tab =
      auto_refine_table([&](double t) { return Psi(t); }, graded_grid(T, 1537), 1e-9,
                        (std::size_t{1} << 17) + 1, &worst);
  return invert_core([&tab](double t) { return tab.eval(t); }, N, g, T, worst);
}

InversionResult inversion_tail(const CharFnTable& table, double N, double g, double T) {
  if (table.t_max() < T)
    throw std::invalid_argument("inversion_tail: table does not cover [0, T]");
  return invert_core([&table](double t) { return table.value(t); }, N, g, T,
                     table.max_node_error() + table.interp_residual());
}

}  // namespace ldlab
