#pragma once

#include <functional>

#include "ldlab/charfn.hpp"
#include "ldlab/quad.hpp"

namespace ldlab {

// Truncated Fourier inversion of a window probability from a characteristic
// function:
//   P(N < Z <= N + g) = lim_{T->inf} (1/pi) Re int_0^T window(t) Psi(t) dt.
// value is the integral at T; sensitivity = |I(T) - I(T/2)| measures the
// truncation, and decaying reports whether that difference shrank from the
// previous octave |I(T/2) - I(T/4)| (if it did not, T is too small or the law
// has atoms). err_bound covers quadrature and tabulation, not truncation.
struct InversionResult {
  double value = 0.0;
  double sensitivity = 0.0;
  bool decaying = false;
  double err_bound = 0.0;
};

// Psi is tabulated internally on a grid graded toward the |t|^alpha cusp at
// 0, then the window integral is accumulated with panel quadrature tuned to
// the oscillation rate |N| + g. Only t in [0, T] is evaluated.
InversionResult inversion_tail(const std::function<cplx(double)>& Psi, double N, double g,
                               double T);

// same, reading Psi from an existing table covering [0, T]
InversionResult inversion_tail(const CharFnTable& table, double N, double g, double T);

}  // namespace ldlab
