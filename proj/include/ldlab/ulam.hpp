#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ldlab/dynamics.hpp"
#include "ldlab/quad.hpp"

namespace ldlab {

// Ulam discretization of the transfer operator on a uniform m-cell grid over
// (0,1). Entries are exact Lebesgue masses of cell-to-cell transitions,
// assembled branch by branch from the closed-form inverse branches; for the
// continued-fraction map the infinitely many branches contained in a single
// grid cell are summed in closed form (digamma telescoping), so no sampling
// and no branch truncation is involved. Rows are normalized by their own mass
// so every row sums to one at floating-point accuracy.
//
// Orientation: apply() computes y = P f with P row-stochastic, i.e. y_i is
// the conditional expectation of f at the image of cell i. Densities evolve
// under the transpose; the stationary vector of the transpose, scaled by m,
// approximates the invariant density. Everything downstream treats this
// finite matrix as a proxy for the operator on the true function space: norms
// and spectra computed here are proxy quantities, not the weighted Lipschitz
// ones.
class UlamOperator {
 public:
  UlamOperator(const IntervalSystem& sys, std::size_t m);

  std::size_t size() const { return m_; }
  const IntervalSystem& system() const { return sys_; }

  double boundary(std::size_t j) const;  // j/m, j in [0, m]
  double midpoint(std::size_t i) const;  // (i + 1/2)/m

  // invariant measure of each grid cell, from the closed-form cdf; sums to 1
  const std::vector<double>& weights() const { return weights_; }

  // y = P f (expectation of f one step forward), and y = P^T f (density push)
  void apply(const std::vector<cplx>& f, std::vector<cplx>& y) const;
  void apply_transpose(const std::vector<cplx>& f, std::vector<cplx>& y) const;

  double entry(std::size_t i, std::size_t j) const;  // dense lookup, O(log nnz_row)
  std::size_t nonzeros() const { return cols_.size(); }
  double row_sum_defect() const;  // max_i |sum_j P_ij - 1|

  // stationary density of the chain (left eigenvector scaled by m); the Ulam
  // approximation to the invariant density, accurate to O(1/m) in L1
  std::vector<double> stationary_density() const;

  // dense row-major dump: uint64 m, then m*m little-endian doubles
  void dump_dense(const std::string& path) const;

 private:
  IntervalSystem sys_;
  std::size_t m_;
  std::vector<std::int64_t> rowptr_;
  std::vector<std::int32_t> cols_;
  std::vector<double> vals_;
  std::vector<double> weights_;

  void build_rows();
  void exact_stochastic(std::size_t lo, std::size_t hi);
};

// named constructor used throughout; same object as the class constructor
UlamOperator build_ulam(const IntervalSystem& sys, std::size_t m);

// cellwise phase multipliers exp(i t v(midpoint)). For power spikes the cell
// adjacent to zero (v unbounded) and every cell where the phase winds more
// than an eighth radian instead carry the exact cell average of exp(i t v)
// under the invariant measure, computed by rotated-contour integrals so the
// oscillatory tails converge absolutely; midpoint phases misrepresent both.
std::vector<cplx> phase_vector(const UlamOperator& U, const Observable& obs, double t);

// one step of the perturbed operator: multiply cellwise by the phase vector,
// then apply the Ulam matrix
std::vector<cplx> perturbed_apply(const UlamOperator& U, double t, const Observable& obs,
                                  const std::vector<cplx>& f);

// E exp(i t v_n) in the discretization: iterate the perturbed operator n
// times on the constant-one vector and integrate against the cell weights
cplx charfn_vn(const UlamOperator& U, const Observable& obs, double t, std::uint64_t n);

// characteristic function of the observable's law under the invariant
// measure, by quadrature on the continuous system (no grid involved): power
// spikes use the rotated-contour tail integral over the whole interval,
// bounded observables plain adaptive quadrature. Exactly 1 at t = 0.
cplx charfn_mu(const IntervalSystem& sys, const Observable& obs, double t);

}  // namespace ldlab
