#pragma once

#include <cstdint>
#include <vector>

#include "ldlab/quad.hpp"
#include "ldlab/rng.hpp"
#include "ldlab/tail_model.hpp"

namespace ldlab {

// Psi(t) = E exp(itX). The interior piece is in closed form; the tail pieces
// rotate the contour into the upper half plane, where the continuation of the
// tail density turns the oscillation into exp(-t s) decay. Factors without a
// complex continuation fall back to oscillatory quadrature on the real line
// with an integration-by-parts remainder bound. The error bound is written to
// abs_err; on the analytic path the function throws if it cannot certify
// 1e-10 absolute accuracy.
cplx charfn_Psi(const TailModel& model, double t, double* abs_err = nullptr);

// Characteristic function tabulated on [-t_max, t_max] with a per-node error
// bound. Constructed from the nonnegative half grid and mirrored, so
// conjugate symmetry is exact; value 1 at t = 0 and |value| <= 1 (up to the
// node bound) are validated. Interpolation between nodes is local cubic; its
// accuracy is the builder's concern, the node bounds apply at nodes.
class CharFnTable {
 public:
  enum class Provenance { quadrature, monte_carlo };

  CharFnTable(std::vector<double> half_grid, std::vector<cplx> half_values,
              std::vector<double> half_errors, Provenance prov, double interp_residual = 0.0);

  cplx value(double t) const;  // conjugated for t < 0; out_of_range beyond t_max
  double t_max() const { return half_grid_.back(); }
  Provenance provenance() const { return prov_; }
  double max_node_error() const { return max_err_; }
  double interp_residual() const { return interp_residual_; }  // worst between-node defect seen

  const std::vector<double>& half_grid() const { return half_grid_; }
  const std::vector<cplx>& half_values() const { return half_values_; }
  const std::vector<double>& half_errors() const { return half_errors_; }

  // mirrored full views, increasing in t
  std::vector<double> grid() const;
  std::vector<cplx> values() const;

 private:
  std::vector<double> half_grid_;
  std::vector<cplx> half_values_;
  std::vector<double> half_errors_;
  ComplexTable interp_;
  Provenance prov_;
  double max_err_ = 0.0;
  double interp_residual_ = 0.0;
};

// Quadrature table on {0} + a geometric ladder of `nodes - 1` points ending at
// t_max (graded toward 0, where Psi has a |t|^alpha cusp that defeats uniform
// interpolation), then midpoint-refined until the between-node defect drops
// under refine_tol; inversion sweeps integrate the table against weights up
// to ~2/t, so the defect must sit well below the smallest signal of interest.
CharFnTable tabulate_charfn(const TailModel& model, double t_max, std::size_t nodes,
                            double refine_tol = 1e-9);

// Empirical characteristic function of `draws` samples on the same grid; the
// node bound is 2/sqrt(draws) per node (t = 0 is exact).
CharFnTable tabulate_charfn_mc(const TailModel& model, double t_max, std::size_t nodes,
                               std::uint64_t draws, std::uint64_t seed);

}  // namespace ldlab
