#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldlab/rng.hpp"
#include "ldlab/stable.hpp"
#include "ldlab/stats.hpp"

namespace ldlab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

// A piecewise uniformly expanding map of (0,1) with an (at most countable)
// Markov partition, full closed forms for the branches and their inverses,
// and an explicit invariant density with closed-form CDF. Cells are labelled
// by their natural symbol: the binary digit 0/1 for the doubling map, the
// continued-fraction digit 1,2,3,... for the Gauss map. Countable partitions
// are never materialized; diagnostics walk the leading cells and account for
// the rest through remainder_mass. Instances are immutable and cheap to copy.
class IntervalSystem {
 public:
  enum class Kind { doubling, gauss };

  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }
  bool finite_partition() const { return kind_ == Kind::doubling; }
  // parameter of the separation metric d_theta(y,y') = theta^{s(y,y')}
  double theta() const { return 0.5; }

  // cell ids to examine, in order: {0,1} for doubling, {1..j_max} for gauss
  std::vector<std::size_t> leading_cells(std::size_t j_max) const;
  Interval cell(std::size_t id) const;
  double cell_mass(std::size_t id) const;
  // invariant mass of everything beyond the first j_max cells (0 if finite)
  double remainder_mass(std::size_t j_max) const;

  // true when x lies outside (0,1) or on a partition endpoint, so the orbit
  // through x is not defined (the branch label is ambiguous there)
  bool degenerate_point(double x) const;
  std::size_t cell_index(double x) const;  // throws orbit_degenerate_error
  double forward(double x) const;          // T(x)
  double derivative(double x) const;       // T'(x), signed
  double branch_inverse(std::size_t id, double y) const;  // (T|_cell)^{-1}(y)
  Interval branch_image(std::size_t id) const;

  double density(double x) const;   // invariant density h (finite at 0 and 1)
  double cdf(double x) const;       // H(x) = mu((0,x])
  double quantile(double u) const;  // H^{-1}(u)

 private:
  friend IntervalSystem builtin_system(const std::string& name);
  IntervalSystem(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
};

// The two built-in systems: "doubling" (T(x) = 2x mod 1, Lebesgue invariant)
// and "gauss" (T(x) = 1/x mod 1, density 1/((1+x) log 2)). Unknown names
// throw construction_error.
IntervalSystem builtin_system(const std::string& name);

// One exact draw from the invariant measure (inverse CDF).
double sample_invariant(const IntervalSystem& sys, Rng& rng);

// An observable on (0,1) bound to the system whose invariant measure induces
// its tail. Two closed forms: the power spike v(x) = x^{-1/alpha} - c, whose
// mu-tail is regularly varying of index alpha, and a constant. The centering
// c is 0 when `centered` is false; otherwise it is the mu-mean of x^{-1/alpha},
// computed once by tanh-sinh quadrature against the density and stored, so
// that int v dmu = 0. Centering requires alpha > 1.
enum class ObservableForm { power, constant, bounded };

class Observable {
 public:
  static Observable power_tail(double alpha, const IntervalSystem& sys, bool centered);
  static Observable constant(double value, const IntervalSystem& sys);
  // cos(2 pi x) minus its mu-mean: a bounded smooth centered control with no
  // heavy tail (negative control for the scaling-exponent diagnostics)
  static Observable bounded(const IntervalSystem& sys);

  ObservableForm form() const { return form_; }
  bool is_constant() const { return form_ == ObservableForm::constant; }
  double alpha() const;      // tail index; throws for the constant observable
  double centering() const { return c_; }
  double operator()(double x) const;
  // exact mu-mean of v; throws domain_error when alpha < 1 (infinite mean)
  double mean_mu() const;
  // exact mu(v > N) through the invariant CDF
  double tail_mu(double N) const;
  // lim N^alpha mu(v > N); equals the density of mu at 0+
  double tail_constant() const;
  // norming a_n solving a^alpha = n * tail_constant, so that the normalized
  // ergodic sums converge to limit_law()
  double norming_a(std::uint64_t n) const;
  // one-sided alpha-stable limit of v_n / a_n (v is bounded below: q = 0)
  StableLaw limit_law() const;

  // sup |v'| over a cell (the local Lipschitz constant in the flat metric)
  double lipschitz_on(std::size_t cell_id) const;
  // inf of |v| over a cell; 0 when v changes sign inside it
  double inf_abs_on(std::size_t cell_id) const;

  const IntervalSystem& system() const { return sys_; }

 private:
  Observable(const IntervalSystem& sys, ObservableForm form, double alpha, double c, double value)
      : sys_(sys), form_(form), alpha_(alpha), c_(c), value_(value) {}

  IntervalSystem sys_;
  ObservableForm form_;
  double alpha_;  // NaN unless the power form
  double c_;      // centering constant (0 unless centered)
  double value_;  // constant variant only
};

// Birkhoff sum sum_{j<n} v(T^j x0) with compensated accumulation. The orbit
// is iterated in double precision; if any iterate lands on a partition
// endpoint or leaves (0,1) before step n, orbit_degenerate_error is thrown
// (for the doubling map this includes every dyadic x0, whose orbit reaches 0).
double ergodic_sum(const IntervalSystem& sys, const Observable& obs, double x0, std::uint64_t n);

// One draw of v_n = sum_{j<n} v(T^j x) from a stationary start x ~ mu.
// The doubling map is iterated on an exact random bit stream (the shift map
// on 64-bit windows), so orbits of any length stay faithful; the Gauss map
// is iterated in double precision from x = 2^U - 1 and redraws on the
// measure-zero degenerate starts. Roundoff along Gauss orbits is amplified
// by the expansion; the stationary statistics are unaffected, but individual
// long orbits are pseudo-orbits (shadowing caveat).
double sample_vn(const IntervalSystem& sys, const Observable& obs, std::uint64_t n, Rng& rng);

// mu(v_n - b_n > N) by direct orbit sampling, where b_n = n E(v) when
// alpha > 1 and 0 otherwise. Sharded exactly like mc_tail_Sn: `shards`
// sequential streams Rng(seed, shard+1), integer-count merge, Wilson 99%
// interval, N <= -8.9e307 sentinel short-circuits to probability 1, and the
// a-priori gate requires samples * n * mu(v > N) >= 100 expected hits.
Estimate mc_tail_vn(const IntervalSystem& sys, const Observable& obs, std::uint64_t n, double N,
                    std::uint64_t samples, std::uint64_t seed, unsigned shards = 32);

// Fit of the exact tail mu(v > N) to const * N^{-alpha} on a log-log grid.
struct H1Report {
  double alpha_fit = 0.0;
  double const_fit = 0.0;
  LinearFit fit;              // log tail = intercept + slope * log N
  std::vector<double> grid;   // thresholds
  std::vector<double> tail;   // exact mu(v > N) on the grid
};

// Requires a grid spanning at least two decades. Throws model_mismatch_error
// when the tail is degenerate on the grid (0, or not yet a tail) or when the
// log-log fit leaves residuals beyond 0.1 — a genuine power tail two decades
// deep sits well inside that.
H1Report check_H1(const IntervalSystem& sys, const Observable& obs,
                  const std::vector<double>& N_grid);

// Per-branch certificate data for the expanding-map axioms: image measure,
// distortion of log g for g = dmu/(dmu o T) over sampled pairs in the cell
// (ratio to the separation metric d_theta), the expansion infimum, and —
// when an observable is supplied — the ratio of its sampled d_theta-Lipschitz
// seminorm on the cell to inf |v| on the cell.
struct BranchDiagnostic {
  std::size_t id = 0;
  double image_measure = 0.0;
  double distortion_C = 0.0;
  double expansion_inf = 0.0;
  double lip_ratio = 0.0;  // NaN when no observable was supplied
};

struct GibbsMarkovReport {
  std::vector<BranchDiagnostic> branches;
  double min_image_measure = 0.0;
  double max_distortion_C = 0.0;
  double min_expansion = 0.0;
  double remainder_mass = 0.0;
  double lip_ratio_sup = 0.0;  // NaN when no observable was supplied
};

GibbsMarkovReport gibbs_markov_diagnostics(const IntervalSystem& sys, std::size_t j_max,
                                           std::size_t pair_samples, std::uint64_t seed,
                                           const Observable* obs = nullptr);

}  // namespace ldlab
