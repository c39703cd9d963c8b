#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ldlab {

// Tail index exactly 1 is outside the supported family (the norming sequence
// b_n would need a truncated-mean form that the lab deliberately excludes).
class alpha_one_error : public std::domain_error {
 public:
  alpha_one_error() : std::domain_error("tail index alpha = 1 is not supported") {}
};

// A model or plan could not be built from the given parameters (mass budget
// negative, centering infeasible, non-monotone tail, ...).
class construction_error : public std::invalid_argument {
 public:
  explicit construction_error(const std::string& what) : std::invalid_argument(what) {}
};

// A Monte Carlo request whose expected hit count is too small to report.
class insufficient_samples_error : public std::runtime_error {
 public:
  insufficient_samples_error(double expected_hits, std::uint64_t required_samples)
      : std::runtime_error("expected tail hits " + std::to_string(expected_hits) +
                           " < 100; need at least " + std::to_string(required_samples) +
                           " samples"),
        expected_hits(expected_hits),
        required_samples(required_samples) {}
  double expected_hits;
  std::uint64_t required_samples;
};

// An orbit ran into a partition endpoint / division blow-up within the
// requested number of steps, so the deterministic sum is not defined.
class orbit_degenerate_error : public std::runtime_error {
 public:
  orbit_degenerate_error(double x, std::uint64_t step)
      : std::runtime_error("orbit degenerate at step " + std::to_string(step) +
                           " (x = " + std::to_string(x) + ")"),
        x(x),
        step(step) {}
  double x;
  std::uint64_t step;
};

// Eigen-solve failed: no spectral gap, or the power iteration did not
// converge inside its budget.
class spectral_degeneracy_error : public std::runtime_error {
 public:
  explicit spectral_degeneracy_error(const std::string& what) : std::runtime_error(what) {}
};

// An observable/system pair whose exact tail does not look regularly varying
// (flat, degenerate, or fit residuals far beyond tolerance).
class model_mismatch_error : public std::runtime_error {
 public:
  explicit model_mismatch_error(const std::string& what) : std::runtime_error(what) {}
};

// A regression/fit was requested on data with no usable spread.
class fit_degenerate_error : public std::runtime_error {
 public:
  explicit fit_degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

// Config-file or CLI-level problems.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ldlab
