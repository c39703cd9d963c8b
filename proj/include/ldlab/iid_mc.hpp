#pragma once

#include <cstdint>
#include <string>

#include "ldlab/rng.hpp"
#include "ldlab/stats.hpp"
#include "ldlab/tail_model.hpp"

namespace ldlab {

// one draw of the step distribution
inline double sample_X(const TailModel& model, Rng& rng) { return model.sample(rng); }

// P(S_n - b_n > N) by direct Monte Carlo, where b_n is the exact mean n E(X)
// when alpha > 1 and 0 otherwise. Work is split into `shards` sequential
// streams seeded as Rng(seed, shard + 1) and merged by integer counts, so the
// result is bit-exact for a given (seed, shards) regardless of scheduling.
// When N is beyond the interior, requires the expected hit count
// samples * n * P(X > N) >= 100 and throws insufficient_samples_error
// otherwise. N <= -8.9e307 short-circuits to probability 1 (sweep sentinel
// for "no threshold"). The interval is Wilson at 99%.
Estimate mc_tail_Sn(const TailModel& model, std::uint64_t n, double N, std::uint64_t samples,
                    std::uint64_t seed, unsigned shards = 32);

// One row of the large-deviation comparison: the measured P(S_n - b_n > N)
// against the predicted leading order, which is n P(X > N) plus, only at
// alpha = 2, the Gaussian bulk term Phi_bar(N / B_n) with B_n the bulk scale.
struct LdReport {
  double alpha = 0.0;
  std::uint64_t n = 0;
  double N = 0.0;
  double a_n = 0.0;
  double b_n = 0.0;
  Estimate est;
  double comp_gaussian = 0.0;
  double comp_pareto = 0.0;
  double prediction = 0.0;
  double ratio = 0.0;
  std::uint64_t seed = 0;

  std::string components() const;  // "gaussian=<v>;pareto=<v>"
  std::string csv_row() const;
  static const char* csv_header();
  std::string json() const;
};

// requires N >= 3 a_n (the comparison is only claimed deep in the tail)
LdReport verify_thm_LD(const TailModel& model, std::uint64_t n, double N, std::uint64_t samples,
                       std::uint64_t seed);

}  // namespace ldlab
