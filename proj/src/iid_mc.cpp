#include "ldlab/iid_mc.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "ldlab/errors.hpp"
#include "ldlab/norming.hpp"
#include "ldlab/parallel.hpp"

namespace ldlab {

Estimate mc_tail_Sn(const TailModel& model, std::uint64_t n, double N, std::uint64_t samples,
                    std::uint64_t seed, unsigned shards) {
  if (n == 0 || samples == 0 || shards == 0)
    throw std::invalid_argument("mc_tail_Sn: need n, samples and shards >= 1");
  if (N <= -8.9e307) return wilson_ci(samples, samples);
  if (N >= model.x_min()) {
    double per_sum = static_cast<double>(n) * model.tail_prob(N, Side::right);
    double expected = static_cast<double>(samples) * per_sum;
    if (expected < 100.0) {
      double need = per_sum > 0.0 ? std::ceil(100.0 / per_sum) : 0.0;
      std::uint64_t required = need > 0.0 && need < 1.8e19
                                   ? static_cast<std::uint64_t>(need)
                                   : std::numeric_limits<std::uint64_t>::max();
      throw insufficient_samples_error(expected, required);
    }
  }
  double threshold = N + (model.alpha() > 1.0 ? static_cast<double>(n) * model.mean() : 0.0);
  std::uint64_t hits = 0;
  for (unsigned s = 0; s < shards; ++s) {
    auto [lo, hi] = shard_range(samples, shards, s);
    Rng rng(seed, s + 1);
    for (std::uint64_t k = lo; k < hi; ++k) {
      double sum = 0.0;
      for (std::uint64_t j = 0; j < n; ++j) sum += model.quantile(rng.uniform());
      if (sum > threshold) ++hits;
    }
  }
  return wilson_ci(hits, samples);
}

LdReport verify_thm_LD(const TailModel& model, std::uint64_t n, double N, std::uint64_t samples,
                       std::uint64_t seed) {
  NormingPlan plan(model, std::min(0.1, 0.5 * model.alpha()));
  LdReport r;
  r.alpha = model.alpha();
  r.n = n;
  r.N = N;
  r.a_n = plan.a(n);
  r.b_n = model.alpha() > 1.0 ? static_cast<double>(n) * model.mean() : 0.0;
  r.seed = seed;
  if (!(N >= 3.0 * r.a_n))
    throw std::domain_error("verify_thm_LD: need N >= 3 a_n, the comparison is a tail statement");
  r.comp_pareto = static_cast<double>(n) * model.tail_prob(N, Side::right);
  if (model.alpha() == 2.0) r.comp_gaussian = normal_upper_tail(N / plan.bulk_scale(n));
  r.prediction = r.comp_gaussian + r.comp_pareto;
  r.est = mc_tail_Sn(model, n, N, samples, seed);
  r.ratio = r.est.value / r.prediction;
  return r;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string LdReport::components() const {
  return "gaussian=" + fmt(comp_gaussian) + ";pareto=" + fmt(comp_pareto);
}

const char* LdReport::csv_header() {
  return "alpha,n,N,a_n,p_hat,ci_lo,ci_hi,prediction,ratio,components";
}

std::string LdReport::csv_row() const {
  return fmt(alpha) + "," + std::to_string(n) + "," + fmt(N) + "," + fmt(a_n) + "," +
         fmt(est.value) + "," + fmt(est.ci_lo) + "," + fmt(est.ci_hi) + "," + fmt(prediction) +
         "," + fmt(ratio) + "," + components();
}

std::string LdReport::json() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  j["n"] = n;
  j["N"] = N;
  j["a_n"] = a_n;
  j["b_n"] = b_n;
  j["p_hat"] = est.value;
  j["ci_lo"] = est.ci_lo;
  j["ci_hi"] = est.ci_hi;
  j["hits"] = est.hits;
  j["samples"] = est.samples;
  j["prediction"] = prediction;
  j["ratio"] = ratio;
  j["gaussian"] = comp_gaussian;
  j["pareto"] = comp_pareto;
  j["seed"] = seed;
  return j.dump();
}

}  // namespace ldlab
