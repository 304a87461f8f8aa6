// Stratified Monte Carlo estimation of the detection error probabilities and
// the scaling constant phi, with n-sweeps and trend verdicts.
#pragma once

#include <cstdint>
#include <vector>

#include "ovd/channel.hpp"
#include "ovd/common.hpp"
#include "ovd/detector.hpp"
#include "ovd/rng.hpp"
#include "ovd/sampler.hpp"
#include "ovd/source_model.hpp"

namespace ovd {

struct ExperimentConfig {
  SourceModel model;
  Channel channel;
  double beta = 1.0;                        // ell = ceil(beta * log_|X| n)
  std::vector<std::int64_t> n_grid;
  std::uint64_t trials_per_stratum = 100000;  // strata with t != 0
  std::uint64_t trials_t0 = 1000000;          // the rare-error T = 0 stratum
  DetectorConfig detector;
  std::uint64_t seed = 0;
  bool one_sided = false;  // positive overlaps only; halves the theory constant
  int threads = 0;         // 0 = hardware concurrency
  bool force_generic = false;  // testing hook: disable the packed engines

  ExperimentConfig(SourceModel m, Channel c);
  int ell_for(std::int64_t n) const;
  void validate() const;
};

struct StratumEstimate {
  int t = 0;
  std::uint64_t trials = 0;
  std::uint64_t errors = 0;
  double estimate = 0.0;
  double ci_lo = 0.0;  // Wilson 95% interval
  double ci_hi = 0.0;
};

struct ExperimentRecord {
  std::int64_t n = 0;
  int ell = 0;
  StratumEstimate p1;               // conditional error given T = 0
  std::vector<StratumEstimate> p2;  // strata t != 0, ascending in t
  double p_error_hat = 0.0;         // exact prior recombination
  double phi_hat = 0.0;             // p_error * n / log_|X| n
  double phi_hat_nats = 0.0;        // p_error * n / ln n
  double theory_phi = 0.0;
  double t_star = 0.0;              // log_|X| n over the information rate
  double t_mdo = 0.0;
};

struct ExperimentReport {
  std::vector<ExperimentRecord> records;
};

struct SweepVerdicts {
  std::vector<double> phi_values;
  bool phi_decreasing = false;       // first > last, moving toward theory
  std::vector<double> type1_scaled;  // p1 * n / sqrt(log_|X| n) per grid point
  bool type1_bounded = false;
  bool profile_ok = false;           // type-II profile around t* at the largest n
};

struct SweepResult {
  ExperimentReport report;
  SweepVerdicts verdicts;
};

// 95% Wilson score interval for a binomial proportion.
void wilson_interval(std::uint64_t errors, std::uint64_t trials, double& lo, double& hi);

// Conditional error probability of the stratum T = t, from trials_t0 or
// trials_per_stratum trials; per-trial generators are derived from
// (seed, n, t, trial) so results do not depend on scheduling.
StratumEstimate estimate_stratum(const ExperimentConfig& config, std::int64_t n, int t);

ExperimentRecord run_single(const ExperimentConfig& config, std::int64_t n);
ExperimentReport run_experiment(const ExperimentConfig& config);

// Requires at least 3 strictly increasing grid points.
SweepResult sweep(const ExperimentConfig& config);

double theory_phi(const ExperimentConfig& config);
double theory_t_star(const ExperimentConfig& config, std::int64_t n);

namespace detail {

// Test hooks into the packed uniform-binary engines; identical code paths to
// the ones the estimator uses, modulo bit packing of the inputs.
void packed_sample_given_t(int ell, int t, Philox& g, Seq& read1, Seq& read2);
int packed_detect_noiseless_uniform(const Seq& read1, const Seq& read2, double threshold_log,
                                    int cutoff = 0, bool positive_only = false);
int packed_detect_noisy_symmetric(const Seq& read1, const Seq& read2, double log_lam_match,
                                  double log_lam_mis, double threshold_log, int cutoff = 0,
                                  bool positive_only = false);

}  // namespace detail

}  // namespace ovd
