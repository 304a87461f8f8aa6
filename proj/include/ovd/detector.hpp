// MAP overlap detectors for noiseless and noisy read pairs, the minimal
// detectable overlap, and the exact Markov overlap likelihood.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ovd/channel.hpp"
#include "ovd/common.hpp"
#include "ovd/markov.hpp"
#include "ovd/source_model.hpp"

namespace ovd {

struct DetectorConfig {
  // Threshold exponent: the no-overlap score is ln(n^mu) instead of
  // ln(n_ell) when set.  Must be positive.
  std::optional<double> mu;
  // Truncated variant: hypotheses with 0 < |t| < truncation_cutoff are
  // removed from consideration.  Must lie in [0, ell].
  std::optional<int> truncation_cutoff;
  // One-sided variant: negative-overlap hypotheses are removed from
  // consideration (used by the one-sided experiment mode).
  bool positive_only = false;
};

struct Decision {
  int ell = 0;
  int t_hat = 0;
  double threshold_log = 0.0;   // score assigned to t = 0, nats
  // Log-scores for t = -(ell-1) .. ell (index t + ell - 1); off-support
  // hypotheses carry -inf.
  std::vector<double> scores;
  int t_plus = 0;               // best positive-overlap hypothesis, 0 = none
  int t_minus = 0;              // best negative-overlap hypothesis, 0 = none
  double log_gamma_plus = 0.0;  // its score; 0 (Gamma = 1) when t_plus = 0
  double log_gamma_minus = 0.0;

  double score(int t) const;
};

// MAP rule for noiseless reads: score ln Gamma+(t) = -ln P(prefix_t(read2))
// when suffix_t(read1) matches it (mirrored for negative t), against the
// threshold ln(n_ell).  Exact MAP for memoryless models; plug-in prefix
// likelihoods for Markov models.
Decision detect_noiseless(const Seq& read1, const Seq& read2, const SourceModel& model,
                          std::int64_t n, const DetectorConfig& config = {});

// MAP rule for noisy reads: score ln Gamma+(t) = sum of ln lambda over the
// t aligned symbol pairs, for every t in [-(ell-1), ell].
Decision detect_noisy(const Seq& read1, const Seq& read2, const PairStats& stats, std::int64_t n,
                      const DetectorConfig& config = {});

// Largest t in [0, ell] whose best-case score cannot cross the threshold
// (max t whose least likely length-t block still has -ln P <= ln threshold).
// Overlaps of size at most this value are never detected.
int min_detectable_overlap_noiseless(const SourceModel& model, std::int64_t n, int ell,
                                     std::optional<double> mu = {});

// Noisy counterpart ln(threshold)/ln(lambda_max), real-valued; +inf when
// lambda_max <= 1 (nothing is ever detectable).
double min_detectable_overlap_noisy(double lambda_max, std::int64_t n, int ell,
                                    std::optional<double> mu = {});

// Exact log-likelihood of a positive overlap t for a first-order Markov
// source, up to the t-independent factor P(read1): the log-probability of
// read2's continuation beyond the overlap, -inf when the overlap symbols do
// not match.  Natural logs.
double markov_exact_score(const Seq& read1, const Seq& read2, const MarkovKernel& kernel, int t);

}  // namespace ovd
