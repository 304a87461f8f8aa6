// Ground-truth references: exact posteriors over the overlap hypothesis on
// small instances (three independent computations), partial power sums over
// length-t blocks, and repetition probabilities.
#pragma once

#include <cstdint>
#include <vector>

#include "ovd/channel.hpp"
#include "ovd/common.hpp"
#include "ovd/pmf.hpp"
#include "ovd/rng.hpp"
#include "ovd/source_model.hpp"

namespace ovd {

struct PosteriorTable {
  int ell = 0;
  std::vector<double> probs;      // t = -(ell-1) .. ell, sums to 1
  std::vector<double> log_probs;  // unnormalized is fine for the argmax

  double prob(int t) const;
  // MAP estimate under the detector's rule: 1e-9 epsilon band below the
  // maximum, then prefer 0, then smaller |t|, then the positive sign.
  int map_t() const;
};

// Bayes posterior P[T = t | reads] from the closed-form read-pair
// likelihoods: aligned positions contribute p_yy, the rest factor out.
// Memoryless models only.
PosteriorTable exact_posterior(const Seq& read1, const Seq& read2, const SourceModel& model,
                               const Channel& channel, std::int64_t n);

// Same law by direct enumeration of all n^2 index pairs, scoring each pair's
// window geometry separately.  Memoryless models only.
PosteriorTable enumerate_posterior(const Seq& read1, const Seq& read2, const SourceModel& model,
                                   const Channel& channel, std::int64_t n);

// Same law by brute force over every source sequence of the extended length
// n + 3 ell - 3.  Memoryless models only; alphabet^length must stay small.
PosteriorTable brute_posterior(const Seq& read1, const Seq& read2, const SourceModel& model,
                               const Channel& channel, std::int64_t n);

enum class Direction { Ge, Le };

// Exact sum over length-t sequences of P(x)^exponent restricted to
// 1/P(x) >= threshold (Ge) or <= threshold (Le), grouped by composition
// class.  exponent must be 1 or 2.
double partial_power_sum(const Pmf& pmf, int t, double threshold, int exponent, Direction dir);
double partial_power_sum(const SourceModel& model, int t, double threshold, int exponent,
                         Direction dir);

struct RepetitionEstimate {
  double value = 0.0;
  bool exact = true;
  double std_error = 0.0;  // 0 when exact
};

// P[X_1^t = X_{1+s}^{t+s}]: closed form over residue classes for memoryless
// models; Monte Carlo with a reported standard error for Markov models.
RepetitionEstimate repetition_probability(const SourceModel& model, int t, int s,
                                          std::uint64_t seed = 0, std::uint64_t trials = 200000);

// Exact Markov repetition probability by summing the chain probability of
// every s-periodic extension; requires alphabet^s <= 4096.
double markov_repetition_exact(const MarkovKernel& kernel, int t, int s);

}  // namespace ovd
