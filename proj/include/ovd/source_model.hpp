// Stationary source models (memoryless or first-order Markov) and their
// information measures.  Reported entropies and rates are in base-|X| units;
// log-probabilities are natural unless noted.
#pragma once

#include <cstdint>
#include <optional>

#include "ovd/markov.hpp"
#include "ovd/pmf.hpp"

namespace ovd {

// Rate of a Renyi entropy; `approximate` marks finite-block evaluations.
struct RenyiRate {
  double value = 0.0;  // base-|X|
  bool approximate = false;
  int block_length = 1;
};

class SourceModel {
 public:
  static SourceModel memoryless(Pmf pmf);
  static SourceModel markov(MarkovKernel kernel);

  bool is_memoryless() const { return pmf_.has_value(); }
  std::size_t alphabet_size() const;
  const Pmf& pmf() const;
  const MarkovKernel& kernel() const;
  std::vector<double> stationary_distribution() const;

  // Stationary sample of the given length (>= 1), deterministic per generator
  // state.
  Seq sample_sequence(std::size_t len, Philox& g) const;

  // Log-probability of `seq`; with `past` present, conditions on it (a
  // first-order model only reads the final context symbol).  Natural-log and
  // base-|X| variants.
  double log_prob_nats(const Seq& seq, const Seq* past = nullptr) const;
  double log_prob(const Seq& seq, const Seq* past = nullptr) const;

  // Shannon entropy rate H1, base-|X|.
  double entropy_rate() const;

  // Renyi entropy rate of order alpha (alpha may be -inf; alpha = 1 delegates
  // to entropy_rate).  Markov models with finite alpha != 1 are evaluated on
  // length-m blocks and flagged approximate; block_length <= 0 selects the
  // largest m with |X|^m <= 4096 (m = 12 for binary).
  RenyiRate renyi_entropy_rate(double alpha, int block_length = 0) const;

  // Upper bound d(s) on total-variation distance from stationarity after s
  // steps: closed form for symmetric kernels, max-row TV of K^s otherwise;
  // 0 for memoryless models.
  double mixing_coefficient_bound(std::uint64_t s) const;

  // P[X_{1+s} = X_1] under stationarity.
  double recurrence_probability(std::uint64_t s) const;

  // Minimum over length-t blocks of the block log-probability (nats); the
  // block law includes the stationary start.  -H_{-inf}(P_{X_1^t}) in nats.
  double min_block_log_prob_nats(int t) const;

 private:
  SourceModel() = default;
  std::optional<Pmf> pmf_;
  std::optional<MarkovKernel> kernel_;
};

}  // namespace ovd
