// Probability mass function over a small finite alphabet.
#pragma once

#include <cstddef>
#include <vector>

#include "ovd/common.hpp"
#include "ovd/rng.hpp"

namespace ovd {

class Pmf {
 public:
  // Validates: at least one entry, all entries >= 0, total within 1e-12 of 1,
  // non-empty support.  Zero-probability symbols are allowed.
  explicit Pmf(std::vector<double> probs);

  std::size_t size() const { return probs_.size(); }
  double prob(Symbol x) const { return probs_[x]; }
  // Natural log; -inf for zero-probability symbols, throws on out-of-alphabet.
  double log_prob(Symbol x) const;
  const std::vector<double>& probs() const { return probs_; }
  const std::vector<Symbol>& support() const { return support_; }
  double min_support_prob() const { return min_support_prob_; }
  double max_prob() const { return max_prob_; }

  // Inverse-CDF draw.
  Symbol sample(Philox& g) const;

 private:
  std::vector<double> probs_;
  std::vector<double> cum_;  // cumulative sums for sampling
  std::vector<Symbol> support_;
  double min_support_prob_ = 0.0;
  double max_prob_ = 0.0;
};

}  // namespace ovd
