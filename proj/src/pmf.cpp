#include "ovd/pmf.hpp"

#include <cmath>

namespace ovd {

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw ModelInvalid("pmf: empty probability vector");
  NeumaierSum total;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    double p = probs_[i];
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ModelInvalid("pmf: entries must be finite and non-negative");
    total.add(p);
    if (p > 0.0) support_.push_back(static_cast<Symbol>(i));
  }
  if (std::abs(total.value() - 1.0) > 1e-12)
    throw ModelInvalid("pmf: entries must sum to 1 (tolerance 1e-12)");
  if (support_.empty()) throw ModelInvalid("pmf: empty support");

  min_support_prob_ = kPosInf;
  for (Symbol x : support_) {
    min_support_prob_ = std::min(min_support_prob_, probs_[x]);
    max_prob_ = std::max(max_prob_, probs_[x]);
  }
  // Cumulative mass over the support only, so rounding can never leak a draw
  // onto a zero-probability symbol.
  cum_.reserve(support_.size());
  double run = 0.0;
  for (Symbol x : support_) {
    run += probs_[x];
    cum_.push_back(run);
  }
  cum_.back() = 1.0;
}

double Pmf::log_prob(Symbol x) const {
  if (x >= probs_.size()) throw InvalidArgument("pmf: symbol outside alphabet");
  double p = probs_[x];
  return p > 0.0 ? std::log(p) : kNegInf;
}

Symbol Pmf::sample(Philox& g) const {
  double u = g.next_double();
  for (std::size_t i = 0; i + 1 < cum_.size(); ++i)
    if (u < cum_[i]) return support_[i];
  return support_.back();
}

}  // namespace ovd
