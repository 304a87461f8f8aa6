#include "ovd/source_model.hpp"

#include <cmath>

namespace ovd {

SourceModel SourceModel::memoryless(Pmf pmf) {
  if (pmf.size() < 2 || pmf.size() > 8)
    throw ModelInvalid("source model: alphabet size must be in [2, 8]");
  SourceModel m;
  m.pmf_ = std::move(pmf);
  return m;
}

SourceModel SourceModel::markov(MarkovKernel kernel) {
  SourceModel m;
  m.kernel_ = std::move(kernel);
  return m;
}

std::size_t SourceModel::alphabet_size() const {
  return is_memoryless() ? pmf_->size() : kernel_->size();
}

const Pmf& SourceModel::pmf() const {
  if (!pmf_) throw Unsupported("source model: not memoryless");
  return *pmf_;
}

const MarkovKernel& SourceModel::kernel() const {
  if (!kernel_) throw Unsupported("source model: not markov");
  return *kernel_;
}

std::vector<double> SourceModel::stationary_distribution() const {
  return is_memoryless() ? pmf_->probs() : kernel_->stationary();
}

Seq SourceModel::sample_sequence(std::size_t len, Philox& g) const {
  if (len < 1) throw InvalidArgument("sample_sequence: length must be >= 1");
  Seq out(len);
  if (is_memoryless()) {
    for (std::size_t i = 0; i < len; ++i) out[i] = pmf_->sample(g);
  } else {
    out[0] = kernel_->sample_start(g);
    for (std::size_t i = 1; i < len; ++i) out[i] = kernel_->sample_step(out[i - 1], g);
  }
  return out;
}

double SourceModel::log_prob_nats(const Seq& seq, const Seq* past) const {
  std::size_t k = alphabet_size();
  for (Symbol x : seq)
    if (x >= k) throw InvalidArgument("log_prob: symbol outside alphabet");
  if (past != nullptr)
    for (Symbol x : *past)
      if (x >= k) throw InvalidArgument("log_prob: context symbol outside alphabet");
  if (seq.empty()) return 0.0;

  NeumaierSum s;
  if (is_memoryless()) {
    for (Symbol x : seq) {
      double lp = pmf_->log_prob(x);
      if (lp == kNegInf) return kNegInf;
      s.add(lp);
    }
    return s.value();
  }
  std::size_t start = 0;
  if (past != nullptr && !past->empty()) {
    double lp = kernel_->log_prob(past->back(), seq[0]);
    if (lp == kNegInf) return kNegInf;
    s.add(lp);
    start = 1;
  } else {
    double pi0 = kernel_->stationary()[seq[0]];
    if (pi0 <= 0.0) return kNegInf;
    s.add(std::log(pi0));
    start = 1;
  }
  for (std::size_t i = start; i < seq.size(); ++i) {
    double lp = kernel_->log_prob(seq[i - 1], seq[i]);
    if (lp == kNegInf) return kNegInf;
    s.add(lp);
  }
  return s.value();
}

double SourceModel::log_prob(const Seq& seq, const Seq* past) const {
  return log_prob_nats(seq, past) / std::log(static_cast<double>(alphabet_size()));
}

double SourceModel::entropy_rate() const {
  double lnk = std::log(static_cast<double>(alphabet_size()));
  if (is_memoryless()) {
    NeumaierSum h;
    for (Symbol x : pmf_->support()) {
      double p = pmf_->prob(x);
      h.add(-p * std::log(p));
    }
    return h.value() / lnk;
  }
  // Entropy rate of an ergodic chain: sum_x pi(x) H(K(x, .)).
  const MarkovKernel& ker = *kernel_;
  NeumaierSum h;
  for (std::size_t x = 0; x < ker.size(); ++x) {
    double row_h = 0.0;
    for (std::size_t y = 0; y < ker.size(); ++y) {
      double p = ker.prob(static_cast<Symbol>(x), static_cast<Symbol>(y));
      if (p > 0.0) row_h += -p * std::log(p);
    }
    h.add(ker.stationary()[x] * row_h);
  }
  return h.value() / lnk;
}

namespace {

// H_alpha of an explicit block distribution given by log-probabilities of the
// support atoms, divided by the block length (base-|X| units).
double block_renyi_rate(const std::vector<double>& support_logps, double alpha, int m,
                        double lnk) {
  NeumaierSum s;
  for (double lp : support_logps) s.add(std::exp(alpha * lp));
  double h = std::log(s.value()) / (1.0 - alpha);
  return h / (lnk * m);
}

// Depth-first enumeration of all positive-probability length-m blocks of a
// Markov chain, collecting block log-probabilities.
void enumerate_blocks(const MarkovKernel& ker, int m, int depth, Symbol last, double logp,
                      std::vector<double>& out) {
  if (depth == m) {
    out.push_back(logp);
    return;
  }
  for (std::size_t y = 0; y < ker.size(); ++y) {
    double p = depth == 0 ? ker.stationary()[y] : ker.prob(last, static_cast<Symbol>(y));
    if (p > 0.0)
      enumerate_blocks(ker, m, depth + 1, static_cast<Symbol>(y), logp + std::log(p), out);
  }
}

}  // namespace

RenyiRate SourceModel::renyi_entropy_rate(double alpha, int block_length) const {
  if (std::isnan(alpha) || alpha == kPosInf)
    throw InvalidArgument("renyi_entropy_rate: order must be real or -inf");
  double lnk = std::log(static_cast<double>(alphabet_size()));
  if (alpha == 1.0) return {entropy_rate(), false, 1};

  if (is_memoryless()) {
    if (alpha == kNegInf) return {-std::log(pmf_->min_support_prob()) / lnk, false, 1};
    NeumaierSum s;
    for (Symbol x : pmf_->support()) s.add(std::pow(pmf_->prob(x), alpha));
    return {std::log(s.value()) / ((1.0 - alpha) * lnk), false, 1};
  }

  if (alpha == kNegInf) return {kernel_->max_mean_cycle_neglog() / lnk, false, 1};

  int m = block_length;
  if (m <= 0) {
    m = 1;
    while (std::pow(static_cast<double>(alphabet_size()), m + 1) <= 4096.0) ++m;
  }
  std::vector<double> logps;
  enumerate_blocks(*kernel_, m, 0, 0, 0.0, logps);
  return {block_renyi_rate(logps, alpha, m, lnk), true, m};
}

double SourceModel::mixing_coefficient_bound(std::uint64_t s) const {
  if (s < 1) throw InvalidArgument("mixing_coefficient_bound: s must be >= 1");
  if (is_memoryless()) return 0.0;
  const MarkovKernel& ker = *kernel_;
  double k = static_cast<double>(ker.size());
  if (auto eps = ker.symmetric_epsilon()) {
    double gamma = 1.0 - k * *eps;
    double d = ((k - 1.0) / k) * std::pow(std::abs(gamma), static_cast<double>(s));
    return std::min(1.0, std::max(0.0, d));
  }
  Matrix ks = ker.power(s);
  double worst = 0.0;
  for (std::size_t x = 0; x < ker.size(); ++x) {
    double l1 = 0.0;
    for (std::size_t y = 0; y < ker.size(); ++y)
      l1 += std::abs(ks[x * ker.size() + y] - ker.stationary()[y]);
    worst = std::max(worst, 0.5 * l1);
  }
  return std::min(1.0, worst);
}

double SourceModel::recurrence_probability(std::uint64_t s) const {
  if (s < 1) throw InvalidArgument("recurrence_probability: s must be >= 1");
  if (is_memoryless()) {
    NeumaierSum r;
    for (Symbol x : pmf_->support()) r.add(pmf_->prob(x) * pmf_->prob(x));
    return r.value();
  }
  const MarkovKernel& ker = *kernel_;
  Matrix ks = ker.power(s);
  NeumaierSum r;
  for (std::size_t x = 0; x < ker.size(); ++x)
    r.add(ker.stationary()[x] * ks[x * ker.size() + x]);
  return r.value();
}

double SourceModel::min_block_log_prob_nats(int t) const {
  if (t < 1) throw InvalidArgument("min_block_log_prob: t must be >= 1");
  if (is_memoryless()) return t * std::log(pmf_->min_support_prob());
  // Most improbable block: maximize accumulated -ln over paths in the support
  // digraph, including the stationary start weight.
  const MarkovKernel& ker = *kernel_;
  std::size_t k = ker.size();
  std::vector<double> w(k, kNegInf);
  for (std::size_t x = 0; x < k; ++x)
    if (ker.stationary()[x] > 0.0) w[x] = -std::log(ker.stationary()[x]);
  for (int step = 1; step < t; ++step) {
    std::vector<double> next(k, kNegInf);
    for (std::size_t x = 0; x < k; ++x) {
      if (w[x] == kNegInf) continue;
      for (std::size_t y = 0; y < k; ++y) {
        double p = ker.prob(static_cast<Symbol>(x), static_cast<Symbol>(y));
        if (p <= 0.0) continue;
        double c = w[x] - std::log(p);
        if (c > next[y]) next[y] = c;
      }
    }
    w.swap(next);
  }
  double best = kNegInf;
  for (double c : w) best = std::max(best, c);
  OVD_CHECK(best != kNegInf, "min_block_log_prob: no positive-probability block");
  return -best;
}

}  // namespace ovd
