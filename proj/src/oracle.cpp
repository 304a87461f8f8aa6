// Exhaustive and closed-form ground truth for the overlap posterior, block
// power sums, and repetition probabilities.
#include "ovd/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "ovd/sampler.hpp"

namespace ovd {
namespace {

constexpr double kIndicatorTol = 1e-9;  // absorbs last-ulp noise at equality

std::size_t tindex(int t, int ell) { return static_cast<std::size_t>(t + ell - 1); }

// Admissible second starts for a given first start: the index-pair law puts
// weight 1/n^2 on exactly n offsets per first start, window depending on the
// edge case.
void second_start_range(std::int64_t n, int ell, std::int64_t i1, std::int64_t& lo,
                        std::int64_t& hi) {
  if (i1 <= ell - 1) {
    lo = i1 - (ell - 1);
    hi = i1 + n - ell;
  } else if (i1 <= n - ell + 1) {
    lo = 1;
    hi = n;
  } else {
    lo = i1 + ell - n;
    hi = i1 + ell - 1;
  }
}

void check_posterior_inputs(const Seq& read1, const Seq& read2, const SourceModel& model,
                            const Channel& channel, std::int64_t n) {
  if (!model.is_memoryless())
    throw Unsupported("posterior oracles require a memoryless source model");
  if (channel.in_size() != model.alphabet_size())
    throw InvalidArgument("channel input alphabet must match the source alphabet");
  if (read1.size() != read2.size() || read1.size() < 2)
    throw InvalidArgument("reads must share a length of at least 2");
  const std::size_t m = channel.out_size();
  for (Symbol s : read1)
    if (s >= m) throw InvalidArgument("read symbol outside the output alphabet");
  for (Symbol s : read2)
    if (s >= m) throw InvalidArgument("read symbol outside the output alphabet");
  OverlapPrior check(n, static_cast<int>(read1.size()));
  (void)check;
}

PosteriorTable normalize_linear(std::vector<double> acc, int ell) {
  NeumaierSum total;
  for (double v : acc) total.add(v);
  const double z = total.value();
  if (!(z > 0.0)) throw InvalidArgument("observed reads have zero probability under the model");
  PosteriorTable table;
  table.ell = ell;
  table.probs.resize(acc.size());
  table.log_probs.resize(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    table.probs[i] = acc[i] / z;
    table.log_probs[i] = acc[i] > 0.0 ? std::log(acc[i]) - std::log(z) : kNegInf;
  }
  return table;
}

}  // namespace

double PosteriorTable::prob(int t) const {
  if (t < -(ell - 1) || t > ell) throw InvalidArgument("overlap hypothesis outside the support");
  return probs[tindex(t, ell)];
}

int PosteriorTable::map_t() const {
  constexpr double kEps = 1e-9;
  double best = kNegInf;
  for (double v : log_probs) best = std::max(best, v);
  if (log_probs[tindex(0, ell)] >= best - kEps) return 0;
  for (int mag = 1; mag <= ell; ++mag) {
    if (log_probs[tindex(mag, ell)] >= best - kEps) return mag;
    if (mag <= ell - 1 && log_probs[tindex(-mag, ell)] >= best - kEps) return -mag;
  }
  throw Error("posterior argmax failed to locate the maximum");
}

PosteriorTable exact_posterior(const Seq& read1, const Seq& read2, const SourceModel& model,
                               const Channel& channel, std::int64_t n) {
  check_posterior_inputs(read1, read2, model, channel, n);
  const int ell = static_cast<int>(read1.size());
  const OverlapPrior prior(n, ell);
  const PairStats stats = pair_statistics(model, channel);
  const std::size_t m = stats.out_alphabet;

  // ln posterior(t) up to a shared constant: ln P_T(t) plus, per aligned
  // position, ln p_yy - ln p_y - ln p_y.
  auto aligned_term = [&](Symbol a, Symbol b) {
    const std::size_t i = static_cast<std::size_t>(a) * m + b;
    if (stats.on_support[i] == 0) return kNegInf;
    return std::log(stats.p_yy[i]) - std::log(stats.p_y[a]) - std::log(stats.p_y[b]);
  };

  std::vector<double> w(static_cast<std::size_t>(2 * ell), kNegInf);
  w[tindex(0, ell)] = std::log(prior.prob(0));
  for (int t = 1; t <= ell; ++t) {
    double acc = std::log(prior.prob(t));
    for (int i = 0; i < t && acc != kNegInf; ++i) {
      const double term = aligned_term(read1[ell - t + i], read2[i]);
      acc = term == kNegInf ? kNegInf : acc + term;
    }
    w[tindex(t, ell)] = acc;
  }
  for (int t = 1; t <= ell - 1; ++t) {
    double acc = std::log(prior.prob(-t));
    for (int i = 0; i < t && acc != kNegInf; ++i) {
      const double term = aligned_term(read2[ell - t + i], read1[i]);
      acc = term == kNegInf ? kNegInf : acc + term;
    }
    w[tindex(-t, ell)] = acc;
  }

  const double z = log_sum_exp(w);
  if (z == kNegInf) throw InvalidArgument("observed reads have zero probability under the model");
  PosteriorTable table;
  table.ell = ell;
  table.probs.resize(w.size());
  table.log_probs.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    table.log_probs[i] = w[i] == kNegInf ? kNegInf : w[i] - z;
    table.probs[i] = std::exp(table.log_probs[i]);
  }
  return table;
}

PosteriorTable enumerate_posterior(const Seq& read1, const Seq& read2, const SourceModel& model,
                                   const Channel& channel, std::int64_t n) {
  check_posterior_inputs(read1, read2, model, channel, n);
  const int ell = static_cast<int>(read1.size());
  const std::size_t m = channel.out_size();
  const Pmf& pmf = model.pmf();
  const std::size_t k = pmf.size();

  // Per-symbol output marginal and same-source pair law, recomputed here
  // directly from the channel rows.
  std::vector<double> py(m, 0.0), pyy(m * m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    for (std::size_t x = 0; x < k; ++x) {
      const double w = pmf.prob(static_cast<Symbol>(x)) * channel.prob(static_cast<Symbol>(x), static_cast<Symbol>(y));
      py[y] += w;
      for (std::size_t yt = 0; yt < m; ++yt)
        pyy[y * m + yt] += w * channel.prob(static_cast<Symbol>(x), static_cast<Symbol>(yt));
    }
  }

  const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  std::vector<double> acc(static_cast<std::size_t>(2 * ell), 0.0);
  for (std::int64_t i1 = 1; i1 <= n; ++i1) {
    std::int64_t lo = 0, hi = 0;
    second_start_range(n, ell, i1, lo, hi);
    for (std::int64_t i2 = lo; i2 <= hi; ++i2) {
      // Likelihood of the observed reads for windows at (i1, i2).
      const std::int64_t d = i2 >= i1 ? i2 - i1 : i1 - i2;
      const Seq& first = i2 >= i1 ? read1 : read2;
      const Seq& second = i2 >= i1 ? read2 : read1;
      double lik = 1.0;
      if (d >= ell) {
        for (int j = 0; j < ell; ++j) lik *= py[first[j]] * py[second[j]];
      } else {
        const int ov = ell - static_cast<int>(d);
        for (int j = 0; j < static_cast<int>(d); ++j) lik *= py[first[j]];
        for (int j = 0; j < ov; ++j) lik *= pyy[static_cast<std::size_t>(first[d + j]) * m + second[j]];
        for (int j = ov; j < ell; ++j) lik *= py[second[j]];
      }
      acc[tindex(overlap_from_indices(i1, i2, ell), ell)] += lik * inv_n2;
    }
  }
  return normalize_linear(std::move(acc), ell);
}

PosteriorTable brute_posterior(const Seq& read1, const Seq& read2, const SourceModel& model,
                               const Channel& channel, std::int64_t n) {
  check_posterior_inputs(read1, read2, model, channel, n);
  const int ell = static_cast<int>(read1.size());
  const std::size_t k = model.alphabet_size();
  const Pmf& pmf = model.pmf();
  const std::int64_t len = n + 3 * static_cast<std::int64_t>(ell) - 3;  // positions 2-ell .. n+2ell-2
  const double configs = std::pow(static_cast<double>(k), static_cast<double>(len));
  if (configs > 16.0 * 1024.0 * 1024.0)
    throw Unsupported("full-sequence enumeration is limited to tiny instances");

  // Admissible index pairs, with window starts rebased to 0 at position 2-ell.
  struct IndexPair {
    std::int64_t o1, o2;
    std::size_t slot;
  };
  std::vector<IndexPair> pairs;
  for (std::int64_t i1 = 1; i1 <= n; ++i1) {
    std::int64_t lo = 0, hi = 0;
    second_start_range(n, ell, i1, lo, hi);
    for (std::int64_t i2 = lo; i2 <= hi; ++i2)
      pairs.push_back({i1 - (2 - static_cast<std::int64_t>(ell)), i2 - (2 - static_cast<std::int64_t>(ell)),
                       tindex(overlap_from_indices(i1, i2, ell), ell)});
  }

  const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  std::vector<double> acc(static_cast<std::size_t>(2 * ell), 0.0);
  Seq x(static_cast<std::size_t>(len), 0);
  while (true) {
    double px = 1.0;
    for (Symbol s : x) px *= pmf.prob(s);
    if (px > 0.0) {
      for (const IndexPair& ip : pairs) {
        double lik = 1.0;
        for (int j = 0; j < ell && lik > 0.0; ++j)
          lik *= channel.prob(x[static_cast<std::size_t>(ip.o1) + j], read1[j]) *
                 channel.prob(x[static_cast<std::size_t>(ip.o2) + j], read2[j]);
        if (lik > 0.0) acc[ip.slot] += px * lik * inv_n2;
      }
    }
    // Odometer increment over the alphabet.
    std::size_t pos = 0;
    while (pos < x.size()) {
      if (++x[pos] < k) break;
      x[pos] = 0;
      ++pos;
    }
    if (pos == x.size()) break;
  }
  return normalize_linear(std::move(acc), ell);
}

double partial_power_sum(const Pmf& pmf, int t, double threshold, int exponent, Direction dir) {
  if (t < 1) throw InvalidArgument("block length must be positive");
  if (exponent != 1 && exponent != 2) throw InvalidArgument("exponent must be 1 or 2");
  if (std::isnan(threshold) || threshold < 0.0)
    throw InvalidArgument("threshold must be non-negative");
  const std::size_t k = pmf.size();

  // Number of composition classes is C(t+k-1, k-1); keep enumeration honest.
  const double classes = std::exp(std::lgamma(static_cast<double>(t) + k) -
                                  std::lgamma(static_cast<double>(t) + 1) - std::lgamma(static_cast<double>(k)));
  if (classes > 2e6) throw Unsupported("composition enumeration too large for this alphabet and length");

  const double neg_log_thresh = -std::log(threshold);  // +inf at 0, -inf at inf
  std::vector<double> logp(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double p = pmf.prob(static_cast<Symbol>(i));
    logp[i] = p > 0.0 ? std::log(p) : kNegInf;
  }
  const double lg_t = std::lgamma(static_cast<double>(t) + 1);

  NeumaierSum total;
  std::vector<int> c(k, 0);
  // Depth-first walk over compositions of t into k parts.
  auto walk = [&](auto&& self, std::size_t i, int remaining, double log_prob, double log_count) -> void {
    if (i == k - 1) {
      c[i] = remaining;
      double lp = log_prob;
      if (remaining > 0) lp = logp[i] == kNegInf ? kNegInf : lp + remaining * logp[i];
      if (lp == kNegInf) return;  // zero-probability class contributes nothing
      const double lc = log_count - std::lgamma(static_cast<double>(remaining) + 1);
      const bool accept = dir == Direction::Ge ? (lp <= neg_log_thresh + kIndicatorTol)
                                               : (lp >= neg_log_thresh - kIndicatorTol);
      if (accept) total.add(std::exp(lc + exponent * lp));
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      c[i] = v;
      if (v > 0 && logp[i] == kNegInf) break;  // larger v stays impossible
      const double next_log_prob = v == 0 ? log_prob : log_prob + v * logp[i];
      self(self, i + 1, remaining - v, next_log_prob, log_count - std::lgamma(static_cast<double>(v) + 1));
    }
  };
  double start_log_prob = 0.0;
  walk(walk, 0, t, start_log_prob, lg_t);
  return total.value();
}

double partial_power_sum(const SourceModel& model, int t, double threshold, int exponent,
                         Direction dir) {
  if (!model.is_memoryless())
    throw Unsupported("partial power sums require a memoryless model");
  return partial_power_sum(model.pmf(), t, threshold, exponent, dir);
}

RepetitionEstimate repetition_probability(const SourceModel& model, int t, int s,
                                          std::uint64_t seed, std::uint64_t trials) {
  if (t < 1 || s < 1) throw InvalidArgument("repetition parameters must be positive");
  RepetitionEstimate out;
  if (model.is_memoryless()) {
    const Pmf& pmf = model.pmf();
    double value = 1.0;
    for (int r = 1; r <= s; ++r) {
      const int c_r = (t + s - r) / s + 1;  // residue-class size within [1, t+s]
      NeumaierSum cls;
      for (Symbol x : pmf.support()) cls.add(std::pow(pmf.prob(x), static_cast<double>(c_r)));
      value *= cls.value();
    }
    out.value = value;
    out.exact = true;
    return out;
  }
  if (trials < 100) throw InvalidArgument("Monte Carlo repetition estimate needs at least 100 trials");
  Philox g(derive_key(seed, 0x7265706574ULL), 0);
  const std::size_t len = static_cast<std::size_t>(t) + static_cast<std::size_t>(s);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    const Seq x = model.sample_sequence(len, g);
    bool equal = true;
    for (int j = 0; j < t && equal; ++j) equal = x[j] == x[j + s];
    hits += equal ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  out.value = p;
  out.exact = false;
  out.std_error = std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
  return out;
}

double markov_repetition_exact(const MarkovKernel& kernel, int t, int s) {
  if (t < 1 || s < 1) throw InvalidArgument("repetition parameters must be positive");
  const std::size_t k = kernel.size();
  if (std::pow(static_cast<double>(k), static_cast<double>(s)) > 4096.0)
    throw Unsupported("periodic enumeration is limited to alphabet^s <= 4096");

  // X_j = X_{j+s} for all j <= t forces the whole length t+s realization to
  // be the s-periodic extension of its first s symbols.
  const std::vector<double>& pi = kernel.stationary();
  std::vector<Symbol> w(static_cast<std::size_t>(s), 0);
  NeumaierSum total;
  while (true) {
    double prob = pi[w[0]];
    const int steps = t + s - 1;
    for (int j = 1; j <= steps && prob > 0.0; ++j)
      prob *= kernel.prob(w[static_cast<std::size_t>((j - 1) % s)], w[static_cast<std::size_t>(j % s)]);
    total.add(prob);
    std::size_t pos = 0;
    while (pos < w.size()) {
      if (++w[pos] < k) break;
      w[pos] = 0;
      ++pos;
    }
    if (pos == w.size()) break;
  }
  return total.value();
}

}  // namespace ovd
