// MAP detection rules and the minimal detectable overlap.
#include "ovd/detector.hpp"

#include <algorithm>
#include <cmath>

#include "ovd/sampler.hpp"

namespace ovd {
namespace {

// Z-array: z[i] = length of the longest common prefix of s and s[i..].
std::vector<int> z_array(const std::vector<int>& s) {
  const int m = static_cast<int>(s.size());
  std::vector<int> z(m, 0);
  z[0] = m;
  int l = 0, r = 0;
  for (int i = 1; i < m; ++i) {
    if (i < r) z[i] = std::min(r - i, z[i - l]);
    while (i + z[i] < m && s[z[i]] == s[i + z[i]]) ++z[i];
    if (i + z[i] > r) {
      l = i;
      r = i + z[i];
    }
  }
  return z;
}

// match[t] for t = 1..max_t: does the length-t suffix of `a` equal the
// length-t prefix of `b`?
std::vector<char> suffix_prefix_matches(const Seq& a, const Seq& b, int max_t) {
  const int ell = static_cast<int>(a.size());
  std::vector<int> cat;
  cat.reserve(2 * a.size() + 1);
  for (Symbol s : b) cat.push_back(static_cast<int>(s));
  cat.push_back(-1);  // separator outside the alphabet
  for (Symbol s : a) cat.push_back(static_cast<int>(s));
  const std::vector<int> z = z_array(cat);
  std::vector<char> match(static_cast<std::size_t>(max_t) + 1, 0);
  for (int t = 1; t <= max_t; ++t) {
    const int pos = ell + 1 + (ell - t);  // start of a's length-t suffix
    match[t] = (z[pos] == t) ? 1 : 0;
  }
  return match;
}

// cum[t] = ln P(prefix of length t) under the model, t = 0..ell, with a
// stationary start; -inf is absorbing.
std::vector<double> prefix_log_probs(const SourceModel& model, const Seq& s) {
  const std::size_t ell = s.size();
  std::vector<double> cum(ell + 1, 0.0);
  if (model.is_memoryless()) {
    const Pmf& pmf = model.pmf();
    for (std::size_t i = 0; i < ell; ++i) cum[i + 1] = cum[i] + pmf.log_prob(s[i]);
  } else {
    const MarkovKernel& k = model.kernel();
    const std::vector<double>& pi = k.stationary();
    for (std::size_t i = 0; i < ell; ++i) {
      double step;
      if (i == 0)
        step = pi[s[0]] > 0.0 ? std::log(pi[s[0]]) : kNegInf;
      else
        step = k.log_prob(s[i - 1], s[i]);
      cum[i + 1] = cum[i] + step;
    }
  }
  return cum;
}

double threshold_log_score(std::int64_t n, int ell, const DetectorConfig& config) {
  const OverlapPrior prior(n, ell);
  if (config.mu) {
    if (!std::isfinite(*config.mu) || *config.mu <= 0.0)
      throw InvalidArgument("threshold exponent must be positive");
    return *config.mu * std::log(static_cast<double>(n));
  }
  return std::log(static_cast<double>(prior.n_ell));
}

// Shared argmax: epsilon band of 1e-9 below the maximum, then prefer t = 0,
// then smaller |t|, then the positive sign.
Decision decide(int ell, std::vector<double> scores, double threshold_log,
                const DetectorConfig& config) {
  constexpr double kEps = 1e-9;
  int cutoff = 0;
  if (config.truncation_cutoff) {
    cutoff = *config.truncation_cutoff;
    if (cutoff < 0 || cutoff > ell) throw InvalidArgument("truncation cutoff must lie in [0, ell]");
  }
  auto allowed = [&](int t) {
    if (t == 0) return true;
    if (config.positive_only && t < 0) return false;
    return std::abs(t) >= cutoff;
  };
  auto idx = [ell](int t) { return static_cast<std::size_t>(t + ell - 1); };

  scores[idx(0)] = threshold_log;
  double best = kNegInf;
  for (int t = -(ell - 1); t <= ell; ++t)
    if (allowed(t) && scores[idx(t)] > best) best = scores[idx(t)];

  Decision d;
  d.ell = ell;
  d.threshold_log = threshold_log;
  d.t_hat = 0;
  if (!(scores[idx(0)] >= best - kEps)) {
    for (int mag = 1; mag <= ell && d.t_hat == 0; ++mag) {
      if (allowed(mag) && scores[idx(mag)] >= best - kEps)
        d.t_hat = mag;
      else if (mag <= ell - 1 && allowed(-mag) && scores[idx(-mag)] >= best - kEps)
        d.t_hat = -mag;
    }
    OVD_CHECK(d.t_hat != 0, "argmax failed to locate the maximal score");
  }
  d.scores = std::move(scores);
  return d;
}

}  // namespace

double Decision::score(int t) const {
  if (t < -(ell - 1) || t > ell) throw InvalidArgument("overlap hypothesis outside the support");
  return scores[static_cast<std::size_t>(t + ell - 1)];
}

Decision detect_noiseless(const Seq& read1, const Seq& read2, const SourceModel& model,
                          std::int64_t n, const DetectorConfig& config) {
  if (read1.size() != read2.size() || read1.size() < 2)
    throw InvalidArgument("reads must share a length of at least 2");
  const int ell = static_cast<int>(read1.size());
  const double threshold = threshold_log_score(n, ell, config);

  const std::vector<char> match_plus = suffix_prefix_matches(read1, read2, ell);
  const std::vector<char> match_minus = suffix_prefix_matches(read2, read1, ell - 1);
  const std::vector<double> cum1 = prefix_log_probs(model, read1);
  const std::vector<double> cum2 = prefix_log_probs(model, read2);

  std::vector<double> scores(static_cast<std::size_t>(2 * ell), kNegInf);
  auto idx = [ell](int t) { return static_cast<std::size_t>(t + ell - 1); };
  for (int t = 1; t <= ell; ++t)
    if (match_plus[t]) scores[idx(t)] = -cum2[t];
  for (int t = 1; t <= ell - 1; ++t)
    if (match_minus[t]) scores[idx(-t)] = -cum1[t];

  Decision d = decide(ell, std::move(scores), threshold, config);
  for (int t = ell; t >= 1; --t)
    if (match_plus[t]) {
      d.t_plus = t;
      d.log_gamma_plus = -cum2[t];
      break;
    }
  for (int t = ell - 1; t >= 1; --t)
    if (match_minus[t]) {
      d.t_minus = t;
      d.log_gamma_minus = -cum1[t];
      break;
    }
  return d;
}

Decision detect_noisy(const Seq& read1, const Seq& read2, const PairStats& stats, std::int64_t n,
                      const DetectorConfig& config) {
  if (read1.size() != read2.size() || read1.size() < 2)
    throw InvalidArgument("reads must share a length of at least 2");
  const int ell = static_cast<int>(read1.size());
  const std::size_t m = stats.out_alphabet;
  for (Symbol s : read1)
    if (s >= m) throw InvalidArgument("read symbol outside the output alphabet");
  for (Symbol s : read2)
    if (s >= m) throw InvalidArgument("read symbol outside the output alphabet");
  const double threshold = threshold_log_score(n, ell, config);

  // Local log-lambda table; off-support pairs score -inf.
  std::vector<double> llam(m * m, kNegInf);
  for (std::size_t y = 0; y < m; ++y)
    for (std::size_t yt = 0; yt < m; ++yt)
      if (stats.on(y, yt)) llam[y * m + yt] = std::log(stats.lam(y, yt));

  std::vector<double> scores(static_cast<std::size_t>(2 * ell), kNegInf);
  auto idx = [ell](int t) { return static_cast<std::size_t>(t + ell - 1); };
  for (int t = 1; t <= ell; ++t) {
    double acc = 0.0;
    for (int i = 0; i < t && acc != kNegInf; ++i) {
      const double term = llam[static_cast<std::size_t>(read1[ell - t + i]) * m + read2[i]];
      acc = term == kNegInf ? kNegInf : acc + term;
    }
    scores[idx(t)] = acc;
  }
  for (int t = 1; t <= ell - 1; ++t) {
    double acc = 0.0;
    for (int i = 0; i < t && acc != kNegInf; ++i) {
      const double term = llam[static_cast<std::size_t>(read2[ell - t + i]) * m + read1[i]];
      acc = term == kNegInf ? kNegInf : acc + term;
    }
    scores[idx(-t)] = acc;
  }

  Decision d = decide(ell, std::move(scores), threshold, config);
  for (int t = 1; t <= ell; ++t)
    if (d.score(t) > (d.t_plus == 0 ? kNegInf : d.score(d.t_plus))) d.t_plus = t;
  if (d.t_plus != 0) d.log_gamma_plus = d.score(d.t_plus);
  for (int t = 1; t <= ell - 1; ++t)
    if (d.score(-t) > (d.t_minus == 0 ? kNegInf : d.score(-d.t_minus))) d.t_minus = t;
  if (d.t_minus != 0) d.log_gamma_minus = d.score(-d.t_minus);
  return d;
}

int min_detectable_overlap_noiseless(const SourceModel& model, std::int64_t n, int ell,
                                     std::optional<double> mu) {
  DetectorConfig config;
  config.mu = mu;
  const double threshold = threshold_log_score(n, ell, config);
  int t_mdo = 0;
  for (int t = 1; t <= ell; ++t) {
    const double h_max = -model.min_block_log_prob_nats(static_cast<std::size_t>(t));
    if (h_max <= threshold)
      t_mdo = t;
    else
      break;  // the best-case score only grows with t
  }
  return t_mdo;
}

double min_detectable_overlap_noisy(double lambda_max, std::int64_t n, int ell,
                                    std::optional<double> mu) {
  if (!std::isfinite(lambda_max) || lambda_max <= 0.0)
    throw InvalidArgument("lambda_max must be positive and finite");
  DetectorConfig config;
  config.mu = mu;
  const double threshold = threshold_log_score(n, ell, config);
  if (lambda_max <= 1.0) return kPosInf;  // no score can ever grow
  return threshold / std::log(lambda_max);
}

double markov_exact_score(const Seq& read1, const Seq& read2, const MarkovKernel& kernel, int t) {
  if (read1.size() != read2.size() || read1.size() < 2)
    throw InvalidArgument("reads must share a length of at least 2");
  const int ell = static_cast<int>(read1.size());
  if (t < 1 || t > ell) throw InvalidArgument("overlap must lie in [1, ell]");
  const std::size_t k = kernel.size();
  for (Symbol s : read1)
    if (s >= k) throw InvalidArgument("read symbol outside the alphabet");
  for (Symbol s : read2)
    if (s >= k) throw InvalidArgument("read symbol outside the alphabet");

  for (int i = 0; i < t; ++i)
    if (read1[ell - t + i] != read2[i]) return kNegInf;

  double acc = 0.0;
  for (int i = t; i < ell; ++i) {
    const double step = kernel.log_prob(read2[i - 1], read2[i]);
    if (step == kNegInf) return kNegInf;
    acc += step;
  }
  return acc;
}

}  // namespace ovd
