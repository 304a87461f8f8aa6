// Stratified Monte Carlo engine: per-trial keyed generators, packed
// uniform-binary fast paths, Wilson intervals, and n-sweeps.
#include "ovd/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <thread>
#include <utility>

namespace ovd {
namespace {

constexpr double kEps = 1e-9;  // score-comparison band, shared with the detectors
constexpr int kMaxWords = 8;
constexpr int kMaxPackedBits = 64 * kMaxWords;
constexpr std::uint64_t kBlock = 8192;  // trials per work unit

// ---- packed bit strings (LSB-first within 64-bit words) ----

struct Bits {
  std::uint64_t w[kMaxWords] = {};
};

inline std::uint64_t low_mask(int nbits) {  // nbits in [1, 64]
  return nbits >= 64 ? ~0ULL : (1ULL << nbits) - 1;
}

// 64 bits of `b` starting at bit `pos` (bits past the storage read as 0).
inline std::uint64_t window64(const Bits& b, int pos) {
  const int q = pos >> 6, r = pos & 63;
  const std::uint64_t lo = q < kMaxWords ? b.w[q] : 0;
  if (r == 0) return lo;
  const std::uint64_t hi = q + 1 < kMaxWords ? b.w[q + 1] : 0;
  return (lo >> r) | (hi << (64 - r));
}

inline void bits_rand(Bits& b, int nbits, Philox& g) {
  b = Bits{};
  const int words = (nbits + 63) >> 6;
  for (int i = 0; i < words; ++i) b.w[i] = g.next_u64();
  b.w[words - 1] &= low_mask(nbits - 64 * (words - 1));
}

// Bits [start, start + len) of src, re-aligned to position 0.
inline Bits bits_extract(const Bits& src, int start, int len) {
  Bits d;
  for (int i = 0; i < len; i += 64) {
    const int chunk = std::min(64, len - i);
    d.w[i >> 6] = window64(src, start + i) & low_mask(chunk);
  }
  return d;
}

// dst |= src << shift, where src holds len bits.
inline void bits_or_shifted(Bits& dst, const Bits& src, int shift, int len) {
  const int q = shift >> 6, r = shift & 63;
  const int words = (len + 63) >> 6;
  for (int j = 0; j < words; ++j) {
    if (q + j < kMaxWords) dst.w[q + j] |= src.w[j] << r;
    if (r != 0 && q + j + 1 < kMaxWords) dst.w[q + j + 1] |= src.w[j] >> (64 - r);
  }
}

// Hamming distance between bits [astart, astart + len) of a and [0, len) of b.
inline int bits_mismatch(const Bits& a, int astart, const Bits& b, int len) {
  int mm = 0;
  for (int i = 0; i < len; i += 64) {
    const int chunk = std::min(64, len - i);
    const std::uint64_t x = (window64(a, astart + i) ^ b.w[i >> 6]) & low_mask(chunk);
    mm += std::popcount(x);
  }
  return mm;
}

inline Seq bits_to_seq(const Bits& b, int ell) {
  Seq s(static_cast<std::size_t>(ell));
  for (int i = 0; i < ell; ++i)
    s[static_cast<std::size_t>(i)] = static_cast<Symbol>((b.w[i >> 6] >> (i & 63)) & 1);
  return s;
}

inline Bits seq_to_bits(const Seq& s) {
  Bits b;
  for (std::size_t i = 0; i < s.size(); ++i)
    b.w[i >> 6] |= static_cast<std::uint64_t>(s[i] & 1) << (i & 63);
  return b;
}

// Source-window pair conditioned on the overlap t, uniform binary source.
// Index draws are skipped: for a memoryless source the conditional window law
// depends on (i1, i2) only through t.
inline void packed_source_pair(int ell, int t, Philox& g, Bits& x1, Bits& x2) {
  if (t == 0) {
    bits_rand(x1, ell, g);
    bits_rand(x2, ell, g);
  } else if (t > 0) {
    bits_rand(x1, ell, g);
    x2 = bits_extract(x1, ell - t, t);
    if (t < ell) {
      Bits f;
      bits_rand(f, ell - t, g);
      bits_or_shifted(x2, f, t, ell - t);
    }
  } else {
    const int tau = -t;
    bits_rand(x2, ell, g);
    x1 = bits_extract(x2, ell - tau, tau);
    Bits f;
    bits_rand(f, ell - tau, g);
    bits_or_shifted(x1, f, tau, ell - tau);
  }
}

// Independent per-bit flips with probability flip32 / 2^32.
inline void apply_flips(Bits& x, int nbits, std::uint32_t flip32, Philox& g) {
  for (int i = 0; i < nbits; i += 64) {
    const int chunk = std::min(64, nbits - i);
    std::uint64_t m = 0;
    for (int j = 0; j < chunk; ++j)
      m |= static_cast<std::uint64_t>(g.next_u32() < flip32) << j;
    x.w[i >> 6] ^= m;
  }
}

// Noiseless uniform-binary decision: the longest suffix/prefix match on each
// side carries the maximal score t * ln 2, so only those two hypotheses and
// the threshold can sit inside the comparison band.
inline int packed_noiseless_decide(const Bits& r1, const Bits& r2, int ell, double threshold_log,
                                   int cutoff, bool positive_only) {
  const double unit = -std::log(0.5);
  const int lo = std::max(1, cutoff);
  int tp = 0;
  for (int t = ell; t >= lo; --t)
    if (bits_mismatch(r1, ell - t, r2, t) == 0) {
      tp = t;
      break;
    }
  int tm = 0;
  if (!positive_only)
    for (int t = ell - 1; t >= lo; --t)
      if (bits_mismatch(r2, ell - t, r1, t) == 0) {
        tm = t;
        break;
      }
  const double sp = tp > 0 ? tp * unit : kNegInf;
  const double sm = tm > 0 ? tm * unit : kNegInf;
  double best = threshold_log;
  if (sp > best) best = sp;
  if (sm > best) best = sm;
  if (threshold_log >= best - kEps) return 0;
  const bool in_p = tp > 0 && sp >= best - kEps;
  const bool in_m = tm > 0 && sm >= best - kEps;
  if (in_p && in_m) return tp <= tm ? tp : -tm;  // smaller |t| first, + on ties
  return in_p ? tp : -tm;
}

// Noisy symmetric-binary decision: score(t) = (t - mm) ln lambda_match +
// mm ln lambda_mismatch from the Hamming distance of the aligned region.
inline int packed_noisy_decide(const Bits& r1, const Bits& r2, int ell, double llm, double llx,
                               double threshold_log, int cutoff, bool positive_only) {
  double sp[kMaxPackedBits + 1];
  double sm[kMaxPackedBits];
  const int lo = std::max(1, cutoff);
  double best = threshold_log;
  for (int t = lo; t <= ell; ++t) {
    const int mm = bits_mismatch(r1, ell - t, r2, t);
    const double s = (t - mm) * llm + mm * llx;
    sp[t] = s;
    if (s > best) best = s;
  }
  if (!positive_only)
    for (int t = lo; t <= ell - 1; ++t) {
      const int mm = bits_mismatch(r2, ell - t, r1, t);
      const double s = (t - mm) * llm + mm * llx;
      sm[t] = s;
      if (s > best) best = s;
    }
  if (threshold_log >= best - kEps) return 0;
  for (int mag = lo; mag <= ell; ++mag) {
    if (sp[mag] >= best - kEps) return mag;
    if (!positive_only && mag <= ell - 1 && sm[mag] >= best - kEps) return -mag;
  }
  OVD_CHECK(false, "argmax failed to locate the maximal score");
  return 0;
}

enum class Engine { Generic, PackedNoiseless, PackedNoisy };

struct TrialContext {
  const ExperimentConfig* cfg = nullptr;
  std::int64_t n = 0;
  int ell = 0;
  Engine engine = Engine::Generic;
  bool noiseless = true;
  const PairStats* stats = nullptr;
  double threshold_log = 0.0;
  int cutoff = 0;
  bool positive_only = false;
  double llm = 0.0, llx = 0.0;  // packed noisy per-pair log-lambdas
  std::uint32_t flip32 = 0;
};

Engine select_engine(const ExperimentConfig& cfg, int ell, bool noiseless,
                     const PairStats* stats) {
  if (cfg.force_generic) return Engine::Generic;
  if (!cfg.model.is_memoryless() || cfg.model.alphabet_size() != 2) return Engine::Generic;
  if (ell > kMaxPackedBits) return Engine::Generic;
  if (std::abs(cfg.model.pmf().prob(0) - 0.5) > 1e-15) return Engine::Generic;
  if (noiseless) return Engine::PackedNoiseless;
  if (stats->out_alphabet != 2) return Engine::Generic;
  if (!stats->on(0, 0) || !stats->on(0, 1) || !stats->on(1, 0) || !stats->on(1, 1))
    return Engine::Generic;
  if (std::abs(stats->lam(0, 0) - stats->lam(1, 1)) > 1e-12 ||
      std::abs(stats->lam(0, 1) - stats->lam(1, 0)) > 1e-12)
    return Engine::Generic;
  const double e0 = cfg.channel.prob(0, 1), e1 = cfg.channel.prob(1, 0);
  if (std::abs(e0 - e1) > 1e-15 || e0 <= 0.0 || e0 >= 1.0) return Engine::Generic;
  return Engine::PackedNoisy;
}

bool trial_is_error(const TrialContext& c, int t, std::uint64_t key) {
  Philox g(key, 0);
  switch (c.engine) {
    case Engine::PackedNoiseless: {
      Bits r1, r2;
      packed_source_pair(c.ell, t, g, r1, r2);
      return packed_noiseless_decide(r1, r2, c.ell, c.threshold_log, c.cutoff,
                                     c.positive_only) != t;
    }
    case Engine::PackedNoisy: {
      Bits r1, r2;
      if (t == 0) {
        // Disjoint windows through a symmetric channel: the reads are
        // independent and marginally uniform.
        bits_rand(r1, c.ell, g);
        bits_rand(r2, c.ell, g);
      } else {
        packed_source_pair(c.ell, t, g, r1, r2);
        apply_flips(r1, c.ell, c.flip32, g);
        apply_flips(r2, c.ell, c.flip32, g);
      }
      return packed_noisy_decide(r1, r2, c.ell, c.llm, c.llx, c.threshold_log, c.cutoff,
                                 c.positive_only) != t;
    }
    case Engine::Generic:
    default: {
      const ReadPair rp = sample_pair_given_t(c.cfg->model, c.cfg->channel, c.n, c.ell, t, g);
      const Decision d = c.noiseless ? detect_noiseless(rp.read1, rp.read2, c.cfg->model, c.n,
                                                        c.cfg->detector)
                                     : detect_noisy(rp.read1, rp.read2, *c.stats, c.n,
                                                    c.cfg->detector);
      return d.t_hat != t;
    }
  }
}

std::uint64_t run_trials(const TrialContext& c, int t, std::uint64_t trials, int threads) {
  const auto t_u = static_cast<std::uint64_t>(static_cast<std::int64_t>(t));
  const auto n_u = static_cast<std::uint64_t>(c.n);
  const std::uint64_t master = c.cfg->seed;
  auto block_count = [&](std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t e = 0;
    for (std::uint64_t i = lo; i < hi; ++i)
      e += trial_is_error(c, t, derive_key(master, n_u, t_u, i)) ? 1 : 0;
    return e;
  };
  if (threads <= 1 || trials <= kBlock) return block_count(0, trials);

  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> total{0};
  std::mutex err_mtx;
  std::exception_ptr err;
  auto worker = [&] {
    try {
      for (;;) {
        const std::uint64_t lo = next.fetch_add(1) * kBlock;
        if (lo >= trials) return;
        total.fetch_add(block_count(lo, std::min(trials, lo + kBlock)));
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(err_mtx);
      if (!err) err = std::current_exception();
      next.store(trials / kBlock + 1);  // stop the other workers
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return total.load();
}

int resolve_threads(const ExperimentConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Threshold score for t = 0; matches the detectors' formula exactly.
double threshold_for(const ExperimentConfig& cfg, std::int64_t n, std::int64_t n_ell) {
  if (cfg.detector.mu) {
    if (!std::isfinite(*cfg.detector.mu) || *cfg.detector.mu <= 0.0)
      throw InvalidArgument("threshold exponent must be positive");
    return *cfg.detector.mu * std::log(static_cast<double>(n));
  }
  return std::log(static_cast<double>(n_ell));
}

double information_rate(const ExperimentConfig& cfg) {  // base-|X|
  if (cfg.channel.is_identity()) return cfg.model.entropy_rate();
  return pair_statistics(cfg.model, cfg.channel).mutual_info;
}

}  // namespace

ExperimentConfig::ExperimentConfig(SourceModel m, Channel c)
    : model(std::move(m)), channel(std::move(c)) {}

int ExperimentConfig::ell_for(std::int64_t n) const {
  if (n < 4) throw InvalidArgument("sequence length n must be at least 4");
  const double k = static_cast<double>(model.alphabet_size());
  const double v = beta * std::log(static_cast<double>(n)) / std::log(k);
  // Guard against 60.0000000000001-style float noise on exact integers.
  const int ell = static_cast<int>(std::ceil(v - 1e-9));
  return std::max(2, ell);
}

void ExperimentConfig::validate() const {
  if (!std::isfinite(beta) || beta <= 0.0) throw InvalidArgument("beta must be positive");
  if (n_grid.empty()) throw InvalidArgument("n_grid must be nonempty");
  if (trials_per_stratum < 100 || trials_t0 < 100)
    throw InvalidArgument("at least 100 trials per stratum are required");
  if (threads < 0) throw InvalidArgument("threads must be nonnegative");
  if (channel.in_size() != model.alphabet_size())
    throw InvalidArgument("channel input alphabet must match the source alphabet");
  for (const std::int64_t n : n_grid) {
    const int ell = ell_for(n);
    const OverlapPrior prior(n, ell);  // validates n >= 2 ell
    (void)prior;
  }
}

void wilson_interval(std::uint64_t errors, std::uint64_t trials, double& lo, double& hi) {
  if (trials == 0) throw InvalidArgument("Wilson interval needs at least one trial");
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double m = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / m;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / m;
  const double center = (p + z2 / (2.0 * m)) / denom;
  const double half = (z / denom) * std::sqrt(p * (1.0 - p) / m + z2 / (4.0 * m * m));
  lo = std::max(0.0, center - half);
  hi = std::min(1.0, center + half);
}

StratumEstimate estimate_stratum(const ExperimentConfig& config, std::int64_t n, int t) {
  const int ell = config.ell_for(n);
  const OverlapPrior prior(n, ell);
  if (!prior.in_support(t)) throw InvalidArgument("stratum overlap outside the prior support");
  if (config.one_sided && t < 0)
    throw InvalidArgument("negative stratum requested in one-sided mode");
  const std::uint64_t trials = t == 0 ? config.trials_t0 : config.trials_per_stratum;
  if (trials < 100) throw InvalidArgument("at least 100 trials per stratum are required");
  if (config.channel.in_size() != config.model.alphabet_size())
    throw InvalidArgument("channel input alphabet must match the source alphabet");

  int cutoff = 0;
  if (config.detector.truncation_cutoff) {
    cutoff = *config.detector.truncation_cutoff;
    if (cutoff < 0 || cutoff > ell)
      throw InvalidArgument("truncation cutoff must lie in [0, ell]");
  }

  TrialContext ctx;
  ctx.cfg = &config;
  ctx.n = n;
  ctx.ell = ell;
  ctx.noiseless = config.channel.is_identity();
  ctx.threshold_log = threshold_for(config, n, prior.n_ell);
  ctx.cutoff = cutoff;
  ctx.positive_only = config.one_sided || config.detector.positive_only;

  PairStats stats;
  if (!ctx.noiseless) {
    stats = pair_statistics(config.model, config.channel);
    ctx.stats = &stats;
  }
  ctx.engine = select_engine(config, ell, ctx.noiseless, ctx.stats);
  if (ctx.engine == Engine::PackedNoisy) {
    ctx.llm = std::log(stats.lam(0, 0));
    ctx.llx = std::log(stats.lam(0, 1));
    const double e = config.channel.prob(0, 1);
    ctx.flip32 = static_cast<std::uint32_t>(
        std::min(std::llround(e * 4294967296.0), 4294967295LL));
  }

  // The generic detectors read positive_only from the config they receive;
  // one-sided mode must reach them through a patched copy.
  ExperimentConfig patched = config;
  if (ctx.positive_only && !config.detector.positive_only) {
    patched.detector.positive_only = true;
    ctx.cfg = &patched;
  }

  StratumEstimate est;
  est.t = t;
  est.trials = trials;
  est.errors = run_trials(ctx, t, trials, resolve_threads(config));
  est.estimate = static_cast<double>(est.errors) / static_cast<double>(est.trials);
  wilson_interval(est.errors, est.trials, est.ci_lo, est.ci_hi);
  return est;
}

ExperimentRecord run_single(const ExperimentConfig& config, std::int64_t n) {
  const int ell = config.ell_for(n);
  const OverlapPrior prior(n, ell);

  ExperimentRecord rec;
  rec.n = n;
  rec.ell = ell;
  rec.p1 = estimate_stratum(config, n, 0);

  NeumaierSum p_error;
  p_error.add(prior.prob(0) * rec.p1.estimate);
  const int t_lo = config.one_sided ? 1 : -(ell - 1);
  for (int t = t_lo; t <= ell; ++t) {
    if (t == 0) continue;
    StratumEstimate s = estimate_stratum(config, n, t);
    p_error.add(prior.prob(t) * s.estimate);
    rec.p2.push_back(std::move(s));
  }
  rec.p_error_hat = p_error.value();

  const double log_n = std::log(static_cast<double>(n));
  const double log_k = std::log(static_cast<double>(config.model.alphabet_size()));
  rec.phi_hat = rec.p_error_hat * static_cast<double>(n) / (log_n / log_k);
  rec.phi_hat_nats = rec.p_error_hat * static_cast<double>(n) / log_n;
  rec.theory_phi = theory_phi(config);
  rec.t_star = theory_t_star(config, n);
  if (config.channel.is_identity()) {
    rec.t_mdo = static_cast<double>(
        min_detectable_overlap_noiseless(config.model, n, ell, config.detector.mu));
  } else {
    const PairStats stats = pair_statistics(config.model, config.channel);
    rec.t_mdo = min_detectable_overlap_noisy(stats.lambda_max, n, ell, config.detector.mu);
  }
  return rec;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.records.reserve(config.n_grid.size());
  for (const std::int64_t n : config.n_grid) report.records.push_back(run_single(config, n));
  return report;
}

double theory_phi(const ExperimentConfig& config) {
  const double rate = information_rate(config);
  const double inv = rate > 0.0 ? 1.0 / rate : kPosInf;
  const double phi = 2.0 * std::min(config.beta, inv);
  return config.one_sided ? 0.5 * phi : phi;
}

double theory_t_star(const ExperimentConfig& config, std::int64_t n) {
  const double rate = information_rate(config);
  if (rate <= 0.0) return kPosInf;
  const double log_k = std::log(static_cast<double>(config.model.alphabet_size()));
  return std::log(static_cast<double>(n)) / log_k / rate;
}

SweepResult sweep(const ExperimentConfig& config) {
  config.validate();
  if (config.n_grid.size() < 3)
    throw InvalidArgument("a sweep requires at least 3 grid points");
  for (std::size_t i = 1; i < config.n_grid.size(); ++i)
    if (config.n_grid[i] <= config.n_grid[i - 1])
      throw InvalidArgument("n_grid must be strictly increasing for a sweep");

  SweepResult result;
  result.report = run_experiment(config);
  const std::vector<ExperimentRecord>& recs = result.report.records;
  const bool noiseless = config.channel.is_identity();
  const double log_k = std::log(static_cast<double>(config.model.alphabet_size()));
  const double theory = theory_phi(config);

  double max_linear = 0.0, max_sqrt = 0.0;
  for (const ExperimentRecord& r : recs) {
    const double log_kn = std::log(static_cast<double>(r.n)) / log_k;
    result.verdicts.phi_values.push_back(r.phi_hat);
    const double scaled = r.p1.estimate * static_cast<double>(r.n) / std::sqrt(log_kn);
    result.verdicts.type1_scaled.push_back(scaled);
    max_sqrt = std::max(max_sqrt, scaled);
    max_linear = std::max(max_linear, r.p1.estimate * static_cast<double>(r.n) / log_kn);
  }

  const double first = result.verdicts.phi_values.front();
  const double last = result.verdicts.phi_values.back();
  result.verdicts.phi_decreasing =
      first > last && std::abs(last - theory) <= std::abs(first - theory);

  if (noiseless) {
    result.verdicts.type1_bounded = max_linear < 0.5;
  } else {
    double bound = kPosInf;
    try {
      bound = 10.0 * type1_mgf_bound(pair_statistics(config.model, config.channel), 0.0);
    } catch (const BoundUndefined&) {
    }
    result.verdicts.type1_bounded = max_sqrt <= bound;
  }

  const ExperimentRecord& top = recs.back();
  bool profile = true;
  for (const StratumEstimate& s : top.p2) {
    const double mag = std::abs(static_cast<double>(s.t));
    if (mag <= 0.5 * top.t_star && s.estimate < 0.9) profile = false;
    if (mag >= 2.0 * top.t_star && s.estimate > 0.1) profile = false;
  }
  result.verdicts.profile_ok = profile;
  return result;
}

namespace detail {

void packed_sample_given_t(int ell, int t, Philox& g, Seq& read1, Seq& read2) {
  if (ell < 2 || ell > kMaxPackedBits) throw InvalidArgument("packed ell out of range");
  if (t < -(ell - 1) || t > ell) throw InvalidArgument("overlap outside the support");
  Bits x1, x2;
  packed_source_pair(ell, t, g, x1, x2);
  read1 = bits_to_seq(x1, ell);
  read2 = bits_to_seq(x2, ell);
}

int packed_detect_noiseless_uniform(const Seq& read1, const Seq& read2, double threshold_log,
                                    int cutoff, bool positive_only) {
  if (read1.size() != read2.size() || read1.size() < 2 || read1.size() > kMaxPackedBits)
    throw InvalidArgument("packed reads must share a length in [2, 512]");
  const int ell = static_cast<int>(read1.size());
  return packed_noiseless_decide(seq_to_bits(read1), seq_to_bits(read2), ell, threshold_log,
                                 cutoff, positive_only);
}

int packed_detect_noisy_symmetric(const Seq& read1, const Seq& read2, double log_lam_match,
                                  double log_lam_mis, double threshold_log, int cutoff,
                                  bool positive_only) {
  if (read1.size() != read2.size() || read1.size() < 2 || read1.size() > kMaxPackedBits)
    throw InvalidArgument("packed reads must share a length in [2, 512]");
  const int ell = static_cast<int>(read1.size());
  return packed_noisy_decide(seq_to_bits(read1), seq_to_bits(read2), ell, log_lam_match,
                             log_lam_mis, threshold_log, cutoff, positive_only);
}

}  // namespace detail

}  // namespace ovd
