// Channel validation/sampling and the pairwise-score analysis toolkit.
#include "ovd/channel.hpp"

#include <algorithm>
#include <cmath>

namespace ovd {
namespace {

constexpr double kSupportTol = 0.0;  // exact zero marks off-support

// Golden-section minimizer for a convex function on [lo, hi].
template <typename F>
double golden_min(F&& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// f(nu) = ln sum over supp(p_yy) of p_yy^nu (p_y p_yt)^(1-nu), in nats.
double tilt_log_sum(const PairStats& s, double nu) {
  NeumaierSum acc;
  const std::size_t m = s.out_alphabet;
  for (std::size_t y = 0; y < m; ++y) {
    for (std::size_t yt = 0; yt < m; ++yt) {
      if (!s.on(y, yt)) continue;
      const double p = s.p_yy[y * m + yt];
      const double q = s.p_y[y] * s.p_y[yt];
      acc.add(std::exp(nu * std::log(p) + (1.0 - nu) * std::log(q)));
    }
  }
  return std::log(acc.value());
}

}  // namespace

Channel::Channel(std::vector<std::vector<double>> rows) {
  in_ = rows.size();
  if (in_ < 2 || in_ > 8) throw ModelInvalid("channel input alphabet size must be in [2, 8]");
  out_ = rows[0].size();
  if (out_ < 2 || out_ > 8) throw ModelInvalid("channel output alphabet size must be in [2, 8]");
  rows_.assign(in_ * out_, 0.0);
  cum_.resize(in_);
  support_.resize(in_);
  for (std::size_t x = 0; x < in_; ++x) {
    if (rows[x].size() != out_) throw ModelInvalid("channel rows must have equal length");
    NeumaierSum sum;
    for (std::size_t y = 0; y < out_; ++y) {
      const double p = rows[x][y];
      if (!std::isfinite(p) || p < 0.0) throw ModelInvalid("channel entries must be finite and non-negative");
      rows_[x * out_ + y] = p;
      sum.add(p);
    }
    if (std::abs(sum.value() - 1.0) > 1e-12) throw ModelInvalid("channel rows must sum to 1");
    double c = 0.0;
    for (std::size_t y = 0; y < out_; ++y) {
      if (rows_[x * out_ + y] > kSupportTol) {
        c += rows_[x * out_ + y];
        cum_[x].push_back(c);
        support_[x].push_back(static_cast<Symbol>(y));
      }
    }
    if (support_[x].empty()) throw ModelInvalid("channel rows must have non-empty support");
    cum_[x].back() = 1.0;
  }
}

Channel Channel::identity(std::size_t k) {
  std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.0));
  for (std::size_t x = 0; x < k; ++x) rows[x][x] = 1.0;
  return Channel(std::move(rows));
}

Channel Channel::binary_symmetric(double flip_prob) {
  if (!std::isfinite(flip_prob) || flip_prob < 0.0 || flip_prob > 1.0)
    throw ModelInvalid("flip probability must lie in [0, 1]");
  return Channel({{1.0 - flip_prob, flip_prob}, {flip_prob, 1.0 - flip_prob}});
}

bool Channel::is_identity() const {
  if (in_ != out_) return false;
  for (std::size_t x = 0; x < in_; ++x)
    for (std::size_t y = 0; y < out_; ++y)
      if (rows_[x * out_ + y] != (x == y ? 1.0 : 0.0)) return false;
  return true;
}

Symbol Channel::apply_symbol(Symbol x, Philox& g) const {
  if (x >= in_) throw InvalidArgument("channel input symbol out of alphabet");
  const auto& cum = cum_[x];
  const auto& sup = support_[x];
  if (sup.size() == 1) return sup[0];
  const double u = g.next_double();
  for (std::size_t i = 0; i + 1 < cum.size(); ++i)
    if (u < cum[i]) return sup[i];
  return sup.back();
}

Seq Channel::apply(const Seq& x, Philox& g) const {
  Seq y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = apply_symbol(x[i], g);
  return y;
}

PairStats pair_statistics(const SourceModel& model, const Channel& channel) {
  const std::size_t k = model.alphabet_size();
  if (channel.in_size() != k) throw InvalidArgument("channel input alphabet must match the source alphabet");
  const std::size_t m = channel.out_size();
  const std::vector<double> px = model.stationary_distribution();

  PairStats s;
  s.source_alphabet = k;
  s.out_alphabet = m;
  s.p_y.assign(m, 0.0);
  s.p_yy.assign(m * m, 0.0);
  s.lambda.assign(m * m, 0.0);
  s.on_support.assign(m * m, 0);

  for (std::size_t y = 0; y < m; ++y) {
    NeumaierSum acc;
    for (std::size_t x = 0; x < k; ++x) acc.add(px[x] * channel.prob(static_cast<Symbol>(x), static_cast<Symbol>(y)));
    s.p_y[y] = acc.value();
  }
  for (std::size_t y = 0; y < m; ++y) {
    for (std::size_t yt = 0; yt < m; ++yt) {
      NeumaierSum acc;
      for (std::size_t x = 0; x < k; ++x)
        acc.add(px[x] * channel.prob(static_cast<Symbol>(x), static_cast<Symbol>(y)) *
                channel.prob(static_cast<Symbol>(x), static_cast<Symbol>(yt)));
      s.p_yy[y * m + yt] = acc.value();
    }
  }

  s.lambda_min = kPosInf;
  s.lambda_max = -kPosInf;
  NeumaierSum info, moment2, moment3_hold;  // moment3 needs the mean first
  for (std::size_t y = 0; y < m; ++y) {
    for (std::size_t yt = 0; yt < m; ++yt) {
      const double p = s.p_yy[y * m + yt];
      if (p <= 0.0) continue;
      const double q = s.p_y[y] * s.p_y[yt];
      const double lam = p / q;
      s.lambda[y * m + yt] = lam;
      s.on_support[y * m + yt] = 1;
      s.lambda_min = std::min(s.lambda_min, lam);
      s.lambda_max = std::max(s.lambda_max, lam);
      info.add(p * std::log(lam));
    }
  }
  s.mutual_info_nats = info.value();
  if (std::abs(s.mutual_info_nats) < 1e-14) s.mutual_info_nats = 0.0;
  s.mutual_info = s.mutual_info_nats / std::log(static_cast<double>(k));
  for (std::size_t y = 0; y < m; ++y) {
    for (std::size_t yt = 0; yt < m; ++yt) {
      const double p = s.p_yy[y * m + yt];
      if (p <= 0.0) continue;
      const double dev = std::log(s.lambda[y * m + yt]) - s.mutual_info_nats;
      moment2.add(p * dev * dev);
      moment3_hold.add(p * std::abs(dev) * dev * dev);
    }
  }
  s.sigma2 = moment2.value();
  if (s.sigma2 < 0.0) s.sigma2 = 0.0;
  s.m3 = moment3_hold.value();
  return s;
}

double renyi_divergence(const std::vector<double>& p, const std::vector<double>& q, double nu) {
  if (p.size() != q.size() || p.size() < 2) throw InvalidArgument("distributions must share a size of at least 2");
  if (!std::isfinite(nu) || nu < 0.0) throw InvalidArgument("order must be finite and non-negative");
  auto validate = [](const std::vector<double>& d) {
    NeumaierSum sum;
    for (double v : d) {
      if (!std::isfinite(v) || v < 0.0) throw ModelInvalid("distribution entries must be finite and non-negative");
      sum.add(v);
    }
    if (std::abs(sum.value() - 1.0) > 1e-12) throw ModelInvalid("distribution must sum to 1");
  };
  validate(p);
  validate(q);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0 && q[i] == 0.0)
      throw DivergenceUndefined("p is not absolutely continuous with respect to q");

  const double log_base = std::log(static_cast<double>(p.size()));
  double nats;
  if (std::abs(nu - 1.0) < 1e-12) {
    NeumaierSum acc;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) acc.add(p[i] * std::log(p[i] / q[i]));
    nats = acc.value();
  } else {
    NeumaierSum acc;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (p[i] > 0.0) acc.add(std::exp(nu * std::log(p[i]) + (1.0 - nu) * std::log(q[i])));
    nats = std::log(acc.value()) / (nu - 1.0);
  }
  if (nats < 0.0 && nats > -1e-12) nats = 0.0;
  return nats / log_base;
}

double pair_renyi_divergence_nats(const PairStats& stats, double nu) {
  if (!std::isfinite(nu) || nu < 0.0) throw InvalidArgument("order must be finite and non-negative");
  if (std::abs(nu - 1.0) < 1e-12) return stats.mutual_info_nats;
  return tilt_log_sum(stats, nu) / (nu - 1.0);
}

ChernoffExponents chernoff_exponents(const PairStats& stats, double n_ell, int t) {
  OVD_CHECK(std::isfinite(n_ell) && n_ell > 0.0, "n_ell must be positive");
  OVD_CHECK(t >= 1, "overlap length must be at least 1");
  if (stats.mutual_info_nats <= 0.0)
    throw ExponentUndefined("score exponents are undefined for a channel with zero pairwise information");

  const double log_k = std::log(static_cast<double>(stats.source_alphabet));
  auto f = [&stats](double nu) { return tilt_log_sum(stats, nu); };

  ChernoffExponents out;
  const double nu_star = golden_min(f, 0.0, 1.0);
  const double chernoff_nats = -f(nu_star);
  out.e_plus = make_log_value(chernoff_nats, stats.source_alphabet);
  if (stats.lambda_min > 1.0) {
    // Every score increment is strictly positive: a true overlap can never
    // score at or below zero, so the undershoot exponent is infinite.
    out.e_minus_0_infinite = true;
    out.e_minus_0 = make_log_value(kPosInf, stats.source_alphabet);
  } else {
    out.e_minus_0 = make_log_value(chernoff_nats, stats.source_alphabet);
  }

  const double a_over_t = std::log(n_ell) / static_cast<double>(t);
  auto neg_obj = [&](double nu) { return -((nu - 1.0) * a_over_t - f(nu)); };
  const double nu_t = golden_min(neg_obj, 0.0, 1.0);
  double e_t1 = std::max(0.0, -neg_obj(nu_t));
  const double ends = std::max(-neg_obj(0.0), -neg_obj(1.0));
  e_t1 = std::max(e_t1, ends);
  out.e_minus_t1 = make_log_value(e_t1, stats.source_alphabet);
  (void)log_k;
  return out;
}

double theta_star(const PairStats& stats, double eps) {
  OVD_CHECK(std::isfinite(eps) && eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  if (stats.mutual_info_nats <= 0.0)
    throw ExponentUndefined("the threshold-scan scale is undefined for a channel with zero pairwise information");

  // theta* = min over nu in [0, 1) of (1 - nu + eps) / ((1 - nu) D_nu),
  // with D_nu the pairwise Renyi divergence in nats; reported in base-|X|
  // units, i.e. multiplied by ln |X|.
  auto objective = [&](double nu) {
    const double d = pair_renyi_divergence_nats(stats, nu);
    if (d <= 0.0) return kPosInf;
    return (1.0 - nu + eps) / ((1.0 - nu) * d);
  };

  const int grid = 4000;
  double best = kPosInf;
  int best_i = 0;
  for (int i = 0; i <= grid; ++i) {
    const double nu = (static_cast<double>(i) / grid) * (1.0 - 1e-9);
    const double v = objective(nu);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  const double lo = (static_cast<double>(std::max(0, best_i - 1)) / grid) * (1.0 - 1e-9);
  const double hi = (static_cast<double>(std::min(grid, best_i + 1)) / grid) * (1.0 - 1e-9);
  const double nu_ref = golden_min(objective, lo, hi);
  best = std::min(best, objective(nu_ref));
  return best * std::log(static_cast<double>(stats.source_alphabet));
}

double type1_mgf_bound(const PairStats& stats, double a) {
  OVD_CHECK(std::isfinite(a), "the shift must be finite");
  if (stats.sigma2 <= 0.0)
    throw BoundUndefined("the truncated-moment bound requires a non-degenerate score variance");
  const double sigma = std::sqrt(stats.sigma2);
  const double c = 2.0 * (std::log(2.0) / std::sqrt(2.0 * kPi) + 12.0 * stats.m3 / stats.sigma2) / sigma;
  return c * std::exp(-a);
}

}  // namespace ovd
