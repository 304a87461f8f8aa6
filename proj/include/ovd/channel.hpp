// Memoryless reading channel and the induced statistics of an output pair
// (Y, Ytilde) that reads the same source symbol twice independently.
#pragma once

#include <cstddef>
#include <vector>

#include "ovd/common.hpp"
#include "ovd/rng.hpp"
#include "ovd/source_model.hpp"

namespace ovd {

class Channel {
 public:
  // rows[x][y] = P(Y = y | X = x); every row must be a pmf, |Y| >= 1.
  explicit Channel(std::vector<std::vector<double>> rows);

  static Channel identity(std::size_t k);
  static Channel binary_symmetric(double flip_prob);

  std::size_t in_size() const { return in_; }
  std::size_t out_size() const { return out_; }
  double prob(Symbol x, Symbol y) const { return rows_[x * out_ + y]; }
  bool is_identity() const;

  // Independent per-symbol noise; deterministic per generator state.
  Seq apply(const Seq& x, Philox& g) const;
  Symbol apply_symbol(Symbol x, Philox& g) const;

 private:
  std::size_t in_ = 0, out_ = 0;
  std::vector<double> rows_;
  std::vector<std::vector<double>> cum_;       // per-row support cumulative
  std::vector<std::vector<Symbol>> support_;   // per-row support symbols
};

// Joint law of one noisy read pair over the same source symbol, plus the
// likelihood-ratio table lambda(y, yt) = P_YY(y, yt) / (P_Y(y) P_Y(yt)) and
// the moments of ln lambda used by the analysis.  Entries with
// P_YY(y, yt) = 0 are off-support: lambda is stored as 0 there and flagged,
// never as an IEEE 0/inf from a division.
struct PairStats {
  std::size_t source_alphabet = 0;  // |X|; the log base for reported units
  std::size_t out_alphabet = 0;     // |Y|
  std::vector<double> p_y;          // |Y|
  std::vector<double> p_yy;         // |Y| x |Y|, row-major, symmetric
  std::vector<double> lambda;       // |Y| x |Y|; 0 on off-support entries
  std::vector<std::uint8_t> on_support;
  double lambda_min = 0.0;  // over support
  double lambda_max = 0.0;  // over support
  double mutual_info = 0.0;       // I(Y; Ytilde), base-|X|
  double mutual_info_nats = 0.0;
  double sigma2 = 0.0;  // Var[ln lambda] under p_yy, nats^2
  double m3 = 0.0;      // E|ln lambda - E ln lambda|^3 under p_yy, nats^3

  bool on(std::size_t y, std::size_t yt) const { return on_support[y * out_alphabet + yt] != 0; }
  double lam(std::size_t y, std::size_t yt) const { return lambda[y * out_alphabet + yt]; }
};

// Pair statistics for the model's stationary symbol law pushed through the
// channel twice with independent noise.
PairStats pair_statistics(const SourceModel& model, const Channel& channel);

// Renyi divergence D_nu(p || q) of order nu >= 0, nu != 1 via the power sum,
// nu = 1 as Kullback-Leibler; reported in base-|p| units.  Requires p << q.
double renyi_divergence(const std::vector<double>& p, const std::vector<double>& q, double nu);

// D_nu(P_YY || P_Y x P_Y) in nats, shared by the exponent computations.
double pair_renyi_divergence_nats(const PairStats& stats, double nu);

// Large-deviation exponents of the pairwise score sums.
struct ChernoffExponents {
  LogValue e_minus_0;       // decay of P[sum of ln lambda over a true overlap <= 0]
  bool e_minus_0_infinite = false;  // lambda_min > 1: the event is impossible
  LogValue e_plus;          // decay of P[sum of ln lambda over independent reads > 0]
  LogValue e_minus_t1;      // E_-^{(t)}(1): undershoot of the threshold log(n_ell)
};

// n_ell > 0 and t >= 1 parameterize e_minus_t1.  Throws ExponentUndefined
// when the channel carries no information (mutual_info == 0).
ChernoffExponents chernoff_exponents(const PairStats& stats, double n_ell, int t);

// Smallest theta such that A(theta) >= eps, where
// A(theta) = sup_{nu <= 1} (nu - 1)(1 - theta D_nu(P_YY || P_Y x P_Y)); the
// supremum is attained on nu in [0, 1].  Base-|X| units; theta_star -> 1/I as
// eps -> 0.  Requires 0 < eps < 1.
double theta_star(const PairStats& stats, double eps);

// Truncated-MGF tail constant: 2 (ln2/sqrt(2 pi) + 12 m3 / sigma2) / sigma *
// exp(-a).  Throws BoundUndefined when sigma2 == 0.
double type1_mgf_bound(const PairStats& stats, double a);

}  // namespace ovd
