#include "ovd/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "ovd/pmf.hpp"

namespace ovd {

Matrix mat_mul(const Matrix& a, const Matrix& b, std::size_t k) {
  Matrix c(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t m = 0; m < k; ++m) {
      double aim = a[i * k + m];
      if (aim == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j) c[i * k + j] += aim * b[m * k + j];
    }
  return c;
}

Matrix mat_power(const Matrix& m, std::uint64_t s, std::size_t k) {
  Matrix result(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) result[i * k + i] = 1.0;
  Matrix base = m;
  while (s > 0) {
    if (s & 1) result = mat_mul(result, base, k);
    base = mat_mul(base, base, k);
    s >>= 1;
  }
  return result;
}

namespace {

// Strong connectivity of the support digraph via forward/backward reach.
bool strongly_connected(const Matrix& kernel, std::size_t k) {
  auto reach = [&](bool transpose) {
    std::vector<bool> seen(k, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t v = 0; v < k; ++v) {
        double p = transpose ? kernel[v * k + u] : kernel[u * k + v];
        if (p > 0.0 && !seen[v]) {
          seen[v] = true;
          q.push(v);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };
  return reach(false) && reach(true);
}

// Period of a strongly connected digraph: gcd of (d[u] + 1 - d[v]) over all
// support edges u -> v, with d a BFS distance from node 0.
int graph_period(const Matrix& kernel, std::size_t k) {
  std::vector<int> d(k, -1);
  std::queue<std::size_t> q;
  q.push(0);
  d[0] = 0;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (std::size_t v = 0; v < k; ++v)
      if (kernel[u * k + v] > 0.0 && d[v] < 0) {
        d[v] = d[u] + 1;
        q.push(v);
      }
  }
  int g = 0;
  for (std::size_t u = 0; u < k; ++u)
    for (std::size_t v = 0; v < k; ++v)
      if (kernel[u * k + v] > 0.0) g = std::gcd(g, std::abs(d[u] + 1 - d[v]));
  return g == 0 ? 1 : g;
}

}  // namespace

MarkovKernel::MarkovKernel(std::vector<std::vector<double>> rows) {
  k_ = rows.size();
  if (k_ < 2 || k_ > 8) throw ModelInvalid("markov kernel: alphabet size must be in [2, 8]");
  kernel_.resize(k_ * k_);
  for (std::size_t i = 0; i < k_; ++i) {
    if (rows[i].size() != k_) throw ModelInvalid("markov kernel: rows must form a square matrix");
    Pmf row(rows[i]);  // validates non-negativity / normalization
    for (std::size_t j = 0; j < k_; ++j) kernel_[i * k_ + j] = rows[i][j];
  }
  if (!strongly_connected(kernel_, k_))
    throw ModelInvalid("markov kernel: reducible (support digraph not strongly connected)");
  if (graph_period(kernel_, k_) != 1) throw ModelInvalid("markov kernel: periodic");

  // Stationary distribution by dense power iteration to 1e-12.
  pi_.assign(k_, 1.0 / static_cast<double>(k_));
  std::vector<double> next(k_);
  for (int iter = 0; iter < 1000000; ++iter) {
    for (std::size_t j = 0; j < k_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < k_; ++i) s += pi_[i] * kernel_[i * k_ + j];
      next[j] = s;
    }
    double total = std::accumulate(next.begin(), next.end(), 0.0);
    double delta = 0.0;
    for (std::size_t j = 0; j < k_; ++j) {
      next[j] /= total;
      delta = std::max(delta, std::abs(next[j] - pi_[j]));
    }
    pi_.swap(next);
    if (delta <= 1e-12) break;
  }
  double residual = 0.0;
  for (std::size_t j = 0; j < k_; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < k_; ++i) s += pi_[i] * kernel_[i * k_ + j];
    residual = std::max(residual, std::abs(s - pi_[j]));
  }
  if (residual > 1e-10)
    throw ModelInvalid("markov kernel: stationary distribution residual exceeds 1e-10");
}

double MarkovKernel::log_prob(Symbol from, Symbol to) const {
  if (from >= k_ || to >= k_) throw InvalidArgument("markov kernel: symbol outside alphabet");
  double p = kernel_[from * k_ + to];
  return p > 0.0 ? std::log(p) : kNegInf;
}

Symbol MarkovKernel::sample_row(const double* row, Philox& g) const {
  double u = g.next_double();
  double run = 0.0;
  Symbol last = 0;
  bool have_last = false;
  for (std::size_t j = 0; j < k_; ++j) {
    if (row[j] <= 0.0) continue;
    run += row[j];
    last = static_cast<Symbol>(j);
    have_last = true;
    if (u < run) return last;
  }
  OVD_CHECK(have_last, "markov row with empty support");
  return last;
}

Symbol MarkovKernel::sample_start(Philox& g) const { return sample_row(pi_.data(), g); }

Symbol MarkovKernel::sample_step(Symbol from, Philox& g) const {
  return sample_row(kernel_.data() + from * k_, g);
}

Symbol MarkovKernel::sample_skip(Symbol from, std::uint64_t s, Philox& g) const {
  if (s == 0) return from;
  Matrix ks = power(s);
  return sample_row(ks.data() + from * k_, g);
}

std::optional<double> MarkovKernel::symmetric_epsilon() const {
  double eps = kernel_[1];  // entry (0, 1)
  double diag = kernel_[0];
  for (std::size_t i = 0; i < k_; ++i)
    for (std::size_t j = 0; j < k_; ++j) {
      double want = (i == j) ? diag : eps;
      if (std::abs(kernel_[i * k_ + j] - want) > 1e-14) return std::nullopt;
    }
  return eps;
}

double MarkovKernel::max_mean_cycle_neglog() const {
  // Karp's algorithm for the maximum mean cycle of w(x -> x') = -ln K(x, x')
  // restricted to support edges.  d[m][v] = maximum weight over walks of
  // exactly m edges from node 0 to v (the graph is strongly connected, so the
  // choice of source is immaterial).
  const std::size_t n = k_;
  std::vector<std::vector<double>> d(n + 1, std::vector<double>(n, kNegInf));
  d[0][0] = 0.0;
  for (std::size_t m = 1; m <= n; ++m)
    for (std::size_t u = 0; u < n; ++u) {
      if (d[m - 1][u] == kNegInf) continue;
      for (std::size_t v = 0; v < n; ++v) {
        double p = kernel_[u * n + v];
        if (p <= 0.0) continue;
        double w = d[m - 1][u] - std::log(p);
        if (w > d[m][v]) d[m][v] = w;
      }
    }
  double best = kNegInf;
  for (std::size_t v = 0; v < n; ++v) {
    if (d[n][v] == kNegInf) continue;
    double worst = kPosInf;
    for (std::size_t m = 0; m < n; ++m) {
      if (d[m][v] == kNegInf) continue;
      worst = std::min(worst, (d[n][v] - d[m][v]) / static_cast<double>(n - m));
    }
    if (worst != kPosInf) best = std::max(best, worst);
  }
  OVD_CHECK(best != kNegInf, "max mean cycle on cycle-free support graph");
  return best;
}

}  // namespace ovd
