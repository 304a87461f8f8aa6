// First-order Markov transition kernel on a small finite alphabet.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ovd/common.hpp"
#include "ovd/rng.hpp"

namespace ovd {

// Small dense row-major matrix helpers (alphabet sizes <= 8).
using Matrix = std::vector<double>;  // k*k, row-major

Matrix mat_mul(const Matrix& a, const Matrix& b, std::size_t k);
Matrix mat_power(const Matrix& m, std::uint64_t s, std::size_t k);

class MarkovKernel {
 public:
  // Validates: square shape with 2 <= k <= 8, every row a pmf, irreducibility
  // (strongly connected support digraph) and aperiodicity, and that the
  // stationary distribution satisfies pi*K = pi within 1e-10.
  explicit MarkovKernel(std::vector<std::vector<double>> rows);

  std::size_t size() const { return k_; }
  double prob(Symbol from, Symbol to) const { return kernel_[from * k_ + to]; }
  double log_prob(Symbol from, Symbol to) const;
  const std::vector<double>& stationary() const { return pi_; }
  const Matrix& matrix() const { return kernel_; }
  Matrix power(std::uint64_t s) const { return mat_power(kernel_, s, k_); }

  Symbol sample_start(Philox& g) const;              // from pi
  Symbol sample_step(Symbol from, Philox& g) const;  // from row `from`
  // Draw the state s steps after `from` without materializing the path.
  Symbol sample_skip(Symbol from, std::uint64_t s, Philox& g) const;

  // If the kernel has the symmetric form (epsilon off-diagonal, equal
  // diagonal), returns epsilon.
  std::optional<double> symmetric_epsilon() const;

  // Largest mean cycle weight of -ln K(x, x') over support edges (Karp).
  // This is the asymptotic per-step rate of the most improbable block.
  double max_mean_cycle_neglog() const;

 private:
  Symbol sample_row(const double* row, Philox& g) const;

  std::size_t k_ = 0;
  Matrix kernel_;
  std::vector<double> pi_;
};

}  // namespace ovd
