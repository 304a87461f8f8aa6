// Generative model for a pair of length-ell reads drawn from a long source
// sequence: the signed-overlap prior, the index-pair law, and samplers for
// both the unconditional model and a fixed overlap value.
#pragma once

#include <cstdint>
#include <vector>

#include "ovd/channel.hpp"
#include "ovd/common.hpp"
#include "ovd/rng.hpp"
#include "ovd/source_model.hpp"

namespace ovd {

// Signed overlap T of two length-ell reads from a length-n sequence:
// P[T = 0] = n_ell / n with n_ell = n - (2 ell - 1), and P[T = t] = 1 / n
// for every t in [-(ell-1), ell] \ {0}.
struct OverlapPrior {
  std::int64_t n = 0;
  int ell = 0;
  std::int64_t n_ell = 0;

  OverlapPrior(std::int64_t n_, int ell_);
  double prob(int t) const;            // 0 outside the support
  std::vector<int> support() const;    // -(ell-1) .. ell
  bool in_support(int t) const { return t >= -(ell - 1) && t <= ell; }
};

// The signed overlap induced by start positions i1, i2 (1-based).
int overlap_from_indices(std::int64_t i1, std::int64_t i2, int ell);

struct ReadPair {
  Seq read1;
  Seq read2;
  std::int64_t i1 = 0;  // 1-based start of read 1 in the long sequence
  std::int64_t i2 = 0;
  int t = 0;            // signed overlap implied by (i1, i2)
};

// Draw (i1, i2) from the index-pair law alone (no sequence material).
void sample_indices(std::int64_t n, int ell, Philox& g, std::int64_t& i1, std::int64_t& i2);

// Draw (i1, i2) conditioned on the overlap value t; uniform over the index
// pairs consistent with t.
void sample_indices_given_t(std::int64_t n, int ell, int t, Philox& g, std::int64_t& i1,
                            std::int64_t& i2);

// Full generative draw: index pair, the source material under both read
// windows (only the window union is materialized), and one independent
// channel pass per read.
ReadPair sample_pair(const SourceModel& model, const Channel& channel, std::int64_t n, int ell,
                     Philox& g);

// Same, conditioned on T = t.
ReadPair sample_pair_given_t(const SourceModel& model, const Channel& channel, std::int64_t n,
                             int ell, int t, Philox& g);

// Source material under the two windows starting at i1 and i2 (no noise);
// exposed for oracles and tests.
void materialize_windows(const SourceModel& model, std::int64_t i1, std::int64_t i2, int ell,
                         Philox& g, Seq& w1, Seq& w2);

}  // namespace ovd
