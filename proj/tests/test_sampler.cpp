// Tests for the overlap prior, index-pair law, read-pair samplers, and the
// packed fast-path sampler used by the Monte Carlo engine.
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "ovd/montecarlo.hpp"
#include "ovd/rng.hpp"
#include "ovd/sampler.hpp"

using namespace ovd;

namespace {

SourceModel uniform2() { return SourceModel::memoryless(Pmf({0.5, 0.5})); }
SourceModel sym_markov(double eps) {
  return SourceModel::markov(MarkovKernel({{1 - eps, eps}, {eps, 1 - eps}}));
}

// Pearson statistic of observed counts against exact cell probabilities.
double chi2_vs_exact(const std::map<int, std::uint64_t>& counts,
                     const std::map<int, double>& probs, double total) {
  double stat = 0.0;
  for (const auto& [cell, p] : probs) {
    double expect = p * total;
    auto it = counts.find(cell);
    double got = it == counts.end() ? 0.0 : double(it->second);
    stat += (got - expect) * (got - expect) / expect;
  }
  return stat;
}

// Two-sample statistic: are two count vectors draws from one law?
double chi2_two_sample(const std::map<int, std::uint64_t>& a,
                       const std::map<int, std::uint64_t>& b) {
  std::map<int, std::pair<double, double>> merged;
  for (const auto& [cell, c] : a) merged[cell].first = double(c);
  for (const auto& [cell, c] : b) merged[cell].second = double(c);
  double stat = 0.0;
  for (const auto& [cell, ab] : merged) {
    double s = ab.first + ab.second;
    double d = ab.first - ab.second;
    stat += d * d / s;
  }
  return stat;
}

}  // namespace

TEST_CASE("overlap prior masses") {
  OverlapPrior prior(16, 4);
  CHECK(prior.n_ell == 9);
  CHECK(prior.prob(0) == doctest::Approx(9.0 / 16.0));
  for (int t : {-3, -1, 1, 2, 4}) CHECK(prior.prob(t) == doctest::Approx(1.0 / 16.0));
  CHECK(prior.prob(-4) == 0.0);
  CHECK(prior.prob(5) == 0.0);
  CHECK(prior.support().size() == 8);
  CHECK(prior.support().front() == -3);
  CHECK(prior.support().back() == 4);
  double mass = 0.0;
  for (int t : prior.support()) mass += prior.prob(t);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  // Geometry limits: need n >= 2 ell and ell >= 2.
  CHECK_NOTHROW(OverlapPrior(8, 4));
  CHECK_THROWS_AS(OverlapPrior(7, 4), InvalidArgument);
  CHECK_THROWS_AS(OverlapPrior(16, 1), InvalidArgument);
}

TEST_CASE("overlap from index pairs") {
  CHECK(overlap_from_indices(1, 1, 4) == 4);
  CHECK(overlap_from_indices(1, 2, 4) == 3);
  CHECK(overlap_from_indices(1, 4, 4) == 1);
  CHECK(overlap_from_indices(1, 5, 4) == 0);
  CHECK(overlap_from_indices(2, 1, 4) == -3);
  CHECK(overlap_from_indices(4, 1, 4) == -1);
  CHECK(overlap_from_indices(5, 1, 4) == 0);
  CHECK(overlap_from_indices(100, 97, 4) == -1);
}

TEST_CASE("unconditional index law induces the overlap prior") {
  const std::int64_t n = 16;
  const int ell = 4;
  OverlapPrior prior(n, ell);
  Philox g(derive_key(31, 1));
  std::map<int, std::uint64_t> counts;
  const int trials = 50000;
  for (int i = 0; i < trials; ++i) {
    std::int64_t i1, i2;
    sample_indices(n, ell, g, i1, i2);
    ++counts[overlap_from_indices(i1, i2, ell)];
  }
  std::map<int, double> probs;
  for (int t : prior.support()) probs[t] = prior.prob(t);
  // 7 degrees of freedom; 99.9th percentile is 24.32.
  CHECK(chi2_vs_exact(counts, probs, trials) < 24.32);
}

TEST_CASE("conditional index law is uniform and consistent") {
  const std::int64_t n = 24;
  const int ell = 5;
  Philox g(derive_key(31, 2));
  for (int t : OverlapPrior(n, ell).support()) {
    std::map<int, std::uint64_t> starts;
    for (int i = 0; i < 4000; ++i) {
      std::int64_t i1, i2;
      sample_indices_given_t(n, ell, t, g, i1, i2);
      CHECK(overlap_from_indices(i1, i2, ell) == t);
      ++starts[int(i1)];
    }
    // First index is uniform over n values in every stratum.
    std::map<int, double> uni;
    for (int v = 1; v <= int(n); ++v) uni[v] = 1.0 / double(n);
    // 23 degrees of freedom; 99.9th percentile is 49.73.
    CHECK(chi2_vs_exact(starts, uni, 4000) < 49.73);
  }
  Philox g2(derive_key(31, 3));
  std::int64_t i1, i2;
  CHECK_THROWS_AS(sample_indices_given_t(n, ell, ell + 1, g2, i1, i2), InvalidArgument);
  CHECK_THROWS_AS(sample_indices_given_t(n, ell, -ell, g2, i1, i2), InvalidArgument);
}

TEST_CASE("read pairs: overlap regions agree symbol-for-symbol") {
  auto model = uniform2();
  Channel id = Channel::identity(2);
  Philox g(derive_key(31, 4));
  const std::int64_t n = 32;
  const int ell = 5;
  std::map<int, std::uint64_t> tcounts;
  for (int i = 0; i < 20000; ++i) {
    ReadPair rp = sample_pair(model, id, n, ell, g);
    REQUIRE(rp.read1.size() == std::size_t(ell));
    REQUIRE(rp.read2.size() == std::size_t(ell));
    CHECK(rp.t == overlap_from_indices(rp.i1, rp.i2, ell));
    if (rp.t > 0) {
      for (int j = 0; j < rp.t; ++j) REQUIRE(rp.read1[ell - rp.t + j] == rp.read2[j]);
    } else if (rp.t < 0) {
      int m = -rp.t;
      for (int j = 0; j < m; ++j) REQUIRE(rp.read2[ell - m + j] == rp.read1[j]);
    }
    ++tcounts[rp.t];
  }
  // The overlap statistic of full draws still follows the prior.
  OverlapPrior prior(n, ell);
  std::map<int, double> probs;
  for (int t : prior.support()) probs[t] = prior.prob(t);
  // 9 degrees of freedom; 99.9th percentile is 27.88.
  CHECK(chi2_vs_exact(tcounts, probs, 20000) < 27.88);
}

TEST_CASE("conditional read pairs carry the requested overlap") {
  auto model = uniform2();
  Channel bsc = Channel::binary_symmetric(0.1);
  Philox g(derive_key(31, 5));
  for (int t : {-3, 0, 2, 4}) {
    for (int i = 0; i < 200; ++i) {
      ReadPair rp = sample_pair_given_t(model, bsc, 16, 4, t, g);
      CHECK(rp.t == t);
      CHECK(overlap_from_indices(rp.i1, rp.i2, 4) == t);
    }
  }
  CHECK_THROWS_AS(sample_pair_given_t(model, bsc, 16, 4, 5, g), InvalidArgument);
}

TEST_CASE("markov window union follows the chain law") {
  auto model = sym_markov(0.3);
  Philox g(derive_key(31, 6));
  const int ell = 4;
  const int trials = 60000;
  std::map<int, std::uint64_t> counts;
  for (int i = 0; i < trials; ++i) {
    Seq w1, w2;
    materialize_windows(model, 1, 3, ell, g, w1, w2);
    // Overlap region is shared material, not merely equal in law.
    REQUIRE(w1[2] == w2[0]);
    REQUIRE(w1[3] == w2[1]);
    int cell = 0;
    for (int j = 0; j < 4; ++j) cell = cell * 2 + w1[j];
    cell = cell * 2 + w2[2];
    cell = cell * 2 + w2[3];
    ++counts[cell];
  }
  // Exact law of the length-6 union under the chain.
  std::map<int, double> probs;
  for (int u = 0; u < 64; ++u) {
    Seq s(6);
    for (int j = 0; j < 6; ++j) s[j] = Symbol((u >> (5 - j)) & 1);
    probs[u] = std::exp(model.log_prob_nats(s));
  }
  // 63 degrees of freedom; 99.9th percentile is 103.4.
  CHECK(chi2_vs_exact(counts, probs, trials) < 103.4);
}

TEST_CASE("markov gap bridging matches the s-step kernel") {
  auto model = sym_markov(0.3);
  Philox g(derive_key(31, 7));
  const int ell = 4;
  const int trials = 40000;
  // d = 6 > ell: windows are disjoint with a skip of d - ell + 1 = 3 steps
  // between the left window's last symbol and the right window's first.
  std::map<int, std::uint64_t> counts;
  for (int i = 0; i < trials; ++i) {
    Seq w1, w2;
    materialize_windows(model, 1, 7, ell, g, w1, w2);
    ++counts[int(w1.back()) * 2 + int(w2.front())];
  }
  Matrix k3 = model.kernel().power(3);
  std::map<int, double> probs;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) probs[x * 2 + y] = 0.5 * k3[x * 2 + y];
  // 3 degrees of freedom; 99.9th percentile is 16.27.
  CHECK(chi2_vs_exact(counts, probs, trials) < 16.27);
  // Mirrored geometry: first read to the right of the second.
  Seq w1, w2;
  materialize_windows(model, 9, 1, ell, g, w1, w2);
  CHECK(w1.size() == std::size_t(ell));
  CHECK(w2.size() == std::size_t(ell));
}

TEST_CASE("packed source sampler matches the generic sampler in law") {
  auto model = uniform2();
  Channel id = Channel::identity(2);
  const int ell = 4;
  for (int t : {0, 1, 2, -2, 4}) {
    Philox gp(derive_key(31, 10, std::uint64_t(t + 16)));
    Philox gg(derive_key(31, 11, std::uint64_t(t + 16)));
    std::map<int, std::uint64_t> packed, generic;
    const int trials = 50000;
    for (int i = 0; i < trials; ++i) {
      Seq x1, x2;
      detail::packed_sample_given_t(ell, t, gp, x1, x2);
      REQUIRE(x1.size() == std::size_t(ell));
      REQUIRE(x2.size() == std::size_t(ell));
      int cell = 0;
      for (int j = 0; j < ell; ++j) cell = cell * 2 + x1[j];
      for (int j = 0; j < ell; ++j) cell = cell * 2 + x2[j];
      ++packed[cell];
      ReadPair rp = sample_pair_given_t(model, id, 64, ell, t, gg);
      int cell2 = 0;
      for (int j = 0; j < ell; ++j) cell2 = cell2 * 2 + rp.read1[j];
      for (int j = 0; j < ell; ++j) cell2 = cell2 * 2 + rp.read2[j];
      ++generic[cell2];
    }
    if (t != 0) {
      // Overlap consistency built in: packed reads share material too.
      for (const auto& [cell, cnt] : packed) {
        (void)cnt;
        int r1 = cell >> ell, r2 = cell & ((1 << ell) - 1);
        int m = std::abs(t);
        if (t > 0)
          CHECK((r1 & ((1 << m) - 1)) == (r2 >> (ell - m)));
        else
          CHECK((r2 & ((1 << m) - 1)) == (r1 >> (ell - m)));
      }
    }
    // Up to 255 cells; 99.9th percentile of chi2(255) is 330.5.
    CHECK(chi2_two_sample(packed, generic) < 330.5);
  }
}
