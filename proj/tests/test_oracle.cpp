// Tests for the exhaustive ground-truth oracles: posterior tables, partial
// power sums, and repetition probabilities.
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "ovd/detector.hpp"
#include "ovd/oracle.hpp"
#include "ovd/rng.hpp"
#include "ovd/sampler.hpp"

using namespace ovd;

namespace {
SourceModel uniform2() { return SourceModel::memoryless(Pmf({0.5, 0.5})); }
SourceModel skew2() { return SourceModel::memoryless(Pmf({0.75, 0.25})); }

Seq random_read(int ell, Philox& g) {
  Seq s(ell);
  for (auto& x : s) x = Symbol(g.below(2));
  return s;
}

void check_tables_close(const PosteriorTable& a, const PosteriorTable& b, double tol) {
  REQUIRE(a.probs.size() == b.probs.size());
  for (std::size_t i = 0; i < a.probs.size(); ++i)
    CHECK(a.probs[i] == doctest::Approx(b.probs[i]).epsilon(tol));
}
}  // namespace

TEST_CASE("posterior oracles agree three ways on tiny instances") {
  // Brute force enumerates every source sequence, the enumeration oracle
  // every index pair, the closed form neither; all three must coincide.
  struct Setting {
    SourceModel model;
    Channel channel;
  };
  const Setting settings[] = {
      {uniform2(), Channel::identity(2)},
      {skew2(), Channel::identity(2)},
      {uniform2(), Channel::binary_symmetric(0.25)},
      {skew2(), Channel::binary_symmetric(0.25)},
  };
  int tag = 0;
  for (const auto& s : settings) {
    Philox g(derive_key(51, 1, tag++));
    for (int rep = 0; rep < 12; ++rep) {
      const int ell = rep % 2 == 0 ? 2 : 3;
      const std::int64_t n = rep % 3 == 0 ? 2 * ell : 8;
      Seq r1 = random_read(ell, g), r2 = random_read(ell, g);
      PosteriorTable exact = exact_posterior(r1, r2, s.model, s.channel, n);
      PosteriorTable enumd = enumerate_posterior(r1, r2, s.model, s.channel, n);
      PosteriorTable brute = brute_posterior(r1, r2, s.model, s.channel, n);
      check_tables_close(exact, enumd, 1e-10);
      check_tables_close(exact, brute, 1e-10);
      double mass = 0.0;
      for (double p : exact.probs) mass += p;
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(exact.map_t() == enumd.map_t());
      CHECK(exact.map_t() == brute.map_t());
    }
  }
}

TEST_CASE("posterior tables index the support correctly") {
  Philox g(derive_key(51, 2));
  Seq r1 = random_read(3, g), r2 = random_read(3, g);
  PosteriorTable t = exact_posterior(r1, r2, uniform2(), Channel::identity(2), 8);
  CHECK(t.ell == 3);
  CHECK(t.probs.size() == 6);  // t = -2 .. 3
  double total = 0.0;
  for (int v = -2; v <= 3; ++v) total += t.prob(v);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(t.prob(-3), InvalidArgument);
  CHECK_THROWS_AS(t.prob(4), InvalidArgument);
}

TEST_CASE("posterior MAP agrees with the detectors") {
  // The detector is a thresholded likelihood comparison; the posterior table
  // is the full Bayes computation.  Their argmaxes must coincide, noiseless
  // and noisy alike.
  Philox g(derive_key(51, 3));
  auto model = uniform2();
  Channel id = Channel::identity(2);
  Channel bsc = Channel::binary_symmetric(0.25);
  PairStats st = pair_statistics(model, bsc);
  for (int rep = 0; rep < 3000; ++rep) {
    const int ell = 2 + int(g.below(2));
    const std::int64_t n = 8 + std::int64_t(g.below(9));
    Seq r1 = random_read(ell, g), r2 = random_read(ell, g);
    CHECK(exact_posterior(r1, r2, model, id, n).map_t() ==
          detect_noiseless(r1, r2, model, n).t_hat);
    CHECK(exact_posterior(r1, r2, model, bsc, n).map_t() ==
          detect_noisy(r1, r2, st, n).t_hat);
  }
}

TEST_CASE("posterior oracles agree for larger noiseless instances") {
  // The enumeration oracle scales to moderately larger n; cross-check the
  // closed form there too (brute force is out of reach).
  Philox g(derive_key(51, 4));
  for (int rep = 0; rep < 50; ++rep) {
    const int ell = 4;
    const std::int64_t n = 16 + std::int64_t(g.below(17));
    Seq r1 = random_read(ell, g), r2 = random_read(ell, g);
    PosteriorTable exact = exact_posterior(r1, r2, skew2(), Channel::identity(2), n);
    PosteriorTable enumd = enumerate_posterior(r1, r2, skew2(), Channel::identity(2), n);
    check_tables_close(exact, enumd, 1e-10);
    CHECK(exact.map_t() == enumd.map_t());
  }
}

TEST_CASE("posterior oracles reject unsupported inputs") {
  auto markov = SourceModel::markov(MarkovKernel({{0.9, 0.1}, {0.1, 0.9}}));
  Seq r{0, 1};
  CHECK_THROWS_AS(exact_posterior(r, r, markov, Channel::identity(2), 8), Unsupported);
  CHECK_THROWS_AS(brute_posterior({0, 1, 0, 1, 0, 1}, {0, 1, 0, 1, 0, 1}, uniform2(),
                                  Channel::identity(2), 64),
                  Unsupported);
}

TEST_CASE("partial power sums: frozen values") {
  Pmf uni({0.5, 0.5});
  // All length-3 blocks have 1/P = 8: the Ge cut at 8 keeps everything.
  CHECK(partial_power_sum(uni, 3, 8.0, 2, Direction::Ge) ==
        doctest::Approx(0.125).epsilon(1e-12));
  CHECK(partial_power_sum(uni, 3, 8.0, 1, Direction::Le) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Just below the common 1/P the Ge cut keeps nothing.
  CHECK(partial_power_sum(uni, 3, 8.1, 2, Direction::Ge) == doctest::Approx(0.0));
  // Skewed: only the all-heavy block has 1/P <= 3.
  Pmf skew({0.75, 0.25});
  CHECK(partial_power_sum(skew, 2, 3.0, 1, Direction::Le) ==
        doctest::Approx(0.5625).epsilon(1e-12));
  // Extreme thresholds reproduce the full sums.
  CHECK(partial_power_sum(skew, 4, 1.0, 1, Direction::Ge) ==
        doctest::Approx(1.0).epsilon(1e-12));
  double coll = partial_power_sum(skew, 4, kPosInf, 2, Direction::Le);
  CHECK(coll == doctest::Approx(std::pow(0.625, 4)).epsilon(1e-12));
}

TEST_CASE("partial power sums split cleanly at a threshold") {
  Pmf skew({0.75, 0.25});
  for (int t : {2, 5, 9}) {
    for (double theta : {1.5, 7.0, 100.0}) {
      double ge1 = partial_power_sum(skew, t, theta, 1, Direction::Ge);
      double le1 = partial_power_sum(skew, t, theta, 1, Direction::Le);
      // Ge and Le overlap exactly on the classes sitting at the threshold;
      // here theta is never an attainable 1/P, so the halves partition.
      CHECK(ge1 + le1 == doctest::Approx(1.0).epsilon(1e-12));
      double ge2 = partial_power_sum(skew, t, theta, 2, Direction::Ge);
      double le2 = partial_power_sum(skew, t, theta, 2, Direction::Le);
      double coll = std::pow(0.75 * 0.75 + 0.25 * 0.25, t);
      CHECK(ge2 + le2 == doctest::Approx(coll).epsilon(1e-12));
    }
  }
  // A threshold equal to an attainable 1/P lands in both directions.
  // Length-1, threshold 4: the light symbol has 1/P exactly 4.
  double ge = partial_power_sum(skew, 1, 4.0, 1, Direction::Ge);
  double le = partial_power_sum(skew, 1, 4.0, 1, Direction::Le);
  CHECK(ge == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(le == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("partial power sums validate their inputs") {
  Pmf uni({0.5, 0.5});
  CHECK_THROWS_AS(partial_power_sum(uni, 0, 8.0, 1, Direction::Ge), InvalidArgument);
  CHECK_THROWS_AS(partial_power_sum(uni, 3, 8.0, 3, Direction::Ge), InvalidArgument);
  auto markov = SourceModel::markov(MarkovKernel({{0.9, 0.1}, {0.1, 0.9}}));
  CHECK_THROWS_AS(partial_power_sum(markov, 3, 8.0, 1, Direction::Ge), Unsupported);
  // Composition explosion on a large alphabet.
  Pmf oct({0.3, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1});
  CHECK_THROWS_AS(partial_power_sum(oct, 40, 2.0, 1, Direction::Ge), Unsupported);
}

TEST_CASE("repetition probabilities: memoryless closed forms") {
  auto uni = uniform2();
  // Shift below t forces a longer run: X_1^3 = X_2^4 means 4 equal symbols.
  RepetitionEstimate r = repetition_probability(uni, 3, 1);
  CHECK(r.exact);
  CHECK(r.value == doctest::Approx(0.125).epsilon(1e-12));
  // Disjoint shift: independent equal blocks.
  RepetitionEstimate d = repetition_probability(uni, 3, 3);
  CHECK(d.exact);
  CHECK(d.value == doctest::Approx(0.125).epsilon(1e-12));
  // Skewed versions: s >= t gives (sum p^2)^t; s = 1 gives sum p^(t+1).
  auto sk = skew2();
  CHECK(repetition_probability(sk, 3, 5).value ==
        doctest::Approx(std::pow(0.625, 3)).epsilon(1e-12));
  CHECK(repetition_probability(sk, 3, 1).value ==
        doctest::Approx(std::pow(0.75, 4) + std::pow(0.25, 4)).epsilon(1e-12));
  // General residue form: t = 4, s = 2 -> two interleaved runs of 3.
  double expect = std::pow(std::pow(0.75, 3) + std::pow(0.25, 3), 2);
  CHECK(repetition_probability(sk, 4, 2).value == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("repetition probabilities: markov exact vs monte carlo") {
  MarkovKernel kernel({{0.8, 0.2}, {0.2, 0.8}});
  auto model = SourceModel::markov(kernel);
  // Exact periodic enumeration for two shifts.
  for (int s : {1, 2}) {
    double exact = markov_repetition_exact(kernel, 5, s);
    RepetitionEstimate mc = repetition_probability(model, 5, s, 99, 400000);
    CHECK_FALSE(mc.exact);
    CHECK(mc.std_error > 0.0);
    CHECK(std::abs(mc.value - exact) < 5 * mc.std_error + 1e-6);
  }
  // s = 1 closed check: stay-probability runs, pi-weighted.
  // P[X_1^2 = X_2^3] = sum_x pi(x) K(x,x)^2.
  double hand = 0.5 * 0.8 * 0.8 + 0.5 * 0.8 * 0.8;
  CHECK(markov_repetition_exact(kernel, 2, 1) == doctest::Approx(hand).epsilon(1e-12));
  // Determinism of the Monte Carlo path under a fixed seed.
  RepetitionEstimate a = repetition_probability(model, 6, 2, 7, 50000);
  RepetitionEstimate b = repetition_probability(model, 6, 2, 7, 50000);
  CHECK(a.value == b.value);
  CHECK_THROWS_AS(markov_repetition_exact(kernel, 4, 13), Unsupported);
}
