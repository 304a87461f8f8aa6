// Index-pair law, overlap prior, and read-pair samplers.  Only the union of
// the two read windows is ever materialized; a Markov gap between disjoint
// windows is bridged by sampling from the matching power of the kernel.
#include "ovd/sampler.hpp"

#include <algorithm>

#include "ovd/markov.hpp"

namespace ovd {
namespace {

void check_geometry(std::int64_t n, int ell) {
  if (ell < 2) throw InvalidArgument("read length must be at least 2");
  if (n < 2 * static_cast<std::int64_t>(ell))
    throw InvalidArgument("sequence length must be at least twice the read length");
}

}  // namespace

OverlapPrior::OverlapPrior(std::int64_t n_, int ell_) : n(n_), ell(ell_) {
  check_geometry(n, ell);
  n_ell = n - (2 * static_cast<std::int64_t>(ell) - 1);
}

double OverlapPrior::prob(int t) const {
  if (!in_support(t)) return 0.0;
  if (t == 0) return static_cast<double>(n_ell) / static_cast<double>(n);
  return 1.0 / static_cast<double>(n);
}

std::vector<int> OverlapPrior::support() const {
  std::vector<int> out;
  out.reserve(2 * ell);
  for (int t = -(ell - 1); t <= ell; ++t) out.push_back(t);
  return out;
}

int overlap_from_indices(std::int64_t i1, std::int64_t i2, int ell) {
  if (ell < 1) throw InvalidArgument("read length must be positive");
  const std::int64_t d = i2 >= i1 ? i2 - i1 : i1 - i2;
  if (d >= ell) return 0;
  const int mag = ell - static_cast<int>(d);
  return i2 >= i1 ? mag : -mag;
}

void sample_indices(std::int64_t n, int ell, Philox& g, std::int64_t& i1, std::int64_t& i2) {
  check_geometry(n, ell);
  i1 = 1 + static_cast<std::int64_t>(g.below(static_cast<std::uint64_t>(n)));
  if (i1 <= ell - 1) {
    // Left edge: the second start is an offset draw around the first.
    const std::int64_t u = (-(static_cast<std::int64_t>(ell) - 1)) +
                           static_cast<std::int64_t>(g.below(static_cast<std::uint64_t>(n)));
    i2 = i1 + u;
  } else if (i1 <= n - ell + 1) {
    i2 = 1 + static_cast<std::int64_t>(g.below(static_cast<std::uint64_t>(n)));
  } else {
    const std::int64_t u = (static_cast<std::int64_t>(ell) - n) +
                           static_cast<std::int64_t>(g.below(static_cast<std::uint64_t>(n)));
    i2 = i1 + u;
  }
}

void sample_indices_given_t(std::int64_t n, int ell, int t, Philox& g, std::int64_t& i1,
                            std::int64_t& i2) {
  const OverlapPrior prior(n, ell);
  if (!prior.in_support(t)) throw InvalidArgument("overlap value outside the prior support");

  i1 = 1 + static_cast<std::int64_t>(g.below(static_cast<std::uint64_t>(n)));
  if (t != 0) {
    // Exactly one admissible second start per first start.
    const std::int64_t delta = t > 0 ? static_cast<std::int64_t>(ell) - t
                                     : -(static_cast<std::int64_t>(ell) + t);
    i2 = i1 + delta;
    return;
  }

  // T = 0: per first start there are exactly n_ell admissible offsets.
  const std::int64_t j = static_cast<std::int64_t>(g.below(static_cast<std::uint64_t>(prior.n_ell)));
  std::int64_t delta;
  if (i1 <= ell - 1) {
    delta = static_cast<std::int64_t>(ell) + j;
  } else if (i1 <= n - ell + 1) {
    const std::int64_t neg_count = i1 - ell;  // offsets 1-i1 .. -ell
    if (j < neg_count)
      delta = (1 - i1) + j;
    else
      delta = static_cast<std::int64_t>(ell) + (j - neg_count);
  } else {
    delta = (static_cast<std::int64_t>(ell) - n) + j;
  }
  i2 = i1 + delta;
}

void materialize_windows(const SourceModel& model, std::int64_t i1, std::int64_t i2, int ell,
                         Philox& g, Seq& w1, Seq& w2) {
  OVD_CHECK(ell >= 1, "read length must be positive");
  const bool first_left = i1 <= i2;
  const std::int64_t a = first_left ? i1 : i2;
  const std::int64_t b = first_left ? i2 : i1;
  const std::int64_t d = b - a;
  const std::size_t len = static_cast<std::size_t>(ell);

  Seq left, right;
  if (d <= ell) {
    // The window union is one contiguous segment of length d + ell.
    const Seq u = model.sample_sequence(static_cast<std::size_t>(d) + len, g);
    left.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(len));
    right.assign(u.begin() + static_cast<std::ptrdiff_t>(d),
                 u.begin() + static_cast<std::ptrdiff_t>(d + static_cast<std::int64_t>(len)));
  } else {
    left = model.sample_sequence(len, g);
    if (model.is_memoryless()) {
      right = model.sample_sequence(len, g);
    } else {
      const MarkovKernel& kernel = model.kernel();
      const std::int64_t skip = d - ell + 1;  // steps from the left window's end
      right.resize(len);
      right[0] = kernel.sample_skip(left.back(), static_cast<std::size_t>(skip), g);
      for (std::size_t i = 1; i < len; ++i) right[i] = kernel.sample_step(right[i - 1], g);
    }
  }
  w1 = first_left ? std::move(left) : std::move(right);
  w2 = first_left ? std::move(right) : std::move(left);
}

namespace {

ReadPair finish_pair(const SourceModel& model, const Channel& channel, std::int64_t n, int ell,
                     std::int64_t i1, std::int64_t i2, Philox& g) {
  // Both windows must fit inside the extended sequence 2-ell .. n+2ell-2.
  OVD_CHECK(i1 >= 2 - static_cast<std::int64_t>(ell) && i1 + ell - 1 <= n + 2 * static_cast<std::int64_t>(ell) - 2,
            "read window 1 escapes the extended sequence");
  OVD_CHECK(i2 >= 2 - static_cast<std::int64_t>(ell) && i2 + ell - 1 <= n + 2 * static_cast<std::int64_t>(ell) - 2,
            "read window 2 escapes the extended sequence");
  ReadPair rp;
  rp.i1 = i1;
  rp.i2 = i2;
  rp.t = overlap_from_indices(i1, i2, ell);
  Seq w1, w2;
  materialize_windows(model, i1, i2, ell, g, w1, w2);
  rp.read1 = channel.apply(w1, g);
  rp.read2 = channel.apply(w2, g);
  return rp;
}

}  // namespace

ReadPair sample_pair(const SourceModel& model, const Channel& channel, std::int64_t n, int ell,
                     Philox& g) {
  std::int64_t i1 = 0, i2 = 0;
  sample_indices(n, ell, g, i1, i2);
  return finish_pair(model, channel, n, ell, i1, i2, g);
}

ReadPair sample_pair_given_t(const SourceModel& model, const Channel& channel, std::int64_t n,
                             int ell, int t, Philox& g) {
  std::int64_t i1 = 0, i2 = 0;
  sample_indices_given_t(n, ell, t, g, i1, i2);
  ReadPair rp = finish_pair(model, channel, n, ell, i1, i2, g);
  OVD_CHECK(rp.t == t, "conditional sampler produced an inconsistent overlap");
  return rp;
}

}  // namespace ovd
