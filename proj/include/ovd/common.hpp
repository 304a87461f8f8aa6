// Shared basic types, the error taxonomy, and small numeric helpers.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovd {

using Symbol = std::uint8_t;
using Seq = std::vector<Symbol>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.141592653589793238462643383279502884;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed caller input (bad sizes, out-of-range parameters, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A pmf or kernel that fails its structural validation.
class ModelInvalid : public Error {
 public:
  using Error::Error;
};

// Renyi divergence requested for p not absolutely continuous w.r.t. q.
class DivergenceUndefined : public Error {
 public:
  using Error::Error;
};

// Error exponents requested for a channel with zero mutual information.
class ExponentUndefined : public Error {
 public:
  using Error::Error;
};

// MGF tail bound requested when the log-likelihood ratio is degenerate.
class BoundUndefined : public Error {
 public:
  using Error::Error;
};

// Operation not available for the given model class.
class Unsupported : public Error {
 public:
  using Error::Error;
};

// Filesystem failure (open, write, rename).
class IoError : public Error {
 public:
  using Error::Error;
};

// Internal invariant check that stays active in release builds.
#define OVD_CHECK(cond, msg)                                  \
  do {                                                        \
    if (!(cond)) throw ::ovd::Error(std::string("internal invariant failed: ") + (msg)); \
  } while (0)

// Kahan-Neumaier compensated accumulator for long float sums.
class NeumaierSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// log(sum(exp(v))) guarded against empty input and -inf entries.
inline double log_sum_exp(const std::vector<double>& v) {
  double m = kNegInf;
  for (double x : v)
    if (x > m) m = x;
  if (m == kNegInf) return kNegInf;
  NeumaierSum s;
  for (double x : v)
    if (x != kNegInf) s.add(std::exp(x - m));
  return m + std::log(s.value());
}

// A quantity carried in both natural-log and base-|X| units.
struct LogValue {
  double nats = 0.0;
  double base = 0.0;  // value divided by ln(alphabet size)
};

inline LogValue make_log_value(double nats, std::size_t alphabet) {
  return LogValue{nats, nats / std::log(static_cast<double>(alphabet))};
}

}  // namespace ovd
