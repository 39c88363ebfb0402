#pragma once

#include <cmath>
#include <limits>

namespace veriscope {

// A probability kept in natural-log space. Probability 0 is the -infinity
// sentinel; everything else satisfies log <= 0. Multiplication is addition
// of logs, so long products of error probabilities never underflow.
class LogProb {
 public:
  constexpr LogProb() : log_(0.0) {}  // probability 1

  static constexpr LogProb one() { return LogProb(); }
  static constexpr LogProb zero() {
    return LogProb(-std::numeric_limits<double>::infinity());
  }
  static constexpr LogProb from_log(double l) { return LogProb(l); }
  static LogProb from_linear(double p) {
    return p <= 0.0 ? zero() : LogProb(std::log(p));
  }

  constexpr bool is_zero() const { return std::isinf(log_) && log_ < 0; }
  constexpr double log() const { return log_; }
  double linear() const { return is_zero() ? 0.0 : std::exp(log_); }

  constexpr LogProb& operator*=(LogProb o) {
    log_ += o.log_;
    return *this;
  }
  friend constexpr LogProb operator*(LogProb a, LogProb b) { return a *= b; }

  friend constexpr bool operator==(LogProb a, LogProb b) {
    return a.log_ == b.log_ || (a.is_zero() && b.is_zero());
  }
  friend constexpr bool operator<(LogProb a, LogProb b) { return a.log_ < b.log_; }
  friend constexpr bool operator>(LogProb a, LogProb b) { return b < a; }
  friend constexpr bool operator<=(LogProb a, LogProb b) { return !(b < a); }
  friend constexpr bool operator>=(LogProb a, LogProb b) { return !(a < b); }

 private:
  constexpr explicit LogProb(double l) : log_(l) {}
  double log_;
};

}  // namespace veriscope
