#pragma once

// Nonnegative reals carried in the natural-log domain. Partition functions
// here routinely involve exp of thousands of log-units, so the linear value
// is never materialized unless the caller asks for it.

#include <cmath>
#include <limits>

namespace gibbslab::num {

struct LogScalar {
  double log_magnitude = 0.0;
  bool is_zero = true;

  static LogScalar zero() { return LogScalar{}; }
  static LogScalar one() { return from_log(0.0); }
  static LogScalar from_log(double lg) { return LogScalar{lg, false}; }
  static LogScalar from_linear(double v) {
    return v <= 0.0 ? zero() : from_log(std::log(v));
  }

  double log() const { return is_zero ? -std::numeric_limits<double>::infinity() : log_magnitude; }
  double linear() const { return is_zero ? 0.0 : std::exp(log_magnitude); }

  friend LogScalar operator*(const LogScalar& a, const LogScalar& b) {
    if (a.is_zero || b.is_zero) return zero();
    return from_log(a.log_magnitude + b.log_magnitude);
  }
  friend LogScalar operator/(const LogScalar& a, const LogScalar& b) {
    if (a.is_zero) return zero();
    return from_log(a.log_magnitude - b.log_magnitude);
  }
  // log-sum-exp; safe for any magnitudes
  friend LogScalar operator+(const LogScalar& a, const LogScalar& b) {
    if (a.is_zero) return b;
    if (b.is_zero) return a;
    double hi = a.log_magnitude, lo = b.log_magnitude;
    if (hi < lo) std::swap(hi, lo);
    return from_log(hi + std::log1p(std::exp(lo - hi)));
  }
};

inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double hi = a < b ? b : a, lo = a < b ? a : b;
  return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace gibbslab::num
