#pragma once

// Exact outward-rounded dyadic scalars and enclosures.
//
// A DyadicValue is sign * (num/den) * 2^exponent with the rational mantissa
// normalized into [1,2) and the exponent an arbitrary-precision integer.
// That shape lets us compare quantities like (3/2)*2^(121 - 2^331) against
// 2^-21 exactly: the exponent carries the astronomical part, the mantissa
// stays small. Mantissas are capped at MANTISSA_BITS; when an exact result
// exceeds the cap it is rounded outward in the requested direction, so
// composed DyadicBound intervals always enclose the true value.

#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "gibbslab/bigint.hpp"

namespace gibbslab::num {

enum class Round { Down, Up };

struct DyadicValue {
  int sign = 0;        // -1, 0, +1
  BigInt num{1};       // mantissa numerator, num/den in [1,2) when sign != 0
  BigInt den{1};
  BigInt exponent{0};

  static constexpr std::size_t MANTISSA_BITS = 512;

  static DyadicValue zero() { return DyadicValue{}; }
  static DyadicValue one() { return from_int(1); }
  static DyadicValue from_int(long long v);
  static DyadicValue from_pow2(BigInt e);
  // value = (p/q) * 2^e, p != 0, q > 0
  static DyadicValue from_ratio_pow2(long long p, long long q, BigInt e = 0);
  static DyadicValue make(int sign, BigInt num, BigInt den, BigInt exponent,
                          Round dir);

  bool is_zero() const { return sign == 0; }
  DyadicValue negated() const;

  static DyadicValue mul(const DyadicValue& a, const DyadicValue& b, Round dir);
  static DyadicValue add(const DyadicValue& a, const DyadicValue& b, Round dir);
  DyadicValue times_pow2(const BigInt& e) const;  // exact
  DyadicValue reciprocal(Round dir) const;        // requires nonzero

  // total order on exact values
  static int compare(const DyadicValue& a, const DyadicValue& b);

  double log2_abs() const;  // for reports and float cross-checks
  std::string mantissa_string() const;   // "num/den"
  std::string exponent_string() const;   // decimal or ~2^... summary
};

struct DyadicBound {
  DyadicValue lo, hi;

  DyadicBound() = default;
  DyadicBound(DyadicValue l, DyadicValue h);
  static DyadicBound exact(DyadicValue v) { return DyadicBound{v, v}; }
  static DyadicBound from_int(long long v) { return exact(DyadicValue::from_int(v)); }
  static DyadicBound from_pow2(BigInt e) { return exact(DyadicValue::from_pow2(std::move(e))); }
  static DyadicBound from_ratio_pow2(long long p, long long q, BigInt e = 0) {
    return exact(DyadicValue::from_ratio_pow2(p, q, std::move(e)));
  }

  DyadicBound operator*(const DyadicBound& o) const;
  DyadicBound operator+(const DyadicBound& o) const;
  DyadicBound operator-(const DyadicBound& o) const;
  DyadicBound negated() const { return DyadicBound{hi.negated(), lo.negated()}; }
  DyadicBound times_pow2(const BigInt& e) const {
    return DyadicBound{lo.times_pow2(e), hi.times_pow2(e)};
  }
  DyadicBound reciprocal() const;  // requires a strictly positive enclosure
};

DyadicBound sum_enclose(std::span<const DyadicBound> terms);
DyadicBound sum_enclose(std::initializer_list<DyadicBound> terms);

// Upper bound for exp(-x) on the enclosure x, via exp(-x) <= 2^-floor(x)
// for x >= 0 (the checker's sole transcendental inequality). Returns
// [0, 2^-t] with t an exact integer <= x.lo; collapses to [0,1] when the
// lower end is not positive.
DyadicBound exp_neg_upper(const DyadicBound& x);

// a <= b certainly / a < b certainly, on enclosures
bool surely_le(const DyadicBound& a, const DyadicBound& b);
bool surely_lt(const DyadicBound& a, const DyadicBound& b);

// Closed-form upper bound for the geometric tail sum_{k>=1} (2^-a)^k, a >= 1:
// the tail equals 1/(2^a - 1) <= 2^-(a-1).
DyadicBound geometric_tail_upper(long long a);

}  // namespace gibbslab::num
