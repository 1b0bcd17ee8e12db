#pragma once

// Signed arbitrary-precision integer on 64-bit limbs, little-endian.
// Sized for exponent bookkeeping: values up to a few hundred thousand bits
// (the exact-bound checker manipulates exponents like 2^215000).

#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

namespace gibbslab::num {

class BigInt {
 public:
  BigInt() = default;
  BigInt(long long v);  // NOLINT: implicit, mirrors integer literals

  static BigInt pow2(std::size_t n);  // 2^n as a value

  bool is_zero() const { return limbs_.empty(); }
  bool is_negative() const { return negative_; }
  int sign() const { return is_zero() ? 0 : (negative_ ? -1 : 1); }

  std::size_t bit_length() const;  // 0 for zero
  bool bit(std::size_t i) const;

  BigInt operator-() const;
  BigInt operator+(const BigInt& o) const;
  BigInt operator-(const BigInt& o) const;
  BigInt operator*(const BigInt& o) const;
  BigInt operator<<(std::size_t n) const;
  BigInt operator>>(std::size_t n) const;  // arithmetic shift toward -inf

  BigInt& operator+=(const BigInt& o) { return *this = *this + o; }
  BigInt& operator-=(const BigInt& o) { return *this = *this - o; }

  // Truncated division (quotient rounds toward zero), remainder same sign
  // as the dividend. Divisor must be nonzero.
  static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r);
  BigInt operator/(const BigInt& o) const;
  BigInt operator%(const BigInt& o) const;

  // Floor division: rounds toward -inf (what the exp bound needs).
  static BigInt floor_div(const BigInt& a, const BigInt& b);

  static int compare(const BigInt& a, const BigInt& b);
  bool operator==(const BigInt& o) const { return compare(*this, o) == 0; }
  bool operator!=(const BigInt& o) const { return compare(*this, o) != 0; }
  bool operator<(const BigInt& o) const { return compare(*this, o) < 0; }
  bool operator<=(const BigInt& o) const { return compare(*this, o) <= 0; }
  bool operator>(const BigInt& o) const { return compare(*this, o) > 0; }
  bool operator>=(const BigInt& o) const { return compare(*this, o) >= 0; }

  static BigInt gcd(BigInt a, BigInt b);

  bool fits_int64() const;
  long long to_int64() const;  // requires fits_int64()
  double to_double() const;    // +-inf on overflow
  double log2_abs() const;     // bit-exact enough for reporting; -inf for 0

  std::string to_string() const;       // exact decimal
  std::string to_summary() const;      // decimal if short, else "~2^<log2>"

 private:
  static int compare_mag(const std::vector<std::uint64_t>& a,
                         const std::vector<std::uint64_t>& b);
  static std::vector<std::uint64_t> add_mag(const std::vector<std::uint64_t>& a,
                                            const std::vector<std::uint64_t>& b);
  // requires |a| >= |b|
  static std::vector<std::uint64_t> sub_mag(const std::vector<std::uint64_t>& a,
                                            const std::vector<std::uint64_t>& b);
  void trim();

  bool negative_ = false;
  std::vector<std::uint64_t> limbs_;  // empty means zero
};

}  // namespace gibbslab::num
