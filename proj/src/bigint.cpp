#include "gibbslab/bigint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gibbslab::num {

namespace {
using u64 = std::uint64_t;
using u128 = unsigned __int128;
}  // namespace

BigInt::BigInt(long long v) {
  if (v == 0) return;
  negative_ = v < 0;
  // avoid UB on LLONG_MIN
  u64 mag = negative_ ? (~static_cast<u64>(v) + 1) : static_cast<u64>(v);
  limbs_.push_back(mag);
}

BigInt BigInt::pow2(std::size_t n) {
  BigInt r;
  r.limbs_.assign(n / 64 + 1, 0);
  r.limbs_.back() = u64{1} << (n % 64);
  return r;
}

void BigInt::trim() {
  while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  if (limbs_.empty()) negative_ = false;
}

std::size_t BigInt::bit_length() const {
  if (limbs_.empty()) return 0;
  std::size_t top = 64 - static_cast<std::size_t>(__builtin_clzll(limbs_.back()));
  return (limbs_.size() - 1) * 64 + top;
}

bool BigInt::bit(std::size_t i) const {
  std::size_t limb = i / 64;
  if (limb >= limbs_.size()) return false;
  return (limbs_[limb] >> (i % 64)) & 1u;
}

int BigInt::compare_mag(const std::vector<u64>& a, const std::vector<u64>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

std::vector<u64> BigInt::add_mag(const std::vector<u64>& a, const std::vector<u64>& b) {
  const std::vector<u64>& big = a.size() >= b.size() ? a : b;
  const std::vector<u64>& small = a.size() >= b.size() ? b : a;
  std::vector<u64> r(big.size() + 1, 0);
  u64 carry = 0;
  for (std::size_t i = 0; i < big.size(); ++i) {
    u128 s = static_cast<u128>(big[i]) + (i < small.size() ? small[i] : 0) + carry;
    r[i] = static_cast<u64>(s);
    carry = static_cast<u64>(s >> 64);
  }
  r[big.size()] = carry;
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

std::vector<u64> BigInt::sub_mag(const std::vector<u64>& a, const std::vector<u64>& b) {
  std::vector<u64> r(a.size(), 0);
  u64 borrow = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    u64 bi = i < b.size() ? b[i] : 0;
    u64 ai = a[i];
    u64 d = ai - bi - borrow;
    borrow = (ai < bi + borrow || (bi + borrow < bi)) ? 1 : 0;
    r[i] = d;
  }
  while (!r.empty() && r.back() == 0) r.pop_back();
  return r;
}

int BigInt::compare(const BigInt& a, const BigInt& b) {
  if (a.sign() != b.sign()) return a.sign() < b.sign() ? -1 : 1;
  int m = compare_mag(a.limbs_, b.limbs_);
  return a.negative_ ? -m : m;
}

BigInt BigInt::operator-() const {
  BigInt r = *this;
  if (!r.is_zero()) r.negative_ = !r.negative_;
  return r;
}

BigInt BigInt::operator+(const BigInt& o) const {
  BigInt r;
  if (negative_ == o.negative_) {
    r.negative_ = negative_;
    r.limbs_ = add_mag(limbs_, o.limbs_);
  } else {
    int c = compare_mag(limbs_, o.limbs_);
    if (c == 0) return BigInt{};
    if (c > 0) {
      r.negative_ = negative_;
      r.limbs_ = sub_mag(limbs_, o.limbs_);
    } else {
      r.negative_ = o.negative_;
      r.limbs_ = sub_mag(o.limbs_, limbs_);
    }
  }
  r.trim();
  return r;
}

BigInt BigInt::operator-(const BigInt& o) const { return *this + (-o); }

BigInt BigInt::operator*(const BigInt& o) const {
  if (is_zero() || o.is_zero()) return BigInt{};
  BigInt r;
  r.negative_ = negative_ != o.negative_;
  r.limbs_.assign(limbs_.size() + o.limbs_.size(), 0);
  for (std::size_t i = 0; i < limbs_.size(); ++i) {
    u64 carry = 0;
    for (std::size_t j = 0; j < o.limbs_.size(); ++j) {
      u128 cur = static_cast<u128>(limbs_[i]) * o.limbs_[j] + r.limbs_[i + j] + carry;
      r.limbs_[i + j] = static_cast<u64>(cur);
      carry = static_cast<u64>(cur >> 64);
    }
    std::size_t k = i + o.limbs_.size();
    while (carry) {
      u128 cur = static_cast<u128>(r.limbs_[k]) + carry;
      r.limbs_[k] = static_cast<u64>(cur);
      carry = static_cast<u64>(cur >> 64);
      ++k;
    }
  }
  r.trim();
  return r;
}

BigInt BigInt::operator<<(std::size_t n) const {
  if (is_zero() || n == 0) return *this;
  std::size_t words = n / 64, bits = n % 64;
  BigInt r;
  r.negative_ = negative_;
  r.limbs_.assign(limbs_.size() + words + 1, 0);
  for (std::size_t i = 0; i < limbs_.size(); ++i) {
    r.limbs_[i + words] |= bits ? (limbs_[i] << bits) : limbs_[i];
    if (bits) r.limbs_[i + words + 1] |= limbs_[i] >> (64 - bits);
  }
  r.trim();
  return r;
}

BigInt BigInt::operator>>(std::size_t n) const {
  if (is_zero()) return *this;
  std::size_t words = n / 64, bits = n % 64;
  BigInt r;
  if (words >= limbs_.size()) {
    return negative_ ? BigInt(-1) : BigInt(0);
  }
  r.negative_ = negative_;
  r.limbs_.assign(limbs_.begin() + static_cast<long>(words), limbs_.end());
  if (bits) {
    for (std::size_t i = 0; i < r.limbs_.size(); ++i) {
      r.limbs_[i] >>= bits;
      if (i + 1 < r.limbs_.size()) r.limbs_[i] |= r.limbs_[i + 1] << (64 - bits);
    }
  }
  r.trim();
  if (negative_) {
    // arithmetic shift: round toward -inf when any bit was dropped
    bool dropped = false;
    for (std::size_t i = 0; i < words && !dropped; ++i) dropped = limbs_[i] != 0;
    if (!dropped && bits) dropped = (limbs_[words] & ((u64{1} << bits) - 1)) != 0;
    if (dropped) r -= 1;
  }
  return r;
}

void BigInt::divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
  if (b.is_zero()) throw std::domain_error("BigInt: division by zero");
  int cm = compare_mag(a.limbs_, b.limbs_);
  if (cm < 0) {
    q = BigInt{};
    r = a;
    return;
  }
  // schoolbook bit-at-a-time long division on magnitudes; divisors in this
  // codebase are short (mantissas), dividends may be very long
  std::size_t n = a.bit_length();
  BigInt rem, quo;
  quo.limbs_.assign(n / 64 + 1, 0);
  for (std::size_t i = n; i-- > 0;) {
    rem = rem << 1;
    if (a.bit(i)) {
      if (rem.limbs_.empty()) rem.limbs_.push_back(1);
      else rem.limbs_[0] |= 1;
    }
    if (compare_mag(rem.limbs_, b.limbs_) >= 0) {
      rem.limbs_ = sub_mag(rem.limbs_, b.limbs_);
      quo.limbs_[i / 64] |= u64{1} << (i % 64);
    }
  }
  quo.trim();
  rem.trim();
  quo.negative_ = !quo.is_zero() && (a.negative_ != b.negative_);
  rem.negative_ = !rem.is_zero() && a.negative_;
  q = quo;
  r = rem;
}

BigInt BigInt::operator/(const BigInt& o) const {
  BigInt q, r;
  divmod(*this, o, q, r);
  return q;
}

BigInt BigInt::operator%(const BigInt& o) const {
  BigInt q, r;
  divmod(*this, o, q, r);
  return r;
}

BigInt BigInt::floor_div(const BigInt& a, const BigInt& b) {
  BigInt q, r;
  divmod(a, b, q, r);
  if (!r.is_zero() && (a.is_negative() != b.is_negative())) q -= 1;
  return q;
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
  a.negative_ = false;
  b.negative_ = false;
  while (!b.is_zero()) {
    BigInt r = a % b;
    a = b;
    b = r;
  }
  return a;
}

bool BigInt::fits_int64() const {
  if (limbs_.size() > 1) return false;
  if (limbs_.empty()) return true;
  if (negative_) return limbs_[0] <= (u64{1} << 63);
  return limbs_[0] < (u64{1} << 63);
}

long long BigInt::to_int64() const {
  if (limbs_.empty()) return 0;
  u64 m = limbs_[0];
  return negative_ ? -static_cast<long long>(m - 1) - 1 : static_cast<long long>(m);
}

double BigInt::to_double() const {
  if (limbs_.empty()) return 0.0;
  double v = 0.0;
  std::size_t start = limbs_.size() > 2 ? limbs_.size() - 2 : 0;
  for (std::size_t i = limbs_.size(); i-- > start;) {
    v = v * 18446744073709551616.0 + static_cast<double>(limbs_[i]);
  }
  v = std::ldexp(v, static_cast<int>(start) * 64);
  return negative_ ? -v : v;
}

double BigInt::log2_abs() const {
  if (limbs_.empty()) return -std::numeric_limits<double>::infinity();
  std::size_t n = bit_length();
  // top 64 bits normalized into [1,2)
  u64 top = 0;
  for (std::size_t i = 0; i < 64; ++i) {
    std::size_t b = n - 1 - i;
    top = (top << 1) | (bit(b) ? 1u : 0u);
    if (b == 0) {
      top <<= (63 - i);
      break;
    }
  }
  double frac = static_cast<double>(top) / 9223372036854775808.0;  // in [1,2)
  return static_cast<double>(n - 1) + std::log2(frac);
}

std::string BigInt::to_string() const {
  if (limbs_.empty()) return "0";
  std::vector<u64> work = limbs_;
  std::string out;
  // divide by 10^19 repeatedly
  const u64 base = 10000000000000000000ull;
  while (!work.empty()) {
    u128 rem = 0;
    for (std::size_t i = work.size(); i-- > 0;) {
      u128 cur = (rem << 64) | work[i];
      work[i] = static_cast<u64>(cur / base);
      rem = cur % base;
    }
    while (!work.empty() && work.back() == 0) work.pop_back();
    u64 chunk = static_cast<u64>(rem);
    for (int d = 0; d < 19; ++d) {
      out.push_back(static_cast<char>('0' + chunk % 10));
      chunk /= 10;
    }
  }
  while (out.size() > 1 && out.back() == '0') out.pop_back();
  if (negative_) out.push_back('-');
  std::reverse(out.begin(), out.end());
  return out;
}

std::string BigInt::to_summary() const {
  if (bit_length() <= 212) return to_string();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s~2^%.6f", negative_ ? "-" : "", log2_abs());
  return buf;
}

}  // namespace gibbslab::num
