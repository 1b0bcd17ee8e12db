#include "gibbslab/dyadic.hpp"

#include <cmath>
#include <stdexcept>

namespace gibbslab::num {

namespace {

Round flip(Round r) { return r == Round::Down ? Round::Up : Round::Down; }

// rounding direction for the magnitude given the direction for the value
Round mag_dir(int sign, Round dir) { return sign >= 0 ? dir : flip(dir); }

}  // namespace

DyadicValue DyadicValue::from_int(long long v) {
  if (v == 0) return zero();
  return make(v < 0 ? -1 : 1, BigInt(v < 0 ? -v : v), BigInt(1), BigInt(0),
              Round::Down);
}

DyadicValue DyadicValue::from_pow2(BigInt e) {
  DyadicValue r;
  r.sign = 1;
  r.num = 1;
  r.den = 1;
  r.exponent = std::move(e);
  return r;
}

DyadicValue DyadicValue::from_ratio_pow2(long long p, long long q, BigInt e) {
  if (q <= 0) throw std::domain_error("dyadic: nonpositive denominator");
  if (p == 0) return zero();
  int s = p < 0 ? -1 : 1;
  return make(s, BigInt(p < 0 ? -p : p), BigInt(q), std::move(e), Round::Down);
}

DyadicValue DyadicValue::make(int sign, BigInt num, BigInt den, BigInt exponent,
                              Round dir) {
  if (sign == 0 || num.is_zero()) return zero();
  if (den.sign() <= 0 || num.sign() < 0)
    throw std::domain_error("dyadic: mantissa must be a positive rational");

  BigInt g = BigInt::gcd(num, den);
  if (g > BigInt(1)) {
    num = num / g;
    den = den / g;
  }

  // scale mantissa into [1,2), folding powers of two into the exponent
  long long shift = static_cast<long long>(num.bit_length()) -
                    static_cast<long long>(den.bit_length());
  if (shift > 0) {
    den = den << static_cast<std::size_t>(shift);
    exponent += BigInt(shift);
  } else if (shift < 0) {
    num = num << static_cast<std::size_t>(-shift);
    exponent -= BigInt(-shift);
  }
  if (num < den) {  // in [1/2,1): one doubling fixes it
    num = num << 1;
    exponent -= 1;
  }
  {
    // the scaling can reintroduce a common power of two
    BigInt g2 = BigInt::gcd(num, den);
    if (g2 > BigInt(1)) {
      num = num / g2;
      den = den / g2;
    }
  }

  if (num.bit_length() > MANTISSA_BITS || den.bit_length() > MANTISSA_BITS) {
    // outward rounding to a nearby dyadic mantissa t/2^(MANTISSA_BITS-2)
    const std::size_t bits = MANTISSA_BITS - 2;
    BigInt q, r;
    BigInt::divmod(num << bits, den, q, r);
    Round md = mag_dir(sign, dir);
    if (md == Round::Up && !r.is_zero()) q += 1;
    num = q;
    den = BigInt::pow2(bits);
    // q is within one ulp of [2^bits, 2^(bits+1)); renormalize cheaply
    if (num >= (den << 1)) {
      den = den << 1;
      exponent += 1;
    }
    BigInt g2 = BigInt::gcd(num, den);
    if (g2 > BigInt(1)) {
      num = num / g2;
      den = den / g2;
    }
  }

  DyadicValue v;
  v.sign = sign < 0 ? -1 : 1;
  v.num = std::move(num);
  v.den = std::move(den);
  v.exponent = std::move(exponent);
  return v;
}

DyadicValue DyadicValue::negated() const {
  DyadicValue v = *this;
  v.sign = -v.sign;
  return v;
}

DyadicValue DyadicValue::times_pow2(const BigInt& e) const {
  if (is_zero()) return *this;
  DyadicValue v = *this;
  v.exponent += e;
  return v;
}

DyadicValue DyadicValue::reciprocal(Round dir) const {
  if (is_zero()) throw std::domain_error("dyadic: reciprocal of zero");
  return make(sign, den, num, -exponent, dir);
}

DyadicValue DyadicValue::mul(const DyadicValue& a, const DyadicValue& b, Round dir) {
  if (a.is_zero() || b.is_zero()) return zero();
  int s = a.sign * b.sign;
  return make(s, a.num * b.num, a.den * b.den, a.exponent + b.exponent, dir);
}

DyadicValue DyadicValue::add(const DyadicValue& a, const DyadicValue& b, Round dir) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const DyadicValue& hi = BigInt::compare(a.exponent, b.exponent) >= 0 ? a : b;
  const DyadicValue& lo = (&hi == &a) ? b : a;
  BigInt gap = hi.exponent - lo.exponent;

  // beyond mantissa resolution the small term only matters as a nudge
  const long long kExactGap = 3 * static_cast<long long>(MANTISSA_BITS);
  if (!gap.fits_int64() || gap.to_int64() > kExactGap) {
    DyadicValue nudge = from_pow2(hi.exponent - BigInt(kExactGap - 8));
    if (lo.sign < 0) nudge.sign = -1;
    bool keep = (lo.sign > 0) ? (dir == Round::Down) : (dir == Round::Up);
    if (keep) return hi;
    return add(hi, nudge, dir);  // small gap now, exact path below
  }

  std::size_t g = static_cast<std::size_t>(gap.to_int64());
  // signed numerators over common denominator, at lo's exponent
  BigInt na = (hi.num << g) * lo.den;
  if (hi.sign < 0) na = -na;
  BigInt nb = lo.num * hi.den;
  if (lo.sign < 0) nb = -nb;
  BigInt n = na + nb;
  if (n.is_zero()) return zero();
  int s = n.sign();
  if (s < 0) n = -n;
  return make(s, std::move(n), hi.den * lo.den, lo.exponent, dir);
}

int DyadicValue::compare(const DyadicValue& a, const DyadicValue& b) {
  if (a.sign != b.sign) return a.sign < b.sign ? -1 : 1;
  if (a.sign == 0) return 0;
  int flipneg = a.sign;
  int ec = BigInt::compare(a.exponent, b.exponent);
  if (ec != 0) return flipneg * ec;  // mantissa in [1,2) makes this valid
  BigInt lhs = a.num * b.den;
  BigInt rhs = b.num * a.den;
  return flipneg * BigInt::compare(lhs, rhs);
}

double DyadicValue::log2_abs() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  return exponent.to_double() + std::log2(num.to_double() / den.to_double());
}

std::string DyadicValue::mantissa_string() const {
  if (is_zero()) return "0";
  std::string s = sign < 0 ? "-" : "";
  s += num.to_string();
  if (!(den == BigInt(1))) {
    s += "/";
    s += den.to_string();
  }
  return s;
}

std::string DyadicValue::exponent_string() const {
  if (is_zero()) return "0";
  return exponent.to_summary();
}

DyadicBound::DyadicBound(DyadicValue l, DyadicValue h) : lo(std::move(l)), hi(std::move(h)) {
  if (DyadicValue::compare(lo, hi) > 0)
    throw std::logic_error("dyadic bound: lower endpoint exceeds upper");
}

DyadicBound DyadicBound::operator*(const DyadicBound& o) const {
  const DyadicValue* as[2] = {&lo, &hi};
  const DyadicValue* bs[2] = {&o.lo, &o.hi};
  DyadicValue best_lo, best_hi;
  bool first = true;
  for (const auto* a : as) {
    for (const auto* b : bs) {
      DyadicValue d = DyadicValue::mul(*a, *b, Round::Down);
      DyadicValue u = DyadicValue::mul(*a, *b, Round::Up);
      if (first || DyadicValue::compare(d, best_lo) < 0) best_lo = d;
      if (first || DyadicValue::compare(u, best_hi) > 0) best_hi = u;
      first = false;
    }
  }
  return DyadicBound{best_lo, best_hi};
}

DyadicBound DyadicBound::operator+(const DyadicBound& o) const {
  return DyadicBound{DyadicValue::add(lo, o.lo, Round::Down),
                     DyadicValue::add(hi, o.hi, Round::Up)};
}

DyadicBound DyadicBound::operator-(const DyadicBound& o) const {
  return *this + o.negated();
}

DyadicBound DyadicBound::reciprocal() const {
  if (lo.sign <= 0)
    throw std::domain_error("dyadic bound: reciprocal needs a positive enclosure");
  return DyadicBound{hi.reciprocal(Round::Down), lo.reciprocal(Round::Up)};
}

DyadicBound sum_enclose(std::span<const DyadicBound> terms) {
  DyadicBound acc = DyadicBound::from_int(0);
  for (const auto& t : terms) acc = acc + t;
  return acc;
}

DyadicBound sum_enclose(std::initializer_list<DyadicBound> terms) {
  return sum_enclose(std::span<const DyadicBound>(terms.begin(), terms.size()));
}

DyadicBound exp_neg_upper(const DyadicBound& x) {
  const DyadicValue& v = x.lo;
  if (v.sign <= 0) return DyadicBound{DyadicValue::zero(), DyadicValue::one()};
  // t = floor((num/den) * 2^e) with the value's exponent e
  BigInt t;
  if (v.exponent.sign() < 0) {
    t = 0;  // value < 1
  } else {
    if (!v.exponent.fits_int64() || v.exponent.to_int64() > (1ll << 24))
      throw std::runtime_error(
          "dyadic: exp argument exponent too large to floor");
    std::size_t e = static_cast<std::size_t>(v.exponent.to_int64());
    const std::size_t direct = 4096;
    if (e <= direct) {
      t = BigInt::floor_div(v.num << e, v.den);
    } else {
      // floor at reduced precision, then shift: still an integer <= value
      t = BigInt::floor_div(v.num << direct, v.den) << (e - direct);
    }
  }
  return DyadicBound{DyadicValue::zero(), DyadicValue::from_pow2(-t)};
}

bool surely_le(const DyadicBound& a, const DyadicBound& b) {
  return DyadicValue::compare(a.hi, b.lo) <= 0;
}

bool surely_lt(const DyadicBound& a, const DyadicBound& b) {
  return DyadicValue::compare(a.hi, b.lo) < 0;
}

DyadicBound geometric_tail_upper(long long a) {
  if (a < 1) throw std::domain_error("geometric tail: ratio exponent must be >= 1");
  return DyadicBound{DyadicValue::zero(),
                     DyadicValue::from_pow2(BigInt(-(a - 1)))};
}

}  // namespace gibbslab::num
