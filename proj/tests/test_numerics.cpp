#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "gibbslab/bigint.hpp"
#include "gibbslab/dyadic.hpp"
#include "gibbslab/log_scalar.hpp"
#include "gibbslab/perron.hpp"
#include "gibbslab/quadrature.hpp"

using namespace gibbslab::num;

namespace {

// test-side exact rational on __int128: independent oracle for enclosures
struct Rat {
  __int128 n = 0, d = 1;
  static __int128 g(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    while (b) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  Rat reduce() const {
    __int128 gg = g(n, d < 0 ? -d : d);
    if (gg == 0) return {0, 1};
    Rat r{n / gg, d / gg};
    if (r.d < 0) {
      r.n = -r.n;
      r.d = -r.d;
    }
    return r;
  }
  Rat operator*(const Rat& o) const { return Rat{n * o.n, d * o.d}.reduce(); }
  Rat operator+(const Rat& o) const { return Rat{n * o.d + o.n * d, d * o.d}.reduce(); }
  bool operator<=(const Rat& o) const { return n * o.d <= o.n * d; }
  bool operator>=(const Rat& o) const { return n * o.d >= o.n * d; }
};

Rat rat_pow2(int e) {
  Rat r{1, 1};
  for (int i = 0; i < std::abs(e); ++i) {
    if (e > 0) r.n *= 2;
    else r.d *= 2;
  }
  return r;
}

double bessel_i0_log(double x) {
  // series I0(x) = sum ((x/2)^(2k) / (k!)^2); converges fast for x = 10
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= (x / 2) * (x / 2) / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return std::log(sum);
}

}  // namespace

TEST_CASE("bigint arithmetic basics") {
  BigInt a(123456789), b(-987654321);
  CHECK((a + b).to_int64() == 123456789 - 987654321);
  CHECK((a * b).to_string() == "-121932631112635269");
  CHECK(BigInt::pow2(100).to_string() == "1267650600228229401496703205376");
  CHECK((BigInt::pow2(70) >> 70).to_int64() == 1);
  CHECK((BigInt(-7) >> 1).to_int64() == -4);  // arithmetic shift, floors

  BigInt q, r;
  BigInt::divmod(BigInt::pow2(200) + BigInt(12345), BigInt::pow2(100), q, r);
  CHECK(q == BigInt::pow2(100));
  CHECK(r.to_int64() == 12345);
  CHECK(BigInt::floor_div(BigInt(-7), BigInt(2)).to_int64() == -4);
  CHECK(BigInt::floor_div(BigInt(7), BigInt(2)).to_int64() == 3);
  CHECK(BigInt::gcd(BigInt(360), BigInt(84)).to_int64() == 12);
}

TEST_CASE("bigint handles checker-scale exponents") {
  // (m0+9)^3 for m0 = 50 gives 205379-bit values
  BigInt big = BigInt::pow2(205379);
  CHECK(big.bit_length() == 205380);
  BigInt less = big - BigInt(1);
  CHECK(less < big);
  CHECK((less + BigInt(1)) == big);
  CHECK(big.to_summary().substr(0, 3) == "~2^");
}

TEST_CASE("dyadic normalization and exact comparison") {
  auto v = DyadicValue::from_ratio_pow2(3, 2, 0);  // 3/2
  CHECK(v.num.to_int64() == 3);
  CHECK(v.den.to_int64() == 2);
  CHECK(v.exponent.to_int64() == 0);

  auto w = DyadicValue::from_ratio_pow2(6, 8, 0);  // 3/4 = (3/2)*2^-1
  CHECK(w.num.to_int64() == 3);
  CHECK(w.exponent.to_int64() == -1);

  CHECK(DyadicValue::compare(v, w) > 0);
  CHECK(DyadicValue::compare(w, w) == 0);
  CHECK(DyadicValue::compare(w.negated(), w) < 0);
}

TEST_CASE("dyadic compare: (3/2)*2^(121 - 2^331) is below 2^-21") {
  BigInt e = BigInt(121) - BigInt::pow2(331);
  auto lhs = DyadicValue::from_ratio_pow2(3, 2, e);
  auto rhs = DyadicValue::from_pow2(BigInt(-21));
  CHECK(DyadicValue::compare(lhs, rhs) < 0);
}

TEST_CASE("dyadic: 2^100*(2+9)^2 - (2+10)^2 >= 100*2") {
  auto lhs = DyadicBound::from_int(11 * 11).times_pow2(BigInt(100)) -
             DyadicBound::from_int(12 * 12);
  auto rhs = DyadicBound::from_int(200);
  CHECK(surely_le(rhs, lhs));
}

TEST_CASE("geometric tail closed form") {
  // sum_{k>=1} 2^-k = 1; the closed-form bound reports upper exactly 1
  auto t = geometric_tail_upper(1);
  CHECK(DyadicValue::compare(t.hi, DyadicValue::one()) == 0);
  // a = 3: true value 1/7, bound 1/4
  auto t3 = geometric_tail_upper(3);
  CHECK(DyadicValue::compare(t3.hi, DyadicValue::from_ratio_pow2(1, 7)) > 0);
  CHECK(DyadicValue::compare(t3.hi, DyadicValue::from_ratio_pow2(1, 2)) < 0);
}

TEST_CASE("exp_neg_upper dominates exp(-x)") {
  for (double x : {0.5, 1.0, 3.0, 7.25, 40.0}) {
    auto xb = DyadicBound::from_ratio_pow2(static_cast<long long>(x * 4), 4);
    auto ub = exp_neg_upper(xb);
    CHECK(ub.hi.log2_abs() * std::log(2.0) >= -x - 1e-12);
    // and it is not absurdly loose: 2^-floor(x) <= 2 * 2^-x
    CHECK(ub.hi.log2_abs() <= -x / std::log(2.0) + x + 1.0);
  }
  // pure power of two argument is floored exactly: exp(-2^5) <= 2^-32
  auto u = exp_neg_upper(DyadicBound::from_pow2(BigInt(5)));
  CHECK(u.hi.exponent.to_int64() == -32);
  // nonpositive lower end collapses to 1
  auto w = exp_neg_upper(DyadicBound::from_int(-3));
  CHECK(DyadicValue::compare(w.hi, DyadicValue::one()) == 0);
}

TEST_CASE("enclosure soundness against exact rational brute force") {
  std::mt19937 rng(20240817);
  std::uniform_int_distribution<int> num(-12, 12), den(1, 9), ex(-6, 6), op(0, 1);
  for (int trial = 0; trial < 400; ++trial) {
    Rat exact{1, 1};
    DyadicBound enc = DyadicBound::from_int(1);
    for (int step = 0; step < 5; ++step) {
      int p = num(rng);
      if (p == 0) p = 1;
      int q = den(rng), e = ex(rng);
      Rat term = Rat{p, q} * rat_pow2(e);
      auto tb = DyadicBound::from_ratio_pow2(p, q, BigInt(e));
      if (op(rng) == 0) {
        exact = exact * term;
        enc = enc * tb;
      } else {
        exact = exact + term;
        enc = enc + tb;
      }
    }
    // exact value must lie inside the enclosure
    auto as_bound = [](const Rat& r) {
      return DyadicBound::from_ratio_pow2(static_cast<long long>(r.n),
                                          static_cast<long long>(r.d));
    };
    CHECK(DyadicValue::compare(enc.lo, as_bound(exact).lo) <= 0);
    CHECK(DyadicValue::compare(enc.hi, as_bound(exact).hi) >= 0);
  }
}

TEST_CASE("dyadic comparison agrees with floating point in machine range") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<long long> num(-4000, 4000);
  std::uniform_int_distribution<int> den(1, 64), ex(-40, 40);
  for (int trial = 0; trial < 500; ++trial) {
    long long p1 = num(rng), p2 = num(rng);
    if (p1 == 0) p1 = 1;
    if (p2 == 0) p2 = -1;
    int q1 = den(rng), q2 = den(rng), e1 = ex(rng), e2 = ex(rng);
    auto a = DyadicValue::from_ratio_pow2(p1, q1, BigInt(e1));
    auto b = DyadicValue::from_ratio_pow2(p2, q2, BigInt(e2));
    double fa = std::ldexp(static_cast<double>(p1) / q1, e1);
    double fb = std::ldexp(static_cast<double>(p2) / q2, e2);
    if (fa == fb) continue;  // float tie can hide an exact difference
    CHECK(DyadicValue::compare(a, b) == (fa < fb ? -1 : 1));
  }
}

TEST_CASE("log scalar sum is stable") {
  auto a = LogScalar::from_log(5000.0);
  auto b = LogScalar::from_log(4990.0);
  auto s = a + b;
  CHECK(s.log() == doctest::Approx(5000.0 + std::log1p(std::exp(-10.0))));
  CHECK((LogScalar::zero() + a).log() == 5000.0);
  CHECK((a * LogScalar::one()).log() == 5000.0);
}

TEST_CASE("log_integrate_exp: unit and constant integrands") {
  auto part = PanelPartition::uniform(8);
  CHECK(log_integrate_exp([](double) { return 0.0; }, part).log() ==
        doctest::Approx(0.0).epsilon(1e-13));
  CHECK(log_integrate_exp([](double) { return 3.25; }, part).log() ==
        doctest::Approx(3.25).epsilon(1e-13));
  CHECK(log_integrate_exp([](double) { return -20000.0; }, part).log() ==
        doctest::Approx(-20000.0).epsilon(1e-13));
}

TEST_CASE("log_integrate_exp matches Bessel I0 series") {
  auto part = PanelPartition::uniform(8);
  double got = log_integrate_exp(
                   [](double t) { return 10.0 * std::cos(2 * M_PI * t); }, part)
                   .log();
  CHECK(got == doctest::Approx(bessel_i0_log(10.0)).epsilon(1e-8));
}

TEST_CASE("log_integrate_exp constant shift invariance") {
  auto part = PanelPartition::uniform(6);
  auto f = [](double t) { return std::sin(2 * M_PI * t) - 0.3 * std::cos(4 * M_PI * t); };
  double base = log_integrate_exp(f, part).log();
  for (double c : {1.0, -250.0, 4000.0}) {
    double shifted = log_integrate_exp([&](double t) { return f(t) + c; }, part).log();
    CHECK(shifted - base == doctest::Approx(c).epsilon(1e-12));
  }
}

TEST_CASE("log_integrate_exp_arc splits additively") {
  auto part = PanelPartition::uniform(4);
  auto f = [](double t) { return 2.0 * std::cos(2 * M_PI * t); };
  double whole = log_integrate_exp(f, part).log();
  double left = log_integrate_exp_arc(f, part, 0.0, 0.37).log();
  double right = log_integrate_exp_arc(f, part, 0.37, 1.0).log();
  CHECK(log_add_exp(left, right) == doctest::Approx(whole).epsilon(1e-11));
}

TEST_CASE("empty partition is rejected") {
  PanelPartition p;
  CHECK_THROWS(log_integrate_exp([](double) { return 0.0; }, p));
}

TEST_CASE("perron: rank one doubling matrix") {
  SparseNonnegMatrix m(2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m.add(i, j, LogScalar::one());
  auto p = perron(m);
  CHECK(p.value.linear() == doctest::Approx(2.0).epsilon(1e-11));
  double pair = std::exp(p.left_log[0] + p.right_log[0]) +
                std::exp(p.left_log[1] + p.right_log[1]);
  CHECK(pair == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("perron: golden mean matrix hits the algebraic root") {
  // oracle: positive root of x^2 = x + 1
  double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  SparseNonnegMatrix m(2);
  m.add(0, 0, LogScalar::one());
  m.add(0, 1, LogScalar::one());
  m.add(1, 0, LogScalar::one());
  auto p = perron(m);
  CHECK(p.value.linear() == doctest::Approx(golden).epsilon(1e-11));
}

TEST_CASE("perron: period-2 permutation converges via damping") {
  SparseNonnegMatrix m(2);
  m.add(0, 1, LogScalar::one());
  m.add(1, 0, LogScalar::one());
  auto p = perron(m);
  CHECK(p.value.linear() == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("perron: transpose agreement and scaling additivity") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  SparseNonnegMatrix m(4);
  for (int i = 0; i < 4; ++i) {
    m.add(i, (i + 1) % 4, LogScalar::from_linear(u(rng)));
    m.add(i, (i + 2) % 4, LogScalar::from_linear(u(rng)));
  }
  auto p = perron(m);
  auto pt = perron(m.transposed());
  CHECK(p.value.log() == doctest::Approx(pt.value.log()).epsilon(1e-10));

  double t = 37.5;
  SparseNonnegMatrix ms(4);
  for (int i = 0; i < 4; ++i)
    for (const auto& e : m.rows[static_cast<std::size_t>(i)])
      ms.add(i, e.col, e.weight * LogScalar::from_linear(t));
  auto psc = perron(ms);
  CHECK(psc.value.log() - p.value.log() == doctest::Approx(std::log(t)).epsilon(1e-10));
}

TEST_CASE("perron rejects reducible support") {
  SparseNonnegMatrix m(2);
  m.add(0, 0, LogScalar::one());
  m.add(0, 1, LogScalar::one());
  CHECK_THROWS_AS(perron(m), std::invalid_argument);
}

TEST_CASE("perron reports the achieved residual when the cap is hit") {
  SparseNonnegMatrix m(2);
  m.add(0, 0, LogScalar::one());
  m.add(0, 1, LogScalar::one());
  m.add(1, 0, LogScalar::one());
  try {
    perron(m, 1e-15, 2);
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
}
