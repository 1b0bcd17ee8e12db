#include <doctest.h>

#include <stdexcept>

#include "gibbslab/proofcheck.hpp"

using namespace gibbslab::chains;
using gibbslab::num::DyadicValue;

TEST_CASE("ground floor holds at m0 = 1 with the literal constants") {
  auto rep = check_step({StepId::ground_floor, 1, std::nullopt}, ExactSchedule::canonical());
  CHECK(rep.holds);
  CHECK(rep.link == "conclusion");
  // lhs <= 2^-20 * 2^-1
  CHECK(rep.rhs.lo.exponent.to_int64() == -21);
  CHECK(rep.lhs.hi.log2_abs() < -1e90);  // astronomically small: ~ 2^(121 - 2^331)
}

TEST_CASE("offdiag steps hold with the stated bounds") {
  auto rep = check_step({StepId::offdiag_pos_k, 3, 2}, ExactSchedule::canonical());
  CHECK(rep.holds);
  CHECK(rep.rhs.lo.exponent.to_int64() == -16 - 2 * 3);

  auto neg = check_step({StepId::offdiag_neg_k, 4, -2}, ExactSchedule::canonical());
  CHECK(neg.holds);
  CHECK(neg.rhs.lo.exponent.to_int64() == -16 - 2 * 4);
}

TEST_CASE("step hypotheses are enforced as range errors") {
  auto s = ExactSchedule::canonical();
  CHECK_THROWS_AS(check_step({StepId::offdiag_neg_k, 2, -2}, s), std::domain_error);
  CHECK_THROWS_AS(check_step({StepId::offdiag_pos_k, 1, 0}, s), std::domain_error);
  CHECK_THROWS_AS(check_step({StepId::case_sign_change, 1, std::nullopt}, s),
                  std::domain_error);
  CHECK_THROWS_AS(check_step({StepId::case_m0_eq_1, 2, std::nullopt}, s),
                  std::domain_error);
}

TEST_CASE("full cases hold for small m0") {
  auto s = ExactSchedule::canonical();
  for (int m0 : {1, 2, 3, 7}) {
    auto reports = check_case(m0, s);
    for (const auto& r : reports) {
      INFO(step_name(r.step.id), " m0=", r.step.m0, " link=", r.link);
      CHECK(r.holds);
    }
    // the last report(s) carry the 2^-12 * 2^-m0 conclusion
    CHECK(reports.back().rhs.lo.exponent.to_int64() == -12 - m0);
  }
}

TEST_CASE("weakened level exponent fails and the failing link is named") {
  auto weak = ExactSchedule::weakened_levels();
  bool some_ground_floor_failed = false;
  std::string failing_link;
  for (int m0 = 1; m0 <= 50 && !some_ground_floor_failed; ++m0) {
    auto rep = check_step({StepId::ground_floor, m0, std::nullopt}, weak);
    if (!rep.holds) {
      some_ground_floor_failed = true;
      failing_link = rep.link;
    }
  }
  CHECK(some_ground_floor_failed);
  CHECK(failing_link == "cube_difference_bound");

  // sign-change case also loses its level-gap link
  auto sc = check_step({StepId::case_sign_change, 2, std::nullopt}, weak);
  CHECK_FALSE(sc.holds);
  CHECK(sc.link == "cube_gap_3m_100");
}

TEST_CASE("determinism: identical inputs give identical serialized reports") {
  auto s = ExactSchedule::canonical();
  auto a = check_case(5, s);
  auto b = check_case(5, s);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].csv_row() == b[i].csv_row());
}

TEST_CASE("float replay agrees with the exact verdict where representable") {
  auto s = ExactSchedule::canonical();
  int checked = 0;
  for (int m0 = 1; m0 <= 12; ++m0) {
    std::vector<ProofStep> steps;
    steps.push_back({StepId::ground_floor, m0, std::nullopt});
    steps.push_back({StepId::noncentral_sum, m0, std::nullopt});
    steps.push_back({StepId::noncentral_atom, m0, std::nullopt});
    for (int k = 1; k <= 6; ++k) steps.push_back({StepId::offdiag_pos_k, m0, k});
    for (int k = -2; k >= -(m0 - 1); --k)
      steps.push_back({StepId::offdiag_neg_k, m0, k});
    if (m0 == 1) steps.push_back({StepId::case_m0_eq_1, m0, std::nullopt});
    else {
      steps.push_back({StepId::case_sign_change, m0, std::nullopt});
      steps.push_back({StepId::case_same_sign, m0, std::nullopt});
    }
    for (const auto& st : steps) {
      auto f = check_step_float(st, s);
      if (!f) continue;
      auto e = check_step(st, s);
      INFO(step_name(st.id), " m0=", m0);
      CHECK(*f == e.holds);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("monotone slack: margins widen with m0") {
  auto s = ExactSchedule::canonical();
  // slack(m0) = rhs / lhs must be nondecreasing; checked via cross products
  // (for ground_floor from m0 = 2 on: m0 = 1 and 2 share the same worst
  // beta = level(1), so the first pair is exempt)
  auto slack_nondecreasing = [&](const StepReport& a, const StepReport& b) {
    auto left = DyadicValue::mul(b.rhs.lo, a.lhs.hi, gibbslab::num::Round::Down);
    auto right = DyadicValue::mul(a.rhs.lo, b.lhs.hi, gibbslab::num::Round::Up);
    return DyadicValue::compare(left, right) >= 0;
  };
  for (int m0 = 2; m0 < 50; ++m0) {
    auto a = check_step({StepId::ground_floor, m0, std::nullopt}, s);
    auto b = check_step({StepId::ground_floor, m0 + 1, std::nullopt}, s);
    CHECK(slack_nondecreasing(a, b));
  }
  for (int k : {1, 3, 7}) {
    for (int m0 = 1; m0 < 50; ++m0) {
      auto a = check_step({StepId::offdiag_pos_k, m0, k}, s);
      auto b = check_step({StepId::offdiag_pos_k, m0 + 1, k}, s);
      CHECK(slack_nondecreasing(a, b));
    }
  }
  for (int k : {-2, -4}) {
    for (int m0 = 1 - k; m0 < 30; ++m0) {
      auto a = check_step({StepId::offdiag_neg_k, m0, k}, s);
      auto b = check_step({StepId::offdiag_neg_k, m0 + 1, k}, s);
      CHECK(slack_nondecreasing(a, b));
    }
  }
}

TEST_CASE("csv rows carry the step identity and exact endpoints") {
  auto rep = check_step({StepId::offdiag_pos_k, 2, 1}, ExactSchedule::canonical());
  auto row = rep.csv_row();
  CHECK(row.substr(0, 13) == "offdiag_pos_k");
  CHECK(row.find(",conclusion") != std::string::npos);
  CHECK(StepReport::csv_header().find("lhs_mantissa") != std::string::npos);
}
