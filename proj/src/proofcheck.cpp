#include "gibbslab/proofcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace gibbslab::chains {

using num::BigInt;
using num::DyadicBound;
using num::DyadicValue;
using num::exp_neg_upper;
using num::geometric_tail_upper;
using num::sum_enclose;
using num::surely_le;

namespace {

long long canonical_w(int m) { return -static_cast<long long>(m + 11) * (m + 11); }
long long canonical_l(int m) {
  long long b = m + 10;
  return b * b * b;
}
long long weak_l(int m) { return static_cast<long long>(m + 10) * (m + 10); }

DyadicBound pow2(long long e) { return DyadicBound::from_pow2(BigInt(e)); }

// chain evaluator: keeps the first failing displayed link
struct Chain {
  StepReport rep;
  bool ok = true;

  explicit Chain(ProofStep s) { rep.step = s; }

  void require(const char* name, const DyadicBound& lhs, const DyadicBound& rhs) {
    if (!ok) return;
    if (!surely_le(lhs, rhs)) {
      ok = false;
      rep.lhs = lhs;
      rep.rhs = rhs;
      rep.link = name;
    }
  }
  StepReport conclude(const DyadicBound& lhs, const DyadicBound& rhs) {
    if (ok) {
      rep.lhs = lhs;
      rep.rhs = rhs;
      rep.link = "conclusion";
      rep.holds = surely_le(lhs, rhs);
    } else {
      rep.holds = false;
    }
    return rep;
  }
};

struct Quantities {
  const ExactSchedule& s;

  DyadicBound level(int m) const { return pow2(s.level_log2(m)); }
  DyadicBound inv_level(int m) const { return pow2(-s.level_log2(m)); }

  // Leb of the anchor annulus pair M_m: 2 * (2/3 - lo) * h(m-1) with
  // lo = max(1/3, (9/8) h(m)/h(m-1)); canonical schedules give (2/3) h(m-1)
  DyadicBound anchor_width(int m) const {
    DyadicBound ratio = pow2(s.halfwidth_log2(m) - s.halfwidth_log2(m - 1));
    DyadicBound lo = DyadicBound::from_ratio_pow2(9, 8) * ratio;
    DyadicBound third = DyadicBound::from_ratio_pow2(1, 3);
    if (surely_le(lo, third)) lo = third;
    DyadicBound span = DyadicBound::from_ratio_pow2(2, 3) - lo;
    if (span.lo.sign <= 0)
      throw std::domain_error("anchor annulus: halfwidths too coarse");
    return DyadicBound::from_int(2) * span *
           pow2(s.halfwidth_log2(m - 1));
  }

  // Leb(shell m) <= 4 h(m-1); shell m sits between consecutive Y sets
  DyadicBound shell_width(int m) const {
    return DyadicBound::from_int(4) * pow2(s.halfwidth_log2(m - 1));
  }

  DyadicBound width_ratio(int shell_m, int anchor_m) const {
    return shell_width(shell_m) * anchor_width(anchor_m).reciprocal();
  }
};

StepReport do_ground_floor(const ProofStep& st, const ExactSchedule& s) {
  if (st.m0 < 1) throw std::domain_error("ground_floor: requires m0 >= 1");
  Quantities q{s};
  Chain c(st);
  const int m0 = st.m0;
  // the nine-tenths step needs level(m0) >= 10 level(0)
  c.require("level_gap_tenth", q.inv_level(m0),
            DyadicBound::from_ratio_pow2(1, 10) * q.inv_level(0));
  if (m0 >= 2) {
    long long poly = static_cast<long long>(m0 - 1) *
                     (static_cast<long long>(m0 + 9) * (m0 + 9) + 100);
    c.require("cube_difference_bound", DyadicBound::from_int(poly),
              DyadicBound::from_int(s.level_log2(m0 - 1) - s.level_log2(0)));
    c.require("power_beats_square",
              pow2(100) * DyadicBound::from_int(static_cast<long long>(m0 + 9) * (m0 + 9)),
              DyadicBound::exact(DyadicValue::from_pow2(BigInt(poly))));
    c.require("hundred_m0", DyadicBound::from_int(100ll * m0),
              pow2(100) * DyadicBound::from_int(static_cast<long long>(m0 + 9) * (m0 + 9)) -
                  DyadicBound::from_int(static_cast<long long>(m0 + 10) * (m0 + 10)));
  }
  // worst beta for the decay factor: beta = level(1) when m0 = 1 (forced),
  // beta >= level(m0-1) otherwise
  DyadicBound beta = q.level(m0 == 1 ? 1 : m0 - 1);
  DyadicBound x = beta * (q.inv_level(0) - q.inv_level(m0));
  DyadicBound lhs = q.anchor_width(m0).reciprocal() * exp_neg_upper(x);
  return c.conclude(lhs, pow2(-20 - m0));
}

StepReport do_offdiag_pos(const ProofStep& st, const ExactSchedule& s) {
  if (!st.k || *st.k < 1) throw std::domain_error("offdiag_pos_k: requires k >= 1");
  if (st.m0 < 1) throw std::domain_error("offdiag_pos_k: requires m0 >= 1");
  Quantities q{s};
  Chain c(st);
  const int m0 = st.m0, k = *st.k;
  // beta <= level(m0) by the choice of m0, so the growth factor
  // exp(beta / level(m0)) is at most e, coarsened to 3; "6e" enters as 18
  DyadicBound ratio = q.width_ratio(m0 + k, m0);
  DyadicBound lhs_end = DyadicBound::from_int(3) * ratio;
  c.require("shell_ratio_power", lhs_end,
            DyadicBound::from_int(9) * pow2(-2ll * k * (m0 + 10)));
  c.require("exponent_slack", DyadicBound::from_int(9) * pow2(-2ll * k * (m0 + 10)),
            DyadicBound::from_int(9) * pow2(-20ll - static_cast<long long>(k) * m0));
  c.require("nine_below_sixteen",
            DyadicBound::from_int(9) * pow2(-20ll - static_cast<long long>(k) * m0),
            pow2(-16ll - static_cast<long long>(k) * m0));
  return c.conclude(lhs_end, pow2(-16ll - static_cast<long long>(k) * m0));
}

StepReport do_offdiag_neg(const ProofStep& st, const ExactSchedule& s) {
  if (!st.k || *st.k > -2) throw std::domain_error("offdiag_neg_k: requires k <= -2");
  if (st.m0 + *st.k < 1)
    throw std::domain_error("offdiag_neg_k: requires m0 + k >= 1");
  Quantities q{s};
  Chain c(st);
  const int m0 = st.m0, k = *st.k;
  const long long ak = -k;
  c.require("level_gap_tenth", q.inv_level(m0),
            DyadicBound::from_ratio_pow2(1, 10) * q.inv_level(m0 + k));
  c.require("cube_difference_bound",
            DyadicBound::from_int(10 * ak * (m0 + 10)),
            DyadicBound::from_int(s.level_log2(m0 - 1) - s.level_log2(m0 + k)));
  c.require("tower_beats_linear", DyadicBound::from_int(5 * ak * (m0 + 10)),
            pow2(10 * ak * (m0 + 10)));
  c.require("polynomial_slack",
            DyadicBound::from_int(6) * pow2(-3 * ak * (m0 + 10)),
            pow2(-20 - 3 * ak * m0));
  c.require("coarse_to_final", pow2(-20 - 3 * ak * m0), pow2(-16 - ak * m0));
  DyadicBound x = q.level(m0 - 1) * (q.inv_level(m0 + k) - q.inv_level(m0));
  DyadicBound lhs = q.width_ratio(m0 + k, m0) * exp_neg_upper(x);
  return c.conclude(lhs, pow2(-16 - ak * m0));
}

StepReport do_noncentral_sum(const ProofStep& st, const ExactSchedule&) {
  if (st.m0 < 1) throw std::domain_error("noncentral_sum: requires m0 >= 1");
  Chain c(st);
  const int m0 = st.m0;
  DyadicBound tail = geometric_tail_upper(m0);
  DyadicBound total = sum_enclose(
      {pow2(-20 - m0), DyadicBound::from_int(2) * pow2(-16) * tail});
  return c.conclude(total, pow2(-13 - m0));
}

StepReport do_noncentral_atom(const ProofStep& st, const ExactSchedule& s) {
  if (st.m0 < 1) throw std::domain_error("noncentral_atom: requires m0 >= 1");
  Quantities q{s};
  Chain c(st);
  const int m0 = st.m0;
  // the exp factors at level m0 cancel between shell remainder and anchor
  DyadicBound lhs = DyadicBound::from_int(2) * pow2(s.halfwidth_log2(m0)) *
                    q.anchor_width(m0).reciprocal();
  return c.conclude(lhs, pow2(-19 - m0));
}

StepReport do_case_m0_eq_1(const ProofStep& st, const ExactSchedule&) {
  if (st.m0 != 1) throw std::domain_error("case_m0_eq_1: requires m0 = 1");
  Chain c(st);
  DyadicBound total = sum_enclose({pow2(-13 - 1), pow2(-19 - 1)});
  return c.conclude(total, pow2(-12 - 1));
}

StepReport do_case_sign_change(const ProofStep& st, const ExactSchedule& s) {
  if (st.m0 < 2) throw std::domain_error("case_sign_change: requires m0 >= 2");
  Quantities q{s};
  Chain c(st);
  const int m0 = st.m0;
  c.require("cube_gap_3m_100", DyadicBound::from_int(3ll * m0 + 100),
            DyadicBound::from_int(s.level_log2(m0) - s.level_log2(m0 - 1)));
  c.require("tower_collapse",
            DyadicBound::from_int(18) * pow2(2ll * m0 + 19) *
                exp_neg_upper(pow2(3ll * m0 + 100)),
            DyadicBound::from_int(6) * pow2(-m0 - 30));
  c.require("coarse_to_final", DyadicBound::from_int(6) * pow2(-m0 - 30),
            pow2(-20 - m0));
  // sign change forces beta = level(m0) exactly; the shed factor e is
  // already inside exp(-(2^D - 1))
  DyadicBound x = q.level(m0) * (q.inv_level(m0 - 1) - q.inv_level(m0));
  c.require("end_to_end", q.width_ratio(m0 - 1, m0) * exp_neg_upper(x),
            pow2(-20 - m0));
  DyadicBound total =
      sum_enclose({pow2(-13 - m0), pow2(-20 - m0), pow2(-19 - m0)});
  return c.conclude(total, pow2(-12 - m0));
}

StepReport do_case_same_sign(const ProofStep& st, const ExactSchedule& s) {
  if (st.m0 < 2) throw std::domain_error("case_same_sign: requires m0 >= 2");
  Quantities q{s};
  Chain c(st);
  const int m0 = st.m0;
  // companion anchor one level down; exp factors cancel as in the atom step
  DyadicBound aux = DyadicBound::from_int(2) * pow2(s.halfwidth_log2(m0 - 1)) *
                    q.anchor_width(m0 - 1).reciprocal();
  c.require("companion_shell", aux, pow2(-17 - m0));
  DyadicBound total =
      sum_enclose({pow2(-13 - m0), pow2(-19 - m0), pow2(-17 - m0)});
  return c.conclude(total, pow2(-12 - m0));
}

}  // namespace

ExactSchedule ExactSchedule::canonical() {
  return ExactSchedule{"canonical", &canonical_w, &canonical_l};
}

ExactSchedule ExactSchedule::weakened_levels() {
  return ExactSchedule{"weakened_levels", &canonical_w, &weak_l};
}

std::string step_name(StepId id) {
  switch (id) {
    case StepId::ground_floor: return "ground_floor";
    case StepId::offdiag_pos_k: return "offdiag_pos_k";
    case StepId::offdiag_neg_k: return "offdiag_neg_k";
    case StepId::noncentral_sum: return "noncentral_sum";
    case StepId::noncentral_atom: return "noncentral_atom";
    case StepId::case_m0_eq_1: return "case_m0_eq_1";
    case StepId::case_sign_change: return "case_sign_change";
    case StepId::case_same_sign: return "case_same_sign";
  }
  return "?";
}

std::string StepReport::csv_header() {
  return "step,m0,k,lhs_mantissa,lhs_exponent,rhs_mantissa,rhs_exponent,holds,link";
}

std::string StepReport::csv_row() const {
  std::string row = step_name(step.id);
  row += "," + std::to_string(step.m0);
  row += ",";
  if (step.k) row += std::to_string(*step.k);
  row += "," + lhs.hi.mantissa_string();
  row += "," + lhs.hi.exponent_string();
  row += "," + rhs.lo.mantissa_string();
  row += "," + rhs.lo.exponent_string();
  row += holds ? ",1," : ",0,";
  row += link;
  return row;
}

StepReport check_step(const ProofStep& step, const ExactSchedule& sched) {
  switch (step.id) {
    case StepId::ground_floor: return do_ground_floor(step, sched);
    case StepId::offdiag_pos_k: return do_offdiag_pos(step, sched);
    case StepId::offdiag_neg_k: return do_offdiag_neg(step, sched);
    case StepId::noncentral_sum: return do_noncentral_sum(step, sched);
    case StepId::noncentral_atom: return do_noncentral_atom(step, sched);
    case StepId::case_m0_eq_1: return do_case_m0_eq_1(step, sched);
    case StepId::case_sign_change: return do_case_sign_change(step, sched);
    case StepId::case_same_sign: return do_case_same_sign(step, sched);
  }
  throw std::logic_error("check_step: unknown step id");
}

std::vector<StepReport> check_case(int m0, const ExactSchedule& sched, int k_cap) {
  if (m0 < 1) throw std::domain_error("check_case: requires m0 >= 1");
  std::vector<StepReport> out;
  out.push_back(check_step({StepId::ground_floor, m0, std::nullopt}, sched));
  for (int k = -(m0 - 1); k <= -2; ++k)
    out.push_back(check_step({StepId::offdiag_neg_k, m0, k}, sched));
  for (int k = 1; k <= k_cap; ++k)
    out.push_back(check_step({StepId::offdiag_pos_k, m0, k}, sched));
  out.push_back(check_step({StepId::noncentral_sum, m0, std::nullopt}, sched));
  out.push_back(check_step({StepId::noncentral_atom, m0, std::nullopt}, sched));
  if (m0 == 1) {
    out.push_back(check_step({StepId::case_m0_eq_1, m0, std::nullopt}, sched));
  } else {
    out.push_back(check_step({StepId::case_sign_change, m0, std::nullopt}, sched));
    out.push_back(check_step({StepId::case_same_sign, m0, std::nullopt}, sched));
  }
  return out;
}

std::optional<bool> check_step_float(const ProofStep& step, const ExactSchedule& s) {
  const int m0 = step.m0;
  auto finite = [](double v) { return std::isfinite(v); };
  auto w = [&](int m) { return static_cast<double>(s.halfwidth_log2(m)); };
  auto l = [&](int m) { return static_cast<double>(s.level_log2(m)); };
  double lhs_log2, rhs_log2;
  switch (step.id) {
    case StepId::ground_floor: {
      double lb = l(m0 == 1 ? 1 : m0 - 1);
      double x = std::exp2(lb - l(0)) - std::exp2(lb - l(m0));
      if (!finite(x)) return std::nullopt;
      lhs_log2 = std::log2(1.5) - w(m0 - 1) - std::floor(x);
      rhs_log2 = -20.0 - m0;
      break;
    }
    case StepId::offdiag_pos_k: {
      int k = step.k.value();
      lhs_log2 = std::log2(18.0) + w(m0 + k - 1) - w(m0 - 1);
      rhs_log2 = -16.0 - static_cast<double>(k) * m0;
      break;
    }
    case StepId::offdiag_neg_k: {
      int k = step.k.value();
      double x = std::exp2(l(m0 - 1) - l(m0 + k)) - std::exp2(l(m0 - 1) - l(m0));
      if (!finite(x)) return std::nullopt;
      lhs_log2 = std::log2(6.0) + w(m0 + k - 1) - w(m0 - 1) - std::floor(x);
      rhs_log2 = -16.0 + static_cast<double>(k) * m0;
      break;
    }
    case StepId::noncentral_sum: {
      lhs_log2 = std::log2(std::exp2(-20.0 - m0) + std::exp2(-15.0 - (m0 - 1)));
      rhs_log2 = -13.0 - m0;
      break;
    }
    case StepId::noncentral_atom: {
      lhs_log2 = std::log2(3.0) + w(m0) - w(m0 - 1);
      rhs_log2 = -19.0 - m0;
      break;
    }
    case StepId::case_m0_eq_1: {
      lhs_log2 = std::log2(std::exp2(-14.0) + std::exp2(-20.0));
      rhs_log2 = -13.0;
      break;
    }
    case StepId::case_sign_change: {
      double x = std::exp2(l(m0) - l(m0 - 1)) - 1.0;
      if (!finite(x)) return std::nullopt;
      double end = std::log2(6.0) + w(m0 - 2) - w(m0 - 1) - std::floor(x);
      if (end > -20.0 - m0) {
        lhs_log2 = end;
        rhs_log2 = -20.0 - m0;
        break;
      }
      lhs_log2 = std::log2(std::exp2(-13.0) + std::exp2(-20.0) + std::exp2(-19.0)) - m0;
      rhs_log2 = -12.0 - m0;
      break;
    }
    case StepId::case_same_sign: {
      double aux = std::log2(3.0) + w(m0 - 1) - w(m0 - 2);
      if (aux > -17.0 - m0) {
        lhs_log2 = aux;
        rhs_log2 = -17.0 - m0;
        break;
      }
      lhs_log2 = std::log2(std::exp2(-13.0) + std::exp2(-19.0) + std::exp2(-17.0)) - m0;
      rhs_log2 = -12.0 - m0;
      break;
    }
    default:
      return std::nullopt;
  }
  if (!finite(lhs_log2) || !finite(rhs_log2)) return std::nullopt;
  return lhs_log2 <= rhs_log2;
}

}  // namespace gibbslab::chains
