#pragma once

// Exact replay of the inequality chains that pin down the marginal masses of
// the bump-hierarchy construction at its literal constants. Every displayed
// comparison is evaluated as an exact dyadic enclosure; the only
// transcendental inequalities used are exp(-x) <= 2^-x for x >= 0 and the
// coarsening e <= 3 (so every "6e" enters as 18). A step holds only when all
// of its displayed links hold; the first failing link is reported by name,
// which is how weakened schedules are diagnosed.

#include <optional>
#include <string>
#include <vector>

#include "gibbslab/dyadic.hpp"

namespace gibbslab::chains {

// Exact-dyadic schedule: halfwidths and levels are pure powers of two given
// by their (integer) base-2 exponents.
struct ExactSchedule {
  std::string name;
  long long (*halfwidth_log2)(int m);  // negative values (halfwidth < 1)
  long long (*level_log2)(int m);      // strictly increasing

  // halfwidth(m) = 2^-(m+11)^2, level(m) = 2^(m+10)^3
  static ExactSchedule canonical();
  // negative control: level exponent weakened to (m+10)^2
  static ExactSchedule weakened_levels();
};

enum class StepId {
  ground_floor,
  offdiag_pos_k,
  offdiag_neg_k,
  noncentral_sum,
  noncentral_atom,
  case_m0_eq_1,
  case_sign_change,
  case_same_sign,
};

std::string step_name(StepId id);

struct ProofStep {
  StepId id;
  int m0 = 1;
  std::optional<int> k;  // off-diagonal steps only
};

struct StepReport {
  ProofStep step;
  num::DyadicBound lhs;  // failing link's pair, or the conclusion pair
  num::DyadicBound rhs;
  bool holds = false;
  std::string link;  // name of the first failing displayed link, or "conclusion"

  std::string csv_row() const;
  static std::string csv_header();
};

// Throws std::domain_error when the step parameters violate the stated
// hypotheses (e.g. case_sign_change needs m0 >= 2, off-diagonal needs
// m0 + k >= 1 and k outside {0, -1}).
StepReport check_step(const ProofStep& step, const ExactSchedule& sched);

// All constituent steps for a given m0 plus the final aggregate bound(s)
// 2^-12 * 2^-m0; off-diagonal steps are included for k in
// [-(m0-1), k_cap] \ {0, -1}.
std::vector<StepReport> check_case(int m0, const ExactSchedule& sched, int k_cap = 8);

// Floating-point (log2-domain) replay of a step's end-to-end comparison;
// returns nullopt when the magnitudes overflow double range. Used as an
// independent cross-check of the exact verdicts.
std::optional<bool> check_step_float(const ProofStep& step, const ExactSchedule& sched);

}  // namespace gibbslab::chains
