#pragma once

// Distance potentials over the ladder targets, depth-k truncations, transfer
// operator equilibrium states, and the numerically calibrated (beta, eps)
// schedules that make the family's masses flip with the sign sequence.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gibbslab/sft.hpp"
#include "gibbslab/xy.hpp"  // SignSequence is shared with the circle family

namespace gibbslab::sym {

using xy::SignSequence;

// phi(signs) = (1/8) sum_{m=1..M} eps_m (1 + chi_{Y_m}) with
// Y_m^+ = X_{m-1}^+ u X_m^-, chi_Y = -dist(.,Y); Lipschitz seminorm of each
// chi is at most 1, giving the declared bound lip <= (1/4) sum eps
struct DistancePotentialSum {
  const EntropyLadder* ladder = nullptr;
  SignSequence signs;
  std::vector<double> eps;  // eps[m-1] is the stage-m weight
  int levels = 0;

  double sup_value() const;   // (1/8) sum eps, attained on the nested targets
  double lip_bound() const;   // (1/4) sum eps
  // direct evaluation on a finite prefix (resolution 2^-len)
  double eval_prefix(const std::vector<int>& prefix) const;
};

DistancePotentialSum build_phi(const SignSequence& signs,
                               const std::vector<double>& eps,
                               const EntropyLadder& ladder, int levels);

struct LocallyConstantPotential {
  int alphabet = 2;
  int depth = 1;
  std::vector<double> table;  // indexed by depth-word code
  double lip_bound = 0.0;
  double trunc_error = 0.0;  // lip_bound * 2^-depth
};

// table entries evaluate phi on each depth-k word at prefix resolution
LocallyConstantPotential truncate_depth(const DistancePotentialSum& phi, int k);
// generic evaluable, for potentials given as plain functions of the word
LocallyConstantPotential truncate_depth(
    const std::function<double(const std::vector<int>&)>& phi, double lip_bound,
    int k, int alphabet = 2);

struct CylinderMeasure {
  int alphabet = 2;
  int depth = 1;
  std::vector<double> weights;  // stationary weights per depth-word
  std::vector<double> kernel;   // P(state, symbol), states are (depth-1)-words
  double pressure = 0.0;

  double weight(std::uint32_t word) const { return weights[word]; }
  void export_csv(const std::string& path) const;  // word, weight
};

// transfer operator on (depth-1)-words over the full shift; Parry weights
// from the Perron eigendata. beta >= 0. Near a tie between competing phases
// the spectral gap collapses and the iteration can exhaust its cap; callers
// that probe many betas pass a smaller cap and treat failures as
// uncertifiable points.
CylinderMeasure equilibrium_state(const LocallyConstantPotential& phi, double beta,
                                  double tol = 1e-13, int max_iterations = 200000);
double pressure(const LocallyConstantPotential& phi, double beta);

// mass of the union of depth-j cylinders (j <= measure depth)
double clopen_mass(const CylinderMeasure& mu, int j,
                   const std::vector<std::uint32_t>& words);

// the standard clopen separators: depth-3 cylinders with at most one 1
// (a neighborhood of the 0-heavy ladders) and its complement
const std::vector<std::uint32_t>& plus_cylinders();
const std::vector<std::uint32_t>& minus_cylinders();
double phase_mass(const CylinderMeasure& mu, int sign);

// ---------------------------------------------------------------------------
// calibration
// ---------------------------------------------------------------------------
struct EpsilonBetaSchedule {
  std::vector<double> eps;   // eps[0] = 1; length levels + 1 (stage weights + tail)
  std::vector<double> beta;  // beta[m-1] for stage m, strictly increasing
};

struct CalibrateOptions {
  int depth = 12;              // transfer depth k
  int beta_doubling_cap = 48;
  int eps_halving_cap = 40;
  int grid_points = 3;         // beta-grid surrogate per interval
  double beta_probe_factor = 2.0;  // also test mass stability at this multiple
  double probe_tol = 1e-9;          // eigen tolerance for search probes
  int probe_iteration_cap = 30000;  // probes near phase ties give up quickly
  int threads = 2;                  // calibration cells are independent
};

// smallest depth with beta * lip * 2^-k inside the budget, capped at 14
int depth_for_beta(double beta, double lip_bound, double budget = 1e-3,
                   int floor_depth = 8, int cap = 14);

// delta_profile(m) is the stage-m mass defect target (e.g. 1/6 for the
// two-thirds variant, 2^-(m+3) for the dyadic profile). Throws
// std::runtime_error with diagnostics when a search exceeds its cap.
EpsilonBetaSchedule calibrate(const EntropyLadder& ladder, int levels,
                              const std::function<double(int)>& delta_profile,
                              const CalibrateOptions& opts = {});

struct SymbolicWindowReport {
  double beta = 0.0;
  double achieved = 0.0;
  double required = 0.0;
  bool holds = false;
};

// equilibrium mass of the phase set U^{signs(m)} for each grid beta; throws
// std::runtime_error when beta * lip * 2^-depth exceeds the resolution
// threshold (raise the depth)
std::vector<SymbolicWindowReport> verify_symbolic_statement(
    const SignSequence& signs, int m, int m_hat, const std::vector<double>& betas,
    const EpsilonBetaSchedule& sched, const EntropyLadder& ladder, int depth,
    double required, double resolution_threshold = 0.05);

// ---------------------------------------------------------------------------
// maximizing orbits and marginal entropy
// ---------------------------------------------------------------------------
struct PeriodicOrbit {
  std::uint32_t word = 0;
  int period = 1;
  double average = 0.0;
};

// enumerates all periodic words of period <= max_period, returns the argmax
// set of the orbit average of the depth-truncated potential
std::vector<PeriodicOrbit> maximizing_orbit_check(const LocallyConstantPotential& phi,
                                                  int max_period, double tol = 1e-9);

struct MarginalEntropyResult {
  double alpha = 0.0;
  double entropy = 0.0;
};

// maximizes the entropy of alpha * (all-0 atom) + (1-alpha) * (all-1 atom)
// over alpha by golden-section search; the answer is 1/2 with entropy ln 2
// at every marginal length n
MarginalEntropyResult marginal_entropy_argmax(int n);

}  // namespace gibbslab::sym
