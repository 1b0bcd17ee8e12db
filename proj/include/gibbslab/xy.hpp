#pragma once

// Circle spin-chain laboratory: the sensitive bump-family potentials U(sign
// sequence), their exact Gibbs marginal exp(beta U)/Z, mass verification at
// phase windows, and the adversarial sign scheduler that makes the marginals
// oscillate between the two phases along a prescribed beta sequence.

#include <optional>
#include <string>
#include <vector>

#include "gibbslab/circle.hpp"
#include "gibbslab/log_scalar.hpp"
#include "gibbslab/quadrature.hpp"

namespace gibbslab::xy {

// ---------------------------------------------------------------------------
// schedules
//
// A schedule pairs interval halfwidths h(m) with inverse-temperature levels
// level(m). The reference construction uses h(m) = 2^-(m+11)^2 and
// level(m) = 2^(m+10)^3; those are far outside floating-point range, so the
// reference kind carries exponents only and refuses numeric evaluation.
// Desk schedules keep the same architecture at computable scales.
// ---------------------------------------------------------------------------
struct Schedule {
  enum class Kind { Reference, Desk };
  Kind kind = Kind::Desk;
  int m_max = 4;
  std::vector<double> halfwidth_tbl;  // desk only, indices 0..m_max
  std::vector<double> level_tbl;      // desk only; empty until calibrated

  static Schedule reference(int m_max);
  // halfwidth exponent gaps grow linearly (log2 h goes 4, 11, 19, 28, 38...):
  // each scale shrinks relative to the previous by 2^-(m+6), which is what
  // drives the phase-window masses past 1 - 2^-m at desk size
  static Schedule desk(int m_max);
  // the fixed-ratio halfwidths 2^-(m+4); valid geometry, too coarse for the
  // mass targets, kept for interval-system tests
  static Schedule desk_coarse(int m_max);

  bool calibrated() const { return !level_tbl.empty(); }
  double halfwidth(int m) const;
  double level(int m) const;
  long long halfwidth_log2(int m) const;  // exact for Reference
  long long level_log2(int m) const;      // Reference only

  std::string to_json() const;
  static Schedule from_json(const std::string& text);
};

// Finds levels so that, for the full family over all sign patterns, the
// phase-window mass at beta = level(m) clears 1 - 2^-(m+1) (and at least
// 15/16). Doubling search per level, iterated to a fixed point over the
// whole level vector. Throws std::runtime_error when the search caps out.
Schedule calibrate_desk_levels(Schedule sched, double level0 = 1.0);

// ---------------------------------------------------------------------------
// sign sequences and potentials
// ---------------------------------------------------------------------------
struct SignSequence {
  std::vector<int> prefix;  // entries +1 / -1, positions 1..prefix.size()
  int tail = +1;

  static SignSequence constant(int sign);
  static SignSequence alternating(int first, int length);
  int at(int m) const;  // m >= 1
  bool agrees_with(const SignSequence& o, int upto) const;
  std::string to_string() const;
};

struct IntervalPair {
  CircleInterval first, second;
  double length() const { return first.length() + second.length(); }
};

struct IntervalSystem {
  CircleInterval i_plus, i_minus;  // level-m intervals at phases 0 and 1/2
  IntervalPair y_plus, y_minus;    // unions I_{m-1}^s U I_m^{-s}  (m >= 1)
  IntervalPair m_plus, m_minus;    // anchor annuli inside the level-m plateau
};

// m in [0, m_max]; the Y/M members require m >= 1
IntervalSystem interval_system(int m, const Schedule& sched);

struct CirclePotential {
  double base = 0.0;
  struct Term {
    double coef;
    CircleInterval interval;
  };
  std::vector<Term> terms;
  int truncation_level = 0;

  double operator()(double theta) const;
  std::vector<double> breakpoints() const;

  std::string to_json() const;
  static CirclePotential from_json(const std::string& text);
};

// U = -1/level(0) + sum_{m=1..M} (1/level(m-1) - 1/level(m)) chi_m^{sign(m)}
CirclePotential build_U(const SignSequence& signs, const Schedule& sched, int M);

// upper bound on ||U(s) - U(s')||_{C^r} from the common-prefix tail, in the
// log domain (reference-scale values underflow doubles)
num::LogScalar family_modulus(const SignSequence& a, const SignSequence& b, int r,
                              const Schedule& sched);

// ---------------------------------------------------------------------------
// marginal densities
// ---------------------------------------------------------------------------
struct MarginalDensity {
  CirclePotential potential;
  double beta = 0.0;
  num::LogScalar logZ;
  num::PanelPartition partition;

  double log_density(double theta) const;
};

MarginalDensity marginal_density(const CirclePotential& U, double beta,
                                 double tolerance = 1e-12);

double interval_mass(const MarginalDensity& d, const CircleInterval& I);
double interval_mass(const MarginalDensity& d, const IntervalPair& p);

void export_density_csv(const MarginalDensity& d, const std::string& path,
                        int samples);

// ---------------------------------------------------------------------------
// window verification and sign scheduling
// ---------------------------------------------------------------------------
struct WindowReport {
  bool holds = false;
  double achieved = 0.0;
  double required = 0.0;
  bool beta_in_range = true;  // reported, never clamped
};

// phase window for stage m: center at 0 or 1/2 by signs(m), halfwidth
// h(m-1) for desk schedules
CircleInterval phase_window(int m, int sign, const Schedule& sched);

WindowReport verify_xy_statement(const SignSequence& signs, int m, int m_hat,
                                 double beta, const Schedule& sched,
                                 double tolerance = 1e-12);

// Sign sequence that alternates phases along the prescribed beta sequence:
// block [m(l), m(l+1)-1] gets + for even list positions, - for odd (0-based),
// after thinning betas that share a level cell. First m0 entries copy signs0.
SignSequence schedule_signs(const std::vector<double>& betas_hat,
                            const SignSequence& signs0, int m0,
                            const Schedule& sched);

}  // namespace gibbslab::xy
