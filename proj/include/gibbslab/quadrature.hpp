#pragma once

// Log-domain integration of exp(f) over the circle R/Z. The circle is cut
// into panels at user-supplied breakpoints (bump edges, window endpoints);
// each panel is handled by nested Gauss-Legendre with bisection on
// disagreement, after subtracting the panel max of f so nothing overflows.

#include <functional>
#include <vector>

#include "gibbslab/log_scalar.hpp"

namespace gibbslab::num {

// a 1-periodic function of a real argument; implementations wrap internally
// (exact wrapping inside the evaluation preserves offset precision)
using CircleFn = std::function<double(double)>;

struct PanelPartition {
  std::vector<double> breakpoints;  // sorted, unique, in [0,1)
  double tolerance = 1e-12;         // relative, per panel

  static PanelPartition uniform(int n, double tol = 1e-12);
  // points are wrapped into [0,1) and deduplicated
  static PanelPartition from_breakpoints(std::vector<double> pts, double tol = 1e-12);
};

// log of integral over the whole circle of exp(f) d(Lebesgue)
LogScalar log_integrate_exp(const CircleFn& f, const PanelPartition& partition);

// log of integral of exp(f) over the arc from a to b going forward
// (b - a must lie in (0, 1]); partition breakpoints inside the arc are kept
LogScalar log_integrate_exp_arc(const CircleFn& f, const PanelPartition& partition,
                                double a, double b);

}  // namespace gibbslab::num
