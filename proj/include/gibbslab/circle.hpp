#pragma once

// Circle R/Z geometry: wrap-around intervals and the transplanted master
// bump. The profile is the standard smooth step built from t -> exp(-1/t):
// identically 1 on [-2/3, 2/3], identically 0 outside (-1, 1), strictly
// monotone on the shoulders.

#include <vector>

namespace gibbslab::xy {

double wrap_unit(double x);                           // into [0,1)
double signed_offset(double theta, double center);    // into [-1/2, 1/2)

double master_bump(double x);

struct CircleInterval {
  double center = 0.0;
  double halfwidth = 0.0;  // in (0, 1/2]

  double length() const { return 2.0 * halfwidth; }
  bool contains(double theta) const;
  double left() const { return center - halfwidth; }
  double right() const { return center + halfwidth; }
};

// chi_I transplanted onto I: value master_bump(2x/|I|) at signed offset x
double bump_on_interval(const CircleInterval& I, double theta);

// sup of |d^r/dx^r master_bump| for r <= 4 (r = 0 is exactly 1); numerical
// finite-difference estimate with a safety factor, adequate for the C^r
// modulus bounds.
double master_bump_cr_norm(int r);

}  // namespace gibbslab::xy
