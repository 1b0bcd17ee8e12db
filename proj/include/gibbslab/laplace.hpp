#pragma once

// Zero-temperature limit of the circle marginal for real-analytic (trig
// polynomial) potentials: locate the maximizers of U, classify each by the
// first non-vanishing derivative order l(c) (always even at a maximum),
// keep the flattest ones, and weight them by omega(c)^(-1/l_max) with
// omega(c) = -D^l U(c) / l!.

#include <stdexcept>
#include <vector>

namespace gibbslab::xy {

struct TrigPoly {
  double constant = 0.0;
  std::vector<double> cos_coef;  // index j-1 holds the cos(2 pi j theta) coefficient
  std::vector<double> sin_coef;

  double operator()(double theta) const;
  double derivative(int order, double theta) const;
  bool is_constant(double tol = 0.0) const;
};

struct LaplaceAtom {
  double theta = 0.0;
  double weight = 0.0;
  int order = 0;       // l(c)
  double omega = 0.0;  // -D^l U(c) / l!
};

struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Throws DegenerateInputError for constant U (the limit is uniform) and
// ResolutionError when a maximizer is flat past the derivative-order cap.
std::vector<LaplaceAtom> laplace_limit(const TrigPoly& U, int order_cap = 8);

}  // namespace gibbslab::xy
