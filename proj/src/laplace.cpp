#include "gibbslab/laplace.hpp"

#include <algorithm>
#include <cmath>

#include "gibbslab/circle.hpp"

namespace gibbslab::xy {

namespace {
constexpr double kTwoPi = 6.283185307179586476925;
}

double TrigPoly::operator()(double theta) const { return derivative(0, theta); }

double TrigPoly::derivative(int order, double theta) const {
  double v = order == 0 ? constant : 0.0;
  for (std::size_t j = 0; j < std::max(cos_coef.size(), sin_coef.size()); ++j) {
    double w = kTwoPi * static_cast<double>(j + 1);
    double a = j < cos_coef.size() ? cos_coef[j] : 0.0;
    double b = j < sin_coef.size() ? sin_coef[j] : 0.0;
    double scale = std::pow(w, order);
    // d/dt cos -> -w sin, d/dt sin -> w cos; cycle of length 4
    switch (order & 3) {
      case 0:
        v += scale * (a * std::cos(w * theta) + b * std::sin(w * theta));
        break;
      case 1:
        v += scale * (-a * std::sin(w * theta) + b * std::cos(w * theta));
        break;
      case 2:
        v += scale * (-a * std::cos(w * theta) - b * std::sin(w * theta));
        break;
      case 3:
        v += scale * (a * std::sin(w * theta) - b * std::cos(w * theta));
        break;
    }
  }
  return v;
}

bool TrigPoly::is_constant(double tol) const {
  for (double a : cos_coef)
    if (std::abs(a) > tol) return false;
  for (double b : sin_coef)
    if (std::abs(b) > tol) return false;
  return true;
}

std::vector<LaplaceAtom> laplace_limit(const TrigPoly& U, int order_cap) {
  if (U.is_constant())
    throw DegenerateInputError("laplace_limit: constant potential, limit is uniform");

  double coef_scale = 0.0;
  for (double a : U.cos_coef) coef_scale += std::abs(a);
  for (double b : U.sin_coef) coef_scale += std::abs(b);

  // maximizer candidates: sign changes + -> - of U' on a dense grid, then
  // bisection; degenerate (flat) maxima still give a sign change of U'
  const int n = 1 << 14;
  std::vector<double> maxima;
  double prev = U.derivative(1, 0.0);
  for (int i = 1; i <= n; ++i) {
    double t = static_cast<double>(i) / n;
    double cur = U.derivative(1, wrap_unit(t));
    if (prev > 0.0 && cur <= 0.0) {
      double lo = static_cast<double>(i - 1) / n, hi = t;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (U.derivative(1, wrap_unit(mid)) > 0.0) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-16) break;
      }
      double root = wrap_unit(0.5 * (lo + hi));
      // flat maxima leave U' below noise near the root; anything this close
      // to the seam is the maximizer at 0 (matches the grid resolution)
      if (root > 1.0 - 2e-5) root = 0.0;
      bool dup = false;
      for (double m0 : maxima) {
        double d = std::abs(root - m0);
        if (std::min(d, 1.0 - d) < 1e-8) dup = true;
      }
      if (!dup) maxima.push_back(root);
    }
    prev = cur;
  }
  if (maxima.empty())
    throw ResolutionError("laplace_limit: no maximizer located");

  double umax = -std::numeric_limits<double>::infinity();
  for (double c : maxima) umax = std::max(umax, U(c));

  // per-order magnitude scale sum |coef_j| (2 pi j)^l: derivative values are
  // judged zero or not relative to it
  auto deriv_scale = [&](int l) {
    double s = 1e-300;
    for (std::size_t j = 0; j < std::max(U.cos_coef.size(), U.sin_coef.size()); ++j) {
      double a = j < U.cos_coef.size() ? std::abs(U.cos_coef[j]) : 0.0;
      double b = j < U.sin_coef.size() ? std::abs(U.sin_coef[j]) : 0.0;
      s += (a + b) * std::pow(kTwoPi * static_cast<double>(j + 1), l);
    }
    return s;
  };

  const double value_tol = 1e-9 * std::max(1.0, coef_scale);
  std::vector<LaplaceAtom> atoms;
  for (double c : maxima) {
    if (U(c) < umax - value_tol) continue;
    LaplaceAtom atom;
    atom.theta = c;
    double fact = 1.0;
    for (int l = 2; l <= order_cap; ++l) {
      fact *= l;
      double d = U.derivative(l, c);
      if (std::abs(d) > 1e-7 * deriv_scale(l)) {
        if (l % 2 != 0 || d > 0.0) break;  // not a clean even-order max
        atom.order = l;
        atom.omega = -d / fact;
        break;
      }
    }
    if (atom.order == 0)
      throw ResolutionError("laplace_limit: maximizer flat beyond derivative order cap");
    atoms.push_back(atom);
  }

  int l_max = 0;
  for (const auto& a : atoms) l_max = std::max(l_max, a.order);
  std::vector<LaplaceAtom> kept;
  double total = 0.0;
  for (auto& a : atoms) {
    if (a.order != l_max) continue;
    a.weight = std::pow(a.omega, -1.0 / l_max);
    total += a.weight;
    kept.push_back(a);
  }
  for (auto& a : kept) a.weight /= total;
  std::sort(kept.begin(), kept.end(),
            [](const LaplaceAtom& x, const LaplaceAtom& y) { return x.theta < y.theta; });
  return kept;
}

}  // namespace gibbslab::xy
