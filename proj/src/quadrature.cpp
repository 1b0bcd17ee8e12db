#include "gibbslab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace gibbslab::num {

namespace {

constexpr double kPi = 3.14159265358979323846;
// panels whose max lies this far below the running peak cannot move any
// log-sum-exp result at double precision; they are not refined further
constexpr double kNegligible = 800.0;

struct GaussRule {
  std::vector<double> nodes;    // on [-1,1]
  std::vector<double> weights;
};

// Legendre nodes by Newton iteration on P_n; standard and plenty accurate.
GaussRule make_rule(int n) {
  GaussRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    auto i_u = static_cast<std::size_t>(i);
    auto j_u = static_cast<std::size_t>(n - 1 - i);
    r.nodes[i_u] = -x;
    r.nodes[j_u] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[i_u] = w;
    r.weights[j_u] = w;
  }
  return r;
}

const GaussRule& rule15() {
  static const GaussRule r = make_rule(15);
  return r;
}
const GaussRule& rule31() {
  static const GaussRule r = make_rule(31);
  return r;
}

double wrap01(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

// integrands are 1-periodic functions of a real argument and wrap
// internally; pre-wrapping here would quantize node positions at ulp(1)
double eval_checked(const CircleFn& f, double x) {
  double v = f(x);
  if (!std::isfinite(v)) throw std::runtime_error("quadrature: non-finite integrand value");
  return v;
}

// rough upper estimate of max f over [a,b], used only for pruning
double scan_max(const CircleFn& f, double a, double b) {
  const GaussRule& lo = rule15();
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double m = std::max(eval_checked(f, a), eval_checked(f, b));
  for (double xi : lo.nodes) m = std::max(m, eval_checked(f, mid + half * xi));
  return m;
}

// log of integral of exp(f) over [a,b], adaptive with negligibility cutoff
double log_panel(const CircleFn& f, double a, double b, double tol, double cutoff,
                 int depth) {
  const GaussRule& lo = rule15();
  const GaussRule& hi = rule31();
  double mid = 0.5 * (a + b), half = 0.5 * (b - a);

  std::array<double, 15> flo{};
  std::array<double, 31> fhi{};
  double fmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 15; ++i) {
    double v = eval_checked(f, mid + half * lo.nodes[static_cast<std::size_t>(i)]);
    flo[static_cast<std::size_t>(i)] = v;
    fmax = std::max(fmax, v);
  }
  for (int i = 0; i < 31; ++i) {
    double v = eval_checked(f, mid + half * hi.nodes[static_cast<std::size_t>(i)]);
    fhi[static_cast<std::size_t>(i)] = v;
    fmax = std::max(fmax, v);
  }

  double s_lo = 0.0, s_hi = 0.0;
  for (int i = 0; i < 15; ++i)
    s_lo += lo.weights[static_cast<std::size_t>(i)] *
            std::exp(flo[static_cast<std::size_t>(i)] - fmax);
  for (int i = 0; i < 31; ++i)
    s_hi += hi.weights[static_cast<std::size_t>(i)] *
            std::exp(fhi[static_cast<std::size_t>(i)] - fmax);
  double est = fmax + std::log(half * s_hi);

  bool converged = std::abs(s_hi - s_lo) <= tol * s_hi;
  bool negligible = fmax <= cutoff;
  if (converged || negligible) return est;
  if (depth >= 32) {
    if (fmax <= cutoff + kNegligible / 2) return est;  // immaterial inaccuracy
    throw std::runtime_error("quadrature: panel failed to converge");
  }
  double l = log_panel(f, a, mid, tol, cutoff, depth + 1);
  double r = log_panel(f, mid, b, tol, cutoff, depth + 1);
  return log_add_exp(l, r);
}

double integrate_panels(const CircleFn& f, const std::vector<std::pair<double, double>>& panels,
                        double tol) {
  double peak = -std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : panels) peak = std::max(peak, scan_max(f, a, b));
  double cutoff = peak - kNegligible;
  double acc = -std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : panels)
    acc = log_add_exp(acc, log_panel(f, a, b, tol, cutoff, 0));
  return acc;
}

}  // namespace

PanelPartition PanelPartition::uniform(int n, double tol) {
  std::vector<double> pts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
  PanelPartition p;
  p.breakpoints = std::move(pts);
  p.tolerance = tol;
  return p;
}

PanelPartition PanelPartition::from_breakpoints(std::vector<double> pts, double tol) {
  for (auto& x : pts) x = wrap01(x);
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double x : pts) {
    if (out.empty() || x - out.back() > 1e-15) out.push_back(x);
  }
  if (!out.empty() && out.size() > 1 && (out.front() + 1.0) - out.back() <= 1e-15)
    out.pop_back();
  if (out.empty()) out.push_back(0.0);
  PanelPartition p;
  p.breakpoints = std::move(out);
  p.tolerance = tol;
  return p;
}

LogScalar log_integrate_exp(const CircleFn& f, const PanelPartition& partition) {
  const auto& bp = partition.breakpoints;
  if (bp.empty()) throw std::invalid_argument("quadrature: empty partition");
  std::vector<std::pair<double, double>> panels;
  for (std::size_t i = 0; i < bp.size(); ++i) {
    double a = bp[i];
    double b = (i + 1 < bp.size()) ? bp[i + 1] : bp[0] + 1.0;
    if (b - a > 0) panels.emplace_back(a, b);
  }
  return LogScalar::from_log(integrate_panels(f, panels, partition.tolerance));
}

LogScalar log_integrate_exp_arc(const CircleFn& f, const PanelPartition& partition,
                                double a, double b) {
  if (!(b > a) || b - a > 1.0 + 1e-12)
    throw std::invalid_argument("quadrature: arc must have length in (0,1]");
  std::vector<double> cuts;
  cuts.push_back(a);
  for (double x : partition.breakpoints) {
    for (int shift = -1; shift <= 2; ++shift) {
      double y = x + shift;
      if (y > a + 1e-15 && y < b - 1e-15) cuts.push_back(y);
    }
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::pair<double, double>> panels;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] - cuts[i] > 1e-18) panels.emplace_back(cuts[i], cuts[i + 1]);
  }
  return LogScalar::from_log(integrate_panels(f, panels, partition.tolerance));
}

}  // namespace gibbslab::num
