#include "gibbslab/circle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gibbslab::xy {

double wrap_unit(double x) {
  double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

double signed_offset(double theta, double center) {
  // std::remainder is exact, so offsets keep full precision even when the
  // difference crosses the wrap seam (critical for 2^-38-scale bumps)
  double d = std::remainder(theta - center, 1.0);
  return d == 0.5 ? -0.5 : d;
}

namespace {
double smooth_step(double t) {  // 0 for t<=0, 1 for t>=1, smooth monotone
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}
}  // namespace

double master_bump(double x) {
  double ax = std::abs(x);
  if (ax <= 2.0 / 3.0) return 1.0;
  if (ax >= 1.0) return 0.0;
  return smooth_step(3.0 * (1.0 - ax));
}

bool CircleInterval::contains(double theta) const {
  return std::abs(signed_offset(theta, center)) <= halfwidth;
}

double bump_on_interval(const CircleInterval& I, double theta) {
  if (I.halfwidth <= 0.0) return 0.0;
  double x = signed_offset(theta, I.center);
  if (std::abs(x) >= I.halfwidth) return 0.0;
  return master_bump(x / I.halfwidth);
}

double master_bump_cr_norm(int r) {
  if (r < 0) throw std::invalid_argument("master_bump_cr_norm: negative order");
  if (r == 0) return 1.0;
  if (r > 4) throw std::invalid_argument("master_bump_cr_norm: order cap is 4");
  static double cache[5] = {1.0, 0.0, 0.0, 0.0, 0.0};
  if (cache[r] > 0.0) return cache[r];
  // central finite differences on the shoulder [2/3, 1]
  const int n = 20000;
  double h = 1e-3;
  double sup = 0.0;
  for (int i = 0; i <= n; ++i) {
    double x = 2.0 / 3.0 + (1.0 / 3.0) * i / n;
    double d = 0.0;
    switch (r) {
      case 1:
        d = (master_bump(x + h) - master_bump(x - h)) / (2 * h);
        break;
      case 2:
        d = (master_bump(x + h) - 2 * master_bump(x) + master_bump(x - h)) / (h * h);
        break;
      case 3:
        d = (master_bump(x + 2 * h) - 2 * master_bump(x + h) + 2 * master_bump(x - h) -
             master_bump(x - 2 * h)) /
            (2 * h * h * h);
        break;
      case 4:
        d = (master_bump(x + 2 * h) - 4 * master_bump(x + h) + 6 * master_bump(x) -
             4 * master_bump(x - h) + master_bump(x - 2 * h)) /
            (h * h * h * h);
        break;
    }
    sup = std::max(sup, std::abs(d));
  }
  cache[r] = 1.25 * sup;  // safety factor over the sampled sup
  return cache[r];
}

}  // namespace gibbslab::xy
