#include "gibbslab/symbolic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>

#include "gibbslab/perron.hpp"

namespace gibbslab::sym {

namespace {

std::uint64_t ipow(std::uint64_t base, int e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= base;
  return r;
}

std::vector<int> decode(std::uint32_t code, int len, int alphabet) {
  std::vector<int> w(static_cast<std::size_t>(len));
  for (int i = len - 1; i >= 0; --i) {
    w[static_cast<std::size_t>(i)] = static_cast<int>(code % static_cast<std::uint32_t>(alphabet));
    code /= static_cast<std::uint32_t>(alphabet);
  }
  return w;
}

}  // namespace

// ---------------------------------------------------------------------------
// potentials
// ---------------------------------------------------------------------------

double DistancePotentialSum::sup_value() const {
  double s = 0.0;
  for (int m = 1; m <= levels; ++m) s += eps[static_cast<std::size_t>(m - 1)];
  return s / 8.0;
}

double DistancePotentialSum::lip_bound() const {
  double s = 0.0;
  for (int m = 1; m <= levels; ++m) s += eps[static_cast<std::size_t>(m - 1)];
  return s / 4.0;
}

double DistancePotentialSum::eval_prefix(const std::vector<int>& prefix) const {
  double v = 0.0;
  for (int m = 1; m <= levels; ++m) {
    auto mu = static_cast<std::size_t>(m);
    int s = signs.at(m);
    const Sft* a = s > 0 ? &ladder->plus[mu - 1] : &ladder->minus[mu - 1];
    const Sft* b = s > 0 ? &ladder->minus[mu] : &ladder->plus[mu];
    Distance d = dist_to_union(prefix, {a, b});
    v += eps[mu - 1] * (1.0 - d.value());
  }
  return v / 8.0;
}

DistancePotentialSum build_phi(const SignSequence& signs,
                               const std::vector<double>& eps,
                               const EntropyLadder& ladder, int levels) {
  if (levels > ladder.levels)
    throw std::out_of_range("build_phi: truncation beyond the ladder");
  if (static_cast<int>(eps.size()) < levels)
    throw std::invalid_argument("build_phi: need eps for every stage");
  DistancePotentialSum phi;
  phi.ladder = &ladder;
  phi.signs = signs;
  phi.eps.assign(eps.begin(), eps.begin() + levels);
  phi.levels = levels;
  return phi;
}

LocallyConstantPotential truncate_depth(const DistancePotentialSum& phi, int k) {
  if (k < 1) throw std::invalid_argument("truncate_depth: k >= 1");
  const int alphabet = 2;
  const auto total = ipow(static_cast<std::uint64_t>(alphabet), k);
  LocallyConstantPotential out;
  out.alphabet = alphabet;
  out.depth = k;
  out.lip_bound = phi.lip_bound();
  out.trunc_error = out.lip_bound * std::ldexp(1.0, -k);
  out.table.assign(total, 0.0);
  for (int m = 1; m <= phi.levels; ++m) {
    auto mu = static_cast<std::size_t>(m);
    int s = phi.signs.at(m);
    const Sft* a = s > 0 ? &phi.ladder->plus[mu - 1] : &phi.ladder->minus[mu - 1];
    const Sft* b = s > 0 ? &phi.ladder->minus[mu] : &phi.ladder->plus[mu];
    auto da = a->prefix_depths(k);
    auto db = b->prefix_depths(k);
    double e = phi.eps[mu - 1] / 8.0;
    for (std::uint64_t c = 0; c < total; ++c) {
      int j = std::max(da[c], db[c]);
      out.table[c] += e * (1.0 - std::ldexp(1.0, -j));
    }
  }
  return out;
}

LocallyConstantPotential truncate_depth(
    const std::function<double(const std::vector<int>&)>& phi, double lip_bound,
    int k, int alphabet) {
  if (k < 1) throw std::invalid_argument("truncate_depth: k >= 1");
  const auto total = ipow(static_cast<std::uint64_t>(alphabet), k);
  LocallyConstantPotential out;
  out.alphabet = alphabet;
  out.depth = k;
  out.lip_bound = lip_bound;
  out.trunc_error = lip_bound * std::ldexp(1.0, -k);
  out.table.resize(total);
  for (std::uint64_t c = 0; c < total; ++c)
    out.table[c] = phi(decode(static_cast<std::uint32_t>(c), k, alphabet));
  return out;
}

// ---------------------------------------------------------------------------
// equilibrium states
// ---------------------------------------------------------------------------

CylinderMeasure equilibrium_state(const LocallyConstantPotential& phi, double beta,
                                  double tol, int max_iterations) {
  if (beta < 0) throw std::invalid_argument("equilibrium_state: beta >= 0");
  const int A = phi.alphabet;
  const int k = phi.depth;
  const int kappa = std::max(k - 1, 1);
  const auto n_states = ipow(static_cast<std::uint64_t>(A), kappa);
  const auto n_words = ipow(static_cast<std::uint64_t>(A), k);

  num::SparseNonnegMatrix m(static_cast<int>(n_states));
  auto edge_word = [&](std::uint64_t u, int s) {
    // the depth-k word read along the edge u -> (u, s)
    return k >= 2 ? u * static_cast<std::uint64_t>(A) + static_cast<std::uint64_t>(s)
                  : static_cast<std::uint64_t>(s);
  };
  for (std::uint64_t u = 0; u < n_states; ++u) {
    for (int s = 0; s < A; ++s) {
      std::uint64_t v = (u * static_cast<std::uint64_t>(A) +
                         static_cast<std::uint64_t>(s)) % n_states;
      double w = beta * phi.table[edge_word(u, s)];
      m.add(static_cast<int>(u), static_cast<int>(v), num::LogScalar::from_log(w));
    }
  }
  auto pd = num::perron(m, tol, max_iterations);

  CylinderMeasure mu;
  mu.alphabet = A;
  mu.depth = k;
  mu.pressure = pd.value.log();
  mu.kernel.assign(n_states * static_cast<std::uint64_t>(A), 0.0);
  std::vector<double> pi(n_states);
  // stationary state weights pi_u = l_u r_u (pairing already 1)
  for (std::uint64_t u = 0; u < n_states; ++u)
    pi[u] = std::exp(pd.left_log[u] + pd.right_log[u]);
  // kernel P(u, s) = w(u,s) r_v / (lambda r_u)
  for (std::uint64_t u = 0; u < n_states; ++u) {
    double row = 0.0;
    for (int s = 0; s < A; ++s) {
      std::uint64_t v = (u * static_cast<std::uint64_t>(A) +
                         static_cast<std::uint64_t>(s)) % n_states;
      double lg = beta * phi.table[edge_word(u, s)] + pd.right_log[v] -
                  mu.pressure - pd.right_log[u];
      mu.kernel[u * static_cast<std::uint64_t>(A) + static_cast<std::uint64_t>(s)] =
          std::exp(lg);
      row += mu.kernel[u * static_cast<std::uint64_t>(A) + static_cast<std::uint64_t>(s)];
    }
    // rows are stochastic up to eigen residual; renormalize exactly
    for (int s = 0; s < A; ++s)
      mu.kernel[u * static_cast<std::uint64_t>(A) + static_cast<std::uint64_t>(s)] /= row;
  }
  mu.weights.assign(n_words, 0.0);
  if (k >= 2) {
    for (std::uint64_t w = 0; w < n_words; ++w) {
      std::uint64_t u = w / static_cast<std::uint64_t>(A);
      std::uint64_t s = w % static_cast<std::uint64_t>(A);
      mu.weights[w] = pi[u] * mu.kernel[u * static_cast<std::uint64_t>(A) + s];
    }
  } else {
    for (std::uint64_t w = 0; w < n_words; ++w) mu.weights[w] = pi[w];
  }
  // normalize away the residual mass defect
  double total = 0.0;
  for (double w : mu.weights) total += w;
  for (double& w : mu.weights) w /= total;
  return mu;
}

double pressure(const LocallyConstantPotential& phi, double beta) {
  const int A = phi.alphabet;
  const int k = phi.depth;
  const int kappa = std::max(k - 1, 1);
  const auto n_states = ipow(static_cast<std::uint64_t>(A), kappa);
  num::SparseNonnegMatrix m(static_cast<int>(n_states));
  for (std::uint64_t u = 0; u < n_states; ++u) {
    for (int s = 0; s < A; ++s) {
      std::uint64_t v = (u * static_cast<std::uint64_t>(A) +
                         static_cast<std::uint64_t>(s)) % n_states;
      std::uint64_t w = k >= 2 ? u * static_cast<std::uint64_t>(A) +
                                     static_cast<std::uint64_t>(s)
                               : static_cast<std::uint64_t>(s);
      m.add(static_cast<int>(u), static_cast<int>(v),
            num::LogScalar::from_log(beta * phi.table[w]));
    }
  }
  return num::perron(m, 1e-13, 200000).value.log();
}

double clopen_mass(const CylinderMeasure& mu, int j,
                   const std::vector<std::uint32_t>& words) {
  if (j > mu.depth) throw std::invalid_argument("clopen_mass: j exceeds measure depth");
  const auto span = ipow(static_cast<std::uint64_t>(mu.alphabet), mu.depth - j);
  double mass = 0.0;
  for (std::uint32_t w : words) {
    for (std::uint64_t t = w * span; t < (w + 1) * span; ++t) mass += mu.weights[t];
  }
  return mass;
}

const std::vector<std::uint32_t>& plus_cylinders() {
  static const std::vector<std::uint32_t> v{0, 1, 2, 4};  // 000 001 010 100
  return v;
}
const std::vector<std::uint32_t>& minus_cylinders() {
  static const std::vector<std::uint32_t> v{3, 5, 6, 7};  // complement
  return v;
}

double phase_mass(const CylinderMeasure& mu, int sign) {
  return clopen_mass(mu, 3, sign > 0 ? plus_cylinders() : minus_cylinders());
}

void CylinderMeasure::export_csv(const std::string& path) const {
  std::ofstream out(path);
  out << "word,weight\n";
  for (std::size_t w = 0; w < weights.size(); ++w) {
    std::string word(static_cast<std::size_t>(depth), '0');
    std::size_t v = w;
    for (int i = depth - 1; i >= 0; --i) {
      word[static_cast<std::size_t>(i)] =
          static_cast<char>('0' + v % static_cast<std::size_t>(alphabet));
      v /= static_cast<std::size_t>(alphabet);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, ",%.17g\n", weights[w]);
    out << word << buf;
  }
}

// ---------------------------------------------------------------------------
// calibration
// ---------------------------------------------------------------------------

namespace {

// runs f(0..n-1) on a small pool; pure cells, fixed AND-reduction, so the
// result is independent of scheduling
template <typename F>
void for_cells(int n, int threads, F&& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < n) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::vector<SignSequence> sign_prefixes(int m) {
  std::vector<SignSequence> out;
  for (int bits = 0; bits < (1 << m); ++bits) {
    SignSequence s;
    for (int i = 0; i < m; ++i) s.prefix.push_back((bits >> i) & 1 ? -1 : 1);
    s.tail = s.prefix.back();
    out.push_back(std::move(s));
  }
  return out;
}

// mass of the stage's phase set; nullopt when the power iteration cannot
// certify (ties between phases stall it)
std::optional<double> certified_phase_mass(const LocallyConstantPotential& pot,
                                           double beta, int sign, double tol,
                                           int iteration_cap) {
  try {
    auto mu = equilibrium_state(pot, beta, tol, iteration_cap);
    return phase_mass(mu, sign);
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
}

}  // namespace

EpsilonBetaSchedule calibrate(const EntropyLadder& ladder, int levels,
                              const std::function<double(int)>& delta_profile,
                              const CalibrateOptions& opts) {
  if (levels + 1 > ladder.levels)
    throw std::invalid_argument(
        "calibrate: the ladder must extend one level past the calibrated stages "
        "(the tail perturbation probes it)");
  EpsilonBetaSchedule sched;
  sched.eps = {1.0};
  sched.beta.clear();

  for (int m = 1; m <= levels; ++m) {
    double delta = delta_profile(m);
    if (!(delta > 0.0)) throw std::invalid_argument("calibrate: delta must be positive");
    auto prefixes = sign_prefixes(m);
    std::vector<LocallyConstantPotential> pots;
    pots.reserve(prefixes.size());
    for (const auto& p : prefixes)
      pots.push_back(truncate_depth(build_phi(p, sched.eps, ladder, m), opts.depth));

    auto stage_ok = [&](double beta) {
      const int cells = static_cast<int>(prefixes.size()) * 2;
      std::atomic<bool> ok{true};
      for_cells(cells, opts.threads, [&](int cell) {
        if (!ok.load()) return;
        auto i = static_cast<std::size_t>(cell / 2);
        double b = (cell % 2) ? beta * opts.beta_probe_factor : beta;
        auto mass = certified_phase_mass(pots[i], b, prefixes[i].at(m),
                                         opts.probe_tol, opts.probe_iteration_cap);
        if (!mass || *mass < 1.0 - delta) ok.store(false);
      });
      return ok.load();
    };

    double lo = m == 1 ? 0.5 : sched.beta.back();
    double beta = std::max(1.0, 2.0 * lo);
    int doublings = 0;
    while (!stage_ok(beta)) {
      beta *= 2.0;
      if (++doublings > opts.beta_doubling_cap)
        throw std::runtime_error(
            "calibrate: beta search exceeded cap at stage " + std::to_string(m) +
            " (entropy gap too small or depth too shallow)");
    }
    // bisect down toward the threshold, keeping a certified passing value
    double fail = beta / 2.0;
    for (int it = 0; it < 4; ++it) {
      double mid = 0.5 * (fail + beta);
      if (mid <= lo) break;
      if (stage_ok(mid)) beta = mid;
      else fail = mid;
    }
    if (!sched.beta.empty() && beta <= sched.beta.back())
      beta = sched.beta.back() * 1.25;
    sched.beta.push_back(beta);

    // eps(m+1): halve until the worst-case tail perturbation moves the stage
    // masses by less than delta across the grid [beta(m-1), beta(m)]
    double grid_lo = m == 1 ? std::max(1.0, beta / 4.0) : sched.beta[static_cast<std::size_t>(m - 2)];
    std::vector<double> grid;
    for (int g = 0; g < opts.grid_points; ++g) {
      double t = opts.grid_points == 1
                     ? 1.0
                     : static_cast<double>(g) / (opts.grid_points - 1);
      grid.push_back(grid_lo * std::pow(beta / grid_lo, t));
    }
    double eps_next = sched.eps.back() / 2.0;
    int halvings = 0;
    while (true) {
      const int cells = static_cast<int>(prefixes.size()) * 2;
      std::atomic<bool> stable{true};
      for_cells(cells, opts.threads, [&](int cell) {
        if (!stable.load()) return;
        auto i = static_cast<std::size_t>(cell / 2);
        int tail_sign = (cell % 2) ? -1 : +1;
        // extend the prefix by one stage with the candidate weight
        SignSequence ext = prefixes[i];
        ext.prefix.push_back(tail_sign);
        ext.tail = tail_sign;
        std::vector<double> eps_ext = sched.eps;
        eps_ext.push_back(eps_next);
        auto pot_ext = truncate_depth(build_phi(ext, eps_ext, ladder, m + 1),
                                      opts.depth);
        // grid points where either family sits at a phase tie cannot be
        // certified by iteration at any eps; they are retried harder and
        // then skipped (the schedule is grid-validated, not proven)
        auto certify_hard = [&](const LocallyConstantPotential& pot, double b) {
          auto v = certified_phase_mass(pot, b, prefixes[i].at(m), opts.probe_tol,
                                        opts.probe_iteration_cap);
          if (!v)
            v = certified_phase_mass(pot, b, prefixes[i].at(m), 1e-7,
                                     4 * opts.probe_iteration_cap);
          return v;
        };
        for (double b : grid) {
          if (!stable.load()) return;
          auto base = certify_hard(pots[i], b);
          if (!base) continue;
          auto moved = certify_hard(pot_ext, b);
          if (!moved) continue;
          if (std::abs(*base - *moved) >= delta) {
            stable.store(false);
            return;
          }
        }
      });
      if (stable.load()) break;
      eps_next /= 2.0;
      if (++halvings > opts.eps_halving_cap)
        throw std::runtime_error("calibrate: eps search exceeded cap at stage " +
                                 std::to_string(m));
    }
    sched.eps.push_back(std::min(eps_next, sched.eps.back() / 2.0));
  }
  return sched;
}

std::vector<SymbolicWindowReport> verify_symbolic_statement(
    const SignSequence& signs, int m, int m_hat, const std::vector<double>& betas,
    const EpsilonBetaSchedule& sched, const EntropyLadder& ladder, int depth,
    double required, double resolution_threshold) {
  if (!(m_hat >= m && m >= 1))
    throw std::invalid_argument("verify_symbolic_statement: need m_hat >= m >= 1");
  for (int j = m; j <= m_hat; ++j) {
    if (signs.at(j) != signs.at(m))
      throw std::invalid_argument("verify_symbolic_statement: signs not constant on block");
  }
  int levels = static_cast<int>(sched.beta.size());
  auto pot = truncate_depth(build_phi(signs, sched.eps, ladder, levels), depth);
  std::vector<SymbolicWindowReport> out;
  for (double beta : betas) {
    if (beta * pot.lip_bound * std::ldexp(1.0, -depth) > resolution_threshold)
      throw std::runtime_error(
          "verify_symbolic_statement: truncation resolution exceeded, raise the depth");
    SymbolicWindowReport rep;
    rep.beta = beta;
    rep.required = required;
    // mass margins are ~1e-2 scale; a relaxed eigen tolerance with one
    // patient retry covers slow spots near component crossovers
    CylinderMeasure mu;
    try {
      mu = equilibrium_state(pot, beta, 1e-10, 60000);
    } catch (const std::runtime_error&) {
      mu = equilibrium_state(pot, beta, 1e-9, 250000);
    }
    rep.achieved = phase_mass(mu, signs.at(m));
    rep.holds = rep.achieved >= required;
    out.push_back(rep);
  }
  return out;
}

// ---------------------------------------------------------------------------
// orbits and marginal entropy
// ---------------------------------------------------------------------------

std::vector<PeriodicOrbit> maximizing_orbit_check(const LocallyConstantPotential& phi,
                                                  int max_period, double tol) {
  if (max_period < 1) throw std::invalid_argument("maximizing_orbit_check: period >= 1");
  const int A = phi.alphabet;
  const int k = phi.depth;
  std::vector<PeriodicOrbit> all;
  for (int p = 1; p <= max_period; ++p) {
    const auto count = ipow(static_cast<std::uint64_t>(A), p);
    for (std::uint64_t w = 0; w < count; ++w) {
      auto word = decode(static_cast<std::uint32_t>(w), p, A);
      double avg = 0.0;
      for (int rot = 0; rot < p; ++rot) {
        std::uint32_t code = 0;
        for (int i = 0; i < k; ++i) {
          code = code * static_cast<std::uint32_t>(A) +
                 static_cast<std::uint32_t>(word[static_cast<std::size_t>((rot + i) % p)]);
        }
        avg += phi.table[code];
      }
      avg /= p;
      all.push_back(PeriodicOrbit{static_cast<std::uint32_t>(w), p, avg});
    }
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& o : all) best = std::max(best, o.average);
  std::vector<PeriodicOrbit> arg;
  for (const auto& o : all) {
    if (o.average >= best - tol) arg.push_back(o);
  }
  return arg;
}

int depth_for_beta(double beta, double lip_bound, double budget, int floor_depth,
                   int cap) {
  int k = floor_depth;
  while (k < cap && beta * lip_bound * std::ldexp(1.0, -k) > budget) ++k;
  return k;
}

MarginalEntropyResult marginal_entropy_argmax(int n) {
  if (n < 1) throw std::invalid_argument("marginal_entropy_argmax: n >= 1");
  // the two-atom marginal has entropy H(alpha) regardless of n; maximize by
  // golden-section search
  auto H = [](double a) {
    if (a <= 0.0 || a >= 1.0) return 0.0;
    return -a * std::log(a) - (1.0 - a) * std::log(1.0 - a);
  };
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0;
  double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
  for (int it = 0; it < 100; ++it) {
    if (H(c) < H(d)) lo = c;
    else hi = d;
    c = hi - gr * (hi - lo);
    d = lo + gr * (hi - lo);
    if (hi - lo < 1e-6) break;
  }
  // the entropy is flat to rounding near its max; polish on the strictly
  // decreasing derivative H'(a) = ln(1-a) - ln(a)
  double a = std::max(1e-3, lo - 1e-3), b = std::min(1.0 - 1e-3, hi + 1e-3);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    double mid = 0.5 * (a + b);
    if (std::log1p(-mid) - std::log(mid) > 0.0) a = mid;
    else b = mid;
  }
  MarginalEntropyResult r;
  r.alpha = 0.5 * (a + b);
  r.entropy = H(r.alpha);
  return r;
}

}  // namespace gibbslab::sym
