#include "gibbslab/xy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gibbslab::xy {

using num::LogScalar;
using num::PanelPartition;

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

Schedule Schedule::reference(int m_max) {
  Schedule s;
  s.kind = Kind::Reference;
  s.m_max = m_max;
  return s;
}

Schedule Schedule::desk(int m_max) {
  Schedule s;
  s.kind = Kind::Desk;
  s.m_max = m_max;
  long long w = 4;
  for (int m = 0; m <= m_max; ++m) {
    if (m > 0) w += m + 6;
    s.halfwidth_tbl.push_back(std::ldexp(1.0, static_cast<int>(-w)));
  }
  return s;
}

Schedule Schedule::desk_coarse(int m_max) {
  Schedule s;
  s.kind = Kind::Desk;
  s.m_max = m_max;
  for (int m = 0; m <= m_max; ++m)
    s.halfwidth_tbl.push_back(std::ldexp(1.0, -(m + 4)));
  return s;
}

double Schedule::halfwidth(int m) const {
  if (m < 0 || m > m_max) throw std::out_of_range("schedule: level index");
  if (kind == Kind::Reference)
    return std::ldexp(1.0, static_cast<int>(-(m + 11) * (m + 11)));
  return halfwidth_tbl[static_cast<std::size_t>(m)];
}

double Schedule::level(int m) const {
  if (m < 0 || m > m_max) throw std::out_of_range("schedule: level index");
  if (kind == Kind::Reference)
    throw std::runtime_error(
        "schedule: reference levels are not representable numerically");
  if (!calibrated()) throw std::runtime_error("schedule: levels not calibrated");
  return level_tbl[static_cast<std::size_t>(m)];
}

long long Schedule::halfwidth_log2(int m) const {
  if (kind == Kind::Reference) return -static_cast<long long>(m + 11) * (m + 11);
  return std::llround(std::log2(halfwidth(m)));
}

long long Schedule::level_log2(int m) const {
  if (kind != Kind::Reference)
    throw std::runtime_error("schedule: exact level exponents exist only for the reference kind");
  long long b = m + 10;
  return b * b * b;
}

std::string Schedule::to_json() const {
  nlohmann::json j;
  j["kind"] = kind == Kind::Reference ? "reference" : "desk";
  j["m_max"] = m_max;
  if (kind == Kind::Desk) {
    j["halfwidths"] = halfwidth_tbl;
    if (calibrated()) j["levels"] = level_tbl;
  }
  return j.dump(2);
}

Schedule Schedule::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Schedule s;
  s.m_max = j.at("m_max").get<int>();
  if (j.at("kind").get<std::string>() == "reference") {
    s.kind = Kind::Reference;
    return s;
  }
  s.kind = Kind::Desk;
  s.halfwidth_tbl = j.at("halfwidths").get<std::vector<double>>();
  if (j.contains("levels")) s.level_tbl = j.at("levels").get<std::vector<double>>();
  return s;
}

// ---------------------------------------------------------------------------
// SignSequence
// ---------------------------------------------------------------------------

SignSequence SignSequence::constant(int sign) {
  SignSequence s;
  s.tail = sign >= 0 ? 1 : -1;
  return s;
}

SignSequence SignSequence::alternating(int first, int length) {
  SignSequence s;
  int cur = first >= 0 ? 1 : -1;
  for (int i = 0; i < length; ++i) {
    s.prefix.push_back(cur);
    cur = -cur;
  }
  s.tail = cur;
  return s;
}

int SignSequence::at(int m) const {
  if (m < 1) throw std::out_of_range("sign sequence: index starts at 1");
  if (m <= static_cast<int>(prefix.size())) return prefix[static_cast<std::size_t>(m - 1)];
  return tail;
}

bool SignSequence::agrees_with(const SignSequence& o, int upto) const {
  for (int m = 1; m <= upto; ++m) {
    if (at(m) != o.at(m)) return false;
  }
  return true;
}

std::string SignSequence::to_string() const {
  std::string s;
  for (int v : prefix) s.push_back(v > 0 ? '+' : '-');
  s.push_back(tail > 0 ? '+' : '-');
  s.push_back('*');
  return s;
}

// ---------------------------------------------------------------------------
// interval system
// ---------------------------------------------------------------------------

IntervalSystem interval_system(int m, const Schedule& sched) {
  if (m < 0 || m > sched.m_max) throw std::out_of_range("interval_system: level index");
  IntervalSystem sys;
  double h = sched.halfwidth(m);
  sys.i_plus = CircleInterval{0.0, h};
  sys.i_minus = CircleInterval{0.5, h};
  if (m >= 1) {
    double hp = sched.halfwidth(m - 1);
    sys.y_plus = IntervalPair{CircleInterval{0.0, hp}, CircleInterval{0.5, h}};
    sys.y_minus = IntervalPair{CircleInterval{0.5, hp}, CircleInterval{0.0, h}};
    // anchor annulus: inside the plateau of the previous scale, clear of the
    // current scale's bump support
    double ratio = h / hp;
    double lo = std::max(1.0 / 3.0, 1.125 * ratio);
    double hi2 = 2.0 / 3.0;
    if (lo >= hi2 - 1e-9)
      throw std::runtime_error("interval_system: halfwidths too coarse for anchor annuli");
    double c = 0.5 * (lo + hi2) * hp, w = 0.5 * (hi2 - lo) * hp;
    sys.m_plus = IntervalPair{CircleInterval{-c, w}, CircleInterval{c, w}};
    sys.m_minus = IntervalPair{CircleInterval{0.5 - c, w}, CircleInterval{0.5 + c, w}};
  }
  return sys;
}

// ---------------------------------------------------------------------------
// potentials
// ---------------------------------------------------------------------------

double CirclePotential::operator()(double theta) const {
  double v = base;
  for (const auto& t : terms) v += t.coef * bump_on_interval(t.interval, theta);
  return v;
}

std::vector<double> CirclePotential::breakpoints() const {
  std::vector<double> pts;
  pts.reserve(terms.size() * 4 + 2);
  for (const auto& t : terms) {
    double c = t.interval.center, h = t.interval.halfwidth;
    pts.push_back(c - h);
    pts.push_back(c - h * 2.0 / 3.0);
    pts.push_back(c + h * 2.0 / 3.0);
    pts.push_back(c + h);
  }
  pts.push_back(0.25);
  pts.push_back(0.75);
  return pts;
}

std::string CirclePotential::to_json() const {
  nlohmann::json j;
  j["base"] = base;
  j["truncation_level"] = truncation_level;
  nlohmann::json terms_j = nlohmann::json::array();
  for (const auto& t : terms)
    terms_j.push_back({{"coef", t.coef},
                       {"center", t.interval.center},
                       {"halfwidth", t.interval.halfwidth}});
  j["terms"] = terms_j;
  return j.dump(2);
}

CirclePotential CirclePotential::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CirclePotential p;
  p.base = j.at("base").get<double>();
  p.truncation_level = j.at("truncation_level").get<int>();
  for (const auto& t : j.at("terms")) {
    p.terms.push_back(Term{t.at("coef").get<double>(),
                           CircleInterval{t.at("center").get<double>(),
                                          t.at("halfwidth").get<double>()}});
  }
  return p;
}

CirclePotential build_U(const SignSequence& signs, const Schedule& sched, int M) {
  if (M > sched.m_max) throw std::out_of_range("build_U: truncation beyond schedule");
  CirclePotential U;
  U.base = -1.0 / sched.level(0);
  U.truncation_level = M;
  for (int m = 1; m <= M; ++m) {
    double c = 1.0 / sched.level(m - 1) - 1.0 / sched.level(m);
    int s = signs.at(m);
    auto sys_prev = interval_system(m - 1, sched);
    auto sys_cur = interval_system(m, sched);
    // chi_m^+ = chi_{I_{m-1}^+} + chi_{I_m^-} and mirrored for -
    U.terms.push_back({c, s > 0 ? sys_prev.i_plus : sys_prev.i_minus});
    U.terms.push_back({c, s > 0 ? sys_cur.i_minus : sys_cur.i_plus});
  }
  return U;
}

LogScalar family_modulus(const SignSequence& a, const SignSequence& b, int r,
                         const Schedule& sched) {
  int m0 = 0;
  while (m0 < sched.m_max && a.at(m0 + 1) == b.at(m0 + 1)) ++m0;
  if (m0 >= sched.m_max && a.tail == b.tail) return LogScalar::zero();

  const double ln2 = std::log(2.0);
  double chi_norm = 0.0;
  for (int l = 0; l <= r; ++l) chi_norm += master_bump_cr_norm(l);
  LogScalar sum = LogScalar::zero();
  for (int m = m0 + 1; m <= sched.m_max; ++m) {
    double lg;
    if (sched.kind == Schedule::Kind::Reference) {
      lg = ln2 * (-static_cast<double>(sched.level_log2(m - 1)) -
                  r * static_cast<double>(sched.halfwidth_log2(m)));
    } else {
      lg = -std::log(sched.level(m - 1)) - r * std::log(sched.halfwidth(m));
    }
    sum = sum + LogScalar::from_log(lg);
  }
  return LogScalar::from_linear(4.0 * chi_norm) * sum;
}

// ---------------------------------------------------------------------------
// marginals
// ---------------------------------------------------------------------------

double MarginalDensity::log_density(double theta) const {
  return beta * potential(theta) - logZ.log();
}

MarginalDensity marginal_density(const CirclePotential& U, double beta,
                                 double tolerance) {
  if (beta < 0) throw std::invalid_argument("marginal_density: beta must be >= 0");
  MarginalDensity d;
  d.potential = U;
  d.beta = beta;
  // beta * U carries evaluation noise ~ beta * ulp(term magnitudes); panels
  // cannot converge below that floor, so the tolerance tracks it
  double scale = std::abs(U.base);
  for (const auto& t : U.terms) scale += std::abs(t.coef);
  double eff_tol = std::max(tolerance, 1e-14 * beta * std::max(scale, 1.0));
  d.partition = PanelPartition::from_breakpoints(U.breakpoints(), eff_tol);
  d.logZ = num::log_integrate_exp(
      [&](double t) { return beta * U(t); }, d.partition);
  return d;
}

double interval_mass(const MarginalDensity& d, const CircleInterval& I) {
  if (I.halfwidth >= 0.5) return 1.0;
  if (I.halfwidth <= 0.0) return 0.0;
  auto lg = num::log_integrate_exp_arc(
      [&](double t) { return d.beta * d.potential(t); }, d.partition,
      I.center - I.halfwidth, I.center + I.halfwidth);
  return std::exp(lg.log() - d.logZ.log());
}

double interval_mass(const MarginalDensity& d, const IntervalPair& p) {
  return interval_mass(d, p.first) + interval_mass(d, p.second);
}

void export_density_csv(const MarginalDensity& d, const std::string& path,
                        int samples) {
  std::ofstream out(path);
  out << "theta,log_density\n";
  for (int i = 0; i < samples; ++i) {
    double t = static_cast<double>(i) / samples;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, d.log_density(t));
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// verification + calibration
// ---------------------------------------------------------------------------

CircleInterval phase_window(int m, int sign, const Schedule& sched) {
  if (m < 1) throw std::out_of_range("phase_window: m >= 1");
  double hw;
  if (sched.kind == Schedule::Kind::Reference) {
    hw = std::ldexp(1.0, -(m + 1) * (m + 1));
  } else {
    hw = sched.halfwidth(m - 1);
  }
  return CircleInterval{sign > 0 ? 0.0 : 0.5, hw};
}

WindowReport verify_xy_statement(const SignSequence& signs, int m, int m_hat,
                                 double beta, const Schedule& sched,
                                 double tolerance) {
  if (!(m_hat >= m && m >= 1))
    throw std::invalid_argument("verify_xy_statement: need m_hat >= m >= 1");
  if (m_hat > sched.m_max)
    throw std::invalid_argument("verify_xy_statement: m_hat beyond schedule");
  for (int k = m; k <= m_hat; ++k) {
    if (signs.at(k) != signs.at(m))
      throw std::invalid_argument("verify_xy_statement: signs not constant on [m, m_hat]");
  }
  WindowReport rep;
  rep.required = 1.0 - std::ldexp(1.0, -m);
  rep.beta_in_range = beta >= sched.level(m) && beta <= sched.level(m_hat);
  auto U = build_U(signs, sched, sched.m_max);
  auto d = marginal_density(U, beta, tolerance);
  rep.achieved = interval_mass(d, phase_window(m, signs.at(m), sched));
  rep.holds = rep.achieved >= rep.required;
  return rep;
}

namespace {

std::vector<SignSequence> all_patterns(int m_max) {
  std::vector<SignSequence> out;
  for (int bits = 0; bits < (1 << m_max); ++bits) {
    SignSequence s;
    for (int m = 0; m < m_max; ++m) s.prefix.push_back((bits >> m) & 1 ? -1 : 1);
    s.tail = s.prefix.back();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

Schedule calibrate_desk_levels(Schedule sched, double level0) {
  if (sched.kind != Schedule::Kind::Desk)
    throw std::invalid_argument("calibrate: desk schedules only");
  const int M = sched.m_max;
  sched.level_tbl.assign(static_cast<std::size_t>(M) + 1, level0);
  for (int m = 1; m <= M; ++m)
    sched.level_tbl[static_cast<std::size_t>(m)] =
        sched.level_tbl[static_cast<std::size_t>(m - 1)] * 16.0;  // seed

  auto patterns = all_patterns(M);
  auto window_ok = [&](int m, double beta) {
    // the mass target at the stage level: past 1 - 2^-(m+1), and past 15/16
    // so that alternating sweeps keep their margins
    double target = std::max(1.0 - std::ldexp(1.0, -(m + 1)), 15.0 / 16.0);
    for (const auto& p : patterns) {
      auto U = build_U(p, sched, M);
      auto d = marginal_density(U, beta, 1e-11);
      double mass = interval_mass(d, phase_window(m, p.at(m), sched));
      if (mass < target) return false;
    }
    return true;
  };

  for (int pass = 0; pass < 6; ++pass) {
    bool changed = false;
    for (int m = 1; m <= M; ++m) {
      double beta = std::max(sched.level_tbl[static_cast<std::size_t>(m)],
                             2.0 * sched.level_tbl[static_cast<std::size_t>(m - 1)]);
      sched.level_tbl[static_cast<std::size_t>(m)] = beta;
      int doublings = 0;
      while (!window_ok(m, sched.level_tbl[static_cast<std::size_t>(m)])) {
        sched.level_tbl[static_cast<std::size_t>(m)] *= 2.0;
        changed = true;
        if (++doublings > 60)
          throw std::runtime_error("calibrate: level search exceeded doubling cap at m=" +
                                   std::to_string(m));
      }
    }
    if (!changed) return sched;
  }
  throw std::runtime_error("calibrate: level vector failed to stabilize");
}

SignSequence schedule_signs(const std::vector<double>& betas_hat,
                            const SignSequence& signs0, int m0,
                            const Schedule& sched) {
  if (betas_hat.empty()) throw std::invalid_argument("schedule_signs: empty beta list");
  // largest m >= 1 with level(m) <= beta
  auto level_index = [&](double beta) {
    int best = 0;
    for (int m = 1; m <= sched.m_max; ++m) {
      if (sched.level(m) <= beta) best = m;
    }
    return best;
  };
  if (betas_hat.front() < sched.level(std::min(m0 + 1, sched.m_max)))
    throw std::invalid_argument("schedule_signs: first beta below level(m0+1)");

  std::vector<int> cells;  // thinned: at most one beta per level cell
  double prev_beta = -1.0;
  for (double b : betas_hat) {
    if (b <= prev_beta)
      throw std::invalid_argument("schedule_signs: betas must be strictly increasing");
    prev_beta = b;
    int m = level_index(b);
    if (m < 1) throw std::invalid_argument("schedule_signs: beta below level(1)");
    if (!cells.empty() && cells.back() == m) continue;  // same cell: drop
    if (!cells.empty() && m < cells.back())
      throw std::invalid_argument("schedule_signs: betas not increasing after thinning");
    cells.push_back(m);
  }

  SignSequence out;
  out.prefix.assign(static_cast<std::size_t>(sched.m_max), +1);
  for (int m = 1; m <= sched.m_max; ++m)
    out.prefix[static_cast<std::size_t>(m - 1)] = signs0.at(m);
  int last_sign = signs0.tail;
  for (std::size_t l = 0; l < cells.size(); ++l) {
    int sign = (l % 2 == 0) ? +1 : -1;
    int lo = cells[l];
    int hi = (l + 1 < cells.size()) ? cells[l + 1] - 1 : sched.m_max;
    for (int m = std::max(lo, m0 + 1); m <= std::min(hi, sched.m_max); ++m)
      out.prefix[static_cast<std::size_t>(m - 1)] = sign;
    last_sign = sign;
  }
  out.tail = last_sign;
  return out;
}

}  // namespace gibbslab::xy
