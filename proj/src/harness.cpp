#include "gibbslab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gibbslab/laplace.hpp"
#include "gibbslab/proofcheck.hpp"
#include "gibbslab/symbolic.hpp"
#include "gibbslab/xy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gibbslab::harness {

namespace {

constexpr const char* kVersion = "gibbslab 1.0.0";

template <typename F>
void for_indices(int n, int threads, F&& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < n) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// CSV + SVG artifacts
// ---------------------------------------------------------------------------

struct Csv {
  std::string body;
  explicit Csv(const std::string& header) { body = header + "\n"; }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) body += ",";
      body += cells[i];
    }
    body += "\n";
  }
};

struct Series {
  std::string label;
  std::vector<double> y;
};

// minimal self-contained line chart; fixed 2-decimal coordinates keep the
// bytes reproducible
std::string svg_chart(const std::string& title, const std::string& xlabel,
                      const std::vector<double>& x, const std::vector<Series>& series) {
  const double W = 640, H = 400, L = 62, R = 14, T = 30, B = 42;
  double xmin = x.front(), xmax = x.back();
  double ymin = 0.0, ymax = 1.0;
  for (const auto& s : series) {
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  auto X = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
  auto Y = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  char buf[160];
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 400\" "
       "font-family=\"monospace\" font-size=\"12\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"18\" text-anchor=\"middle\">%s</text>\n",
                (L + W - R) / 2, title.c_str());
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                L, H - B, W - R, H - B);
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                L, T, L, H - B);
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%s</text>\n",
                (L + W - R) / 2, H - 8, xlabel.c_str());
  s += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\">%.3g</text>\n", 4.0,
                Y(ymin) + 4, ymin);
  s += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\">%.3g</text>\n", 4.0,
                Y(ymax) + 4, ymax);
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%.3g</text>\n",
                X(xmin), H - B + 16, xmin);
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%.3g</text>\n",
                X(xmax), H - B + 16, xmax);
  s += buf;
  for (std::size_t k = 0; k < series.size(); ++k) {
    s += "<polyline fill=\"none\" stroke=\"";
    s += palette[k % 4];
    s += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(x[i]), Y(series[k].y[i]));
      s += buf;
    }
    s += "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" fill=\"%s\">%s</text>\n", W - R - 150,
                  T + 16.0 * (static_cast<double>(k) + 1), palette[k % 4],
                  series[k].label.c_str());
    s += buf;
  }
  s += "</svg>\n";
  return s;
}

// ---------------------------------------------------------------------------
// config pieces shared by the xy kinds
// ---------------------------------------------------------------------------

xy::SignSequence parse_signs(const json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "constant+") return xy::SignSequence::constant(+1);
    if (s == "constant-") return xy::SignSequence::constant(-1);
    if (s == "alternating+") return xy::SignSequence::alternating(+1, 8);
    if (s == "alternating-") return xy::SignSequence::alternating(-1, 8);
    throw ValidationError("signs: unknown preset '" + s + "'");
  }
  if (!j.is_object() || !j.contains("prefix"))
    throw ValidationError("signs: expected a preset string or {prefix, tail}");
  xy::SignSequence out;
  for (const auto& v : j.at("prefix")) {
    int s = v.get<int>();
    if (s != 1 && s != -1) throw ValidationError("signs: entries must be +-1");
    out.prefix.push_back(s);
  }
  out.tail = j.value("tail", out.prefix.empty() ? 1 : out.prefix.back());
  return out;
}

xy::Schedule resolve_xy_schedule(const json& p) {
  int m_max = p.value("m_max", 4);
  if (m_max < 1 || m_max > 8) throw ValidationError("m_max must be in [1,8]");
  if (p.contains("schedule") && p.at("schedule").is_object()) {
    const auto& js = p.at("schedule");
    xy::Schedule s = xy::Schedule::desk(m_max);
    if (js.contains("halfwidths"))
      s.halfwidth_tbl = js.at("halfwidths").get<std::vector<double>>();
    s.level_tbl = js.at("levels").get<std::vector<double>>();
    if (static_cast<int>(s.level_tbl.size()) != m_max + 1 ||
        static_cast<int>(s.halfwidth_tbl.size()) != m_max + 1)
      throw ValidationError("schedule tables must have m_max+1 entries");
    return s;
  }
  // default: calibrate the desk schedule (cache makes repeats cheap)
  return xy::calibrate_desk_levels(xy::Schedule::desk(m_max));
}

std::vector<double> beta_grid(const json& p, const char* key = "beta") {
  if (p.contains("betas")) {
    auto v = p.at("betas").get<std::vector<double>>();
    if (v.empty()) throw ValidationError("betas: empty list");
    return v;
  }
  if (!p.contains(key)) throw ValidationError("missing beta grid");
  const auto& b = p.at(key);
  double lo = b.at("min").get<double>(), hi = b.at("max").get<double>();
  int count = b.at("count").get<int>();
  if (count < 1 || !(lo > 0) || !(hi >= lo))
    throw ValidationError("beta grid: need count >= 1 and 0 < min <= max");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(lo * std::pow(hi / lo, t));
  }
  return out;
}

sym::EpsilonBetaSchedule parse_sym_schedule(const json& p) {
  if (!p.contains("schedule")) throw ValidationError("missing symbolic schedule");
  const auto& js = p.at("schedule");
  sym::EpsilonBetaSchedule s;
  s.eps = js.at("eps").get<std::vector<double>>();
  s.beta = js.at("beta").get<std::vector<double>>();
  if (s.eps.size() != s.beta.size() + 1)
    throw ValidationError("symbolic schedule: need eps per stage plus the tail");
  return s;
}

// ---------------------------------------------------------------------------
// kind handlers: each returns the artifact file names it wrote
// ---------------------------------------------------------------------------

std::vector<std::string> run_xy_sweep(const json& p, const fs::path& dir, int threads) {
  auto sched = resolve_xy_schedule(p);
  auto signs = parse_signs(p.value("signs", json("alternating+")));
  auto betas = beta_grid(p);
  auto U = xy::build_U(signs, sched, sched.m_max);
  xy::CircleInterval wplus{0.0, sched.halfwidth(0)};
  xy::CircleInterval wminus{0.5, sched.halfwidth(0)};

  std::vector<std::array<double, 3>> rows(betas.size());
  for_indices(static_cast<int>(betas.size()), threads, [&](int i) {
    auto iu = static_cast<std::size_t>(i);
    auto d = xy::marginal_density(U, betas[iu]);
    rows[iu] = {xy::interval_mass(d, wplus), xy::interval_mass(d, wminus),
                d.logZ.log()};
  });

  Csv csv("beta,mass_plus_window,mass_minus_window,logZ");
  std::vector<double> xs, mp, mm;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    csv.row({format_double(betas[i]), format_double(rows[i][0]),
             format_double(rows[i][1]), format_double(rows[i][2])});
    xs.push_back(std::log10(betas[i]));
    mp.push_back(rows[i][0]);
    mm.push_back(rows[i][1]);
  }
  write_text(dir / "sweep.csv", csv.body);
  write_text(dir / "chart.svg",
             svg_chart("phase-window mass (beta dimensionless, mass in [0,1])",
                       "log10 beta", xs, {{"mass_plus", mp}, {"mass_minus", mm}}));
  std::vector<std::string> artifacts{"sweep.csv", "chart.svg"};
  if (p.contains("density_samples")) {
    int n = p.at("density_samples").get<int>();
    if (n < 2) throw ValidationError("density_samples must be >= 2");
    auto d = xy::marginal_density(U, betas.back());
    xy::export_density_csv(d, (dir / "density.csv").string(), n);
    artifacts.push_back("density.csv");
  }
  return artifacts;
}

std::vector<std::string> run_xy_verify(const json& p, const fs::path& dir, int threads) {
  auto sched = resolve_xy_schedule(p);
  auto signs = parse_signs(p.at("signs"));
  int m = p.at("m").get<int>(), m_hat = p.at("m_hat").get<int>();
  int count = p.value("count", 9);
  std::vector<double> betas;
  for (int i = 0; i < count; ++i) {
    double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    betas.push_back(sched.level(m) * std::pow(sched.level(m_hat) / sched.level(m), t));
  }
  std::vector<xy::WindowReport> reps(betas.size());
  for_indices(static_cast<int>(betas.size()), threads, [&](int i) {
    auto iu = static_cast<std::size_t>(i);
    reps[iu] = xy::verify_xy_statement(signs, m, m_hat, betas[iu], sched);
  });
  Csv csv("beta,achieved,required,holds");
  for (std::size_t i = 0; i < betas.size(); ++i)
    csv.row({format_double(betas[i]), format_double(reps[i].achieved),
             format_double(reps[i].required), reps[i].holds ? "1" : "0"});
  write_text(dir / "verify.csv", csv.body);
  return {"verify.csv"};
}

std::vector<std::string> run_xy_schedule(const json& p, const fs::path& dir, int) {
  int m_max = p.value("m_max", 4);
  auto sched = xy::calibrate_desk_levels(xy::Schedule::desk(m_max));
  write_text(dir / "schedule.json", sched.to_json());
  Csv csv("m,halfwidth,level");
  for (int m = 0; m <= m_max; ++m)
    csv.row({std::to_string(m), format_double(sched.halfwidth(m)),
             format_double(sched.level(m))});
  write_text(dir / "levels.csv", csv.body);
  return {"schedule.json", "levels.csv"};
}

std::vector<std::string> run_laplace(const json& p, const fs::path& dir, int threads) {
  xy::TrigPoly U;
  U.constant = p.value("constant", 0.0);
  if (p.contains("cos")) U.cos_coef = p.at("cos").get<std::vector<double>>();
  if (p.contains("sin")) U.sin_coef = p.at("sin").get<std::vector<double>>();
  auto atoms = xy::laplace_limit(U);
  Csv csv("theta,weight,order,omega");
  for (const auto& a : atoms)
    csv.row({format_double(a.theta), format_double(a.weight), std::to_string(a.order),
             format_double(a.omega)});
  write_text(dir / "atoms.csv", csv.body);
  std::vector<std::string> artifacts{"atoms.csv"};

  if (p.contains("betas")) {
    auto betas = p.at("betas").get<std::vector<double>>();
    double radius = p.value("window", 0.03);
    double scale = std::abs(U.constant);
    for (double c : U.cos_coef) scale += std::abs(c);
    for (double c : U.sin_coef) scale += std::abs(c);
    Csv mass_csv("beta,theta,window_mass");
    std::vector<std::vector<double>> masses(betas.size());
    for_indices(static_cast<int>(betas.size()), threads, [&](int i) {
      auto iu = static_cast<std::size_t>(i);
      double beta = betas[iu];
      auto part = num::PanelPartition::uniform(
          96, std::max(1e-12, 1e-14 * beta * std::max(scale, 1.0)));
      auto f = [&](double t) { return beta * U(t); };
      double logz = num::log_integrate_exp(f, part).log();
      for (const auto& a : atoms) {
        double lg = num::log_integrate_exp_arc(f, part, a.theta - radius,
                                               a.theta + radius)
                        .log();
        masses[iu].push_back(std::exp(lg - logz));
      }
    });
    for (std::size_t i = 0; i < betas.size(); ++i) {
      for (std::size_t j = 0; j < atoms.size(); ++j)
        mass_csv.row({format_double(betas[i]), format_double(atoms[j].theta),
                      format_double(masses[i][j])});
    }
    write_text(dir / "masses.csv", mass_csv.body);
    artifacts.push_back("masses.csv");
  }
  return artifacts;
}

std::vector<std::string> run_proof_replay(const json& p, const fs::path& dir, int) {
  int m0_min = p.value("m0_min", 1), m0_max = p.value("m0_max", 50);
  int k_cap = p.value("k_cap", 40);
  std::string name = p.value("schedule", "canonical");
  chains::ExactSchedule sched = name == "canonical" ? chains::ExactSchedule::canonical()
                               : name == "weakened_levels"
                                   ? chains::ExactSchedule::weakened_levels()
                                   : throw ValidationError("proof_replay: unknown schedule '" +
                                                           name + "'");
  if (m0_min < 1 || m0_max < m0_min)
    throw ValidationError("proof_replay: need 1 <= m0_min <= m0_max");
  Csv csv(chains::StepReport::csv_header());
  int total = 0, held = 0;
  std::string first_failure;
  for (int m0 = m0_min; m0 <= m0_max; ++m0) {
    for (const auto& rep : chains::check_case(m0, sched, k_cap)) {
      csv.row({rep.csv_row()});
      ++total;
      if (rep.holds) ++held;
      else if (first_failure.empty())
        first_failure = chains::step_name(rep.step.id) + "[m0=" +
                        std::to_string(rep.step.m0) + "] link=" + rep.link;
    }
  }
  write_text(dir / "steps.csv", csv.body);
  Csv sum("total,holds,first_failure");
  sum.row({std::to_string(total), std::to_string(held), first_failure});
  write_text(dir / "summary.csv", sum.body);
  return {"steps.csv", "summary.csv"};
}

std::vector<std::string> run_sym_calibrate(const json& p, const fs::path& dir, int threads) {
  int levels = p.value("levels", 3);
  std::string profile = p.value("profile", "sixth");
  sym::CalibrateOptions opts;
  opts.depth = p.value("depth", 11);
  opts.threads = threads;
  auto ladder = sym::entropy_ladder(levels + 1, [](int m) { return m + 2; });
  std::function<double(int)> delta;
  if (profile == "sixth") delta = [](int) { return 1.0 / 6.0; };
  else if (profile == "dyadic") delta = [](int m) { return std::ldexp(1.0, -(m + 3)); };
  else throw ValidationError("sym_calibrate: unknown profile '" + profile + "'");
  auto sched = sym::calibrate(ladder, levels, delta, opts);

  json js;
  js["eps"] = sched.eps;
  js["beta"] = sched.beta;
  js["profile"] = profile;
  js["depth"] = opts.depth;
  write_text(dir / "sym_schedule.json", js.dump(2));
  Csv csv("m,beta,eps");
  for (std::size_t m = 0; m < sched.beta.size(); ++m)
    csv.row({std::to_string(m + 1), format_double(sched.beta[m]),
             format_double(sched.eps[m])});
  write_text(dir / "schedule.csv", csv.body);
  return {"sym_schedule.json", "schedule.csv"};
}

std::vector<std::string> run_sym_sweep(const json& p, const fs::path& dir, int threads) {
  auto sched = parse_sym_schedule(p);
  auto signs = parse_signs(p.value("signs", json("alternating+")));
  auto betas = beta_grid(p);
  int levels = static_cast<int>(sched.beta.size());
  auto ladder = sym::entropy_ladder(levels + 1, [](int m) { return m + 2; });
  auto phi = sym::build_phi(signs, sched.eps, ladder, levels);

  std::vector<std::array<double, 3>> rows(betas.size());
  for_indices(static_cast<int>(betas.size()), threads, [&](int i) {
    auto iu = static_cast<std::size_t>(i);
    int depth = sym::depth_for_beta(betas[iu], phi.lip_bound());
    auto pot = sym::truncate_depth(phi, depth);
    auto mu = sym::equilibrium_state(pot, betas[iu]);
    rows[iu] = {sym::phase_mass(mu, +1), sym::phase_mass(mu, -1), mu.pressure};
  });
  Csv csv("beta,mass_plus,mass_minus,pressure");
  std::vector<double> xs, mp, mm;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    csv.row({format_double(betas[i]), format_double(rows[i][0]),
             format_double(rows[i][1]), format_double(rows[i][2])});
    xs.push_back(std::log10(betas[i]));
    mp.push_back(rows[i][0]);
    mm.push_back(rows[i][1]);
  }
  write_text(dir / "sweep.csv", csv.body);
  write_text(dir / "chart.svg",
             svg_chart("clopen phase mass (beta dimensionless, mass in [0,1])",
                       "log10 beta", xs, {{"mass_plus", mp}, {"mass_minus", mm}}));
  std::vector<std::string> artifacts{"sweep.csv", "chart.svg"};
  if (p.value("measure_csv", false)) {
    int depth = sym::depth_for_beta(betas.back(), phi.lip_bound());
    auto mu = sym::equilibrium_state(sym::truncate_depth(phi, depth), betas.back());
    mu.export_csv((dir / "measure.csv").string());
    artifacts.push_back("measure.csv");
  }
  return artifacts;
}

std::vector<std::string> run_sym_verify(const json& p, const fs::path& dir, int) {
  auto sched = parse_sym_schedule(p);
  auto signs = parse_signs(p.at("signs"));
  int m = p.at("m").get<int>(), m_hat = p.at("m_hat").get<int>();
  int count = p.value("count", 5);
  double required = p.value("required", 1.0 - std::ldexp(1.0, -m));
  int levels = static_cast<int>(sched.beta.size());
  auto ladder = sym::entropy_ladder(levels + 1, [](int mm) { return mm + 2; });
  std::vector<double> betas;
  double lo = sched.beta[static_cast<std::size_t>(m - 1)];
  double hi = sched.beta[static_cast<std::size_t>(m_hat - 1)];
  for (int i = 0; i < count; ++i) {
    double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    betas.push_back(lo * std::pow(hi / lo, t));
  }
  double lip = 0.0;
  for (std::size_t i = 0; i + 1 < sched.eps.size(); ++i) lip += sched.eps[i];
  lip /= 4.0;
  int depth = p.value("depth", sym::depth_for_beta(hi, lip));
  auto reps = sym::verify_symbolic_statement(signs, m, m_hat, betas, sched, ladder,
                                             depth, required);
  Csv csv("beta,achieved,required,holds");
  for (const auto& r : reps)
    csv.row({format_double(r.beta), format_double(r.achieved),
             format_double(r.required), r.holds ? "1" : "0"});
  write_text(dir / "verify.csv", csv.body);
  return {"verify.csv"};
}

std::vector<std::string> run_ladder(const json& p, const fs::path& dir, int) {
  int levels = p.value("levels", 4);
  auto l = sym::entropy_ladder(levels, [](int m) { return m + 2; });
  Csv csv("m,gap,entropy_plus,entropy_minus");
  json members = json::array();
  for (int m = 0; m <= levels; ++m) {
    auto mu = static_cast<std::size_t>(m);
    csv.row({std::to_string(m), std::to_string(m + 2),
             format_double(l.entropy_plus[mu]), format_double(l.entropy_minus[mu])});
    members.push_back(json::parse(l.plus[mu].to_json()));
  }
  write_text(dir / "ladder.csv", csv.body);
  write_text(dir / "ladder.json", members.dump(2));
  return {"ladder.csv", "ladder.json"};
}

std::vector<std::string> run_appendix_checks(const json& p, const fs::path& dir, int) {
  int max_period = p.value("max_period", 8);
  int stages = p.value("stages", 7);
  int depth = p.value("depth", 12);
  Csv marg("n,alpha,entropy");
  for (int n : {1, 2, 4, 8}) {
    auto r = sym::marginal_entropy_argmax(n);
    marg.row({std::to_string(n), format_double(r.alpha), format_double(r.entropy)});
  }
  write_text(dir / "marginal.csv", marg.body);

  auto ladder = sym::entropy_ladder(stages + 1, [](int m) { return m + 2; });
  std::vector<double> eps;
  for (int m = 0; m < stages; ++m) eps.push_back(std::ldexp(1.0, -m));
  auto pot = sym::truncate_depth(
      sym::build_phi(xy::SignSequence::alternating(+1, stages), eps, ladder, stages),
      depth);
  auto arg = sym::maximizing_orbit_check(pot, max_period);
  Csv orb("word,period,average");
  for (const auto& o : arg) {
    std::string w(static_cast<std::size_t>(o.period), '0');
    for (int i = 0; i < o.period; ++i)
      if ((o.word >> (o.period - 1 - i)) & 1u) w[static_cast<std::size_t>(i)] = '1';
    orb.row({w, std::to_string(o.period), format_double(o.average)});
  }
  write_text(dir / "orbits.csv", orb.body);
  return {"marginal.csv", "orbits.csv"};
}

// ---------------------------------------------------------------------------
// cache
// ---------------------------------------------------------------------------

struct CacheLock {
  fs::path path;
  bool held = false;
  explicit CacheLock(const fs::path& dir) : path(dir / ".lock") {
    for (int attempt = 0; attempt < 200; ++attempt) {
      std::ofstream probe(path, std::ios::out | std::ios::app);
      // single-writer: creation of the sentinel marks the writer
      if (!fs::exists(dir / ".writing")) {
        std::ofstream mark(dir / ".writing");
        held = true;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  ~CacheLock() {
    if (held) {
      std::error_code ec;
      fs::remove(path.parent_path() / ".writing", ec);
    }
  }
};

fs::path cache_root(const std::string& out_dir) {
  return fs::path(out_dir) / ".cache";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a_file(const std::string& path) {
  auto text = read_text(path);
  return fnv1a(text.data(), text.size());
}

RunConfig RunConfig::from_file(const std::string& path) {
  if (!fs::exists(path)) throw ValidationError("config file not found: " + path);
  return from_text(read_text(path));
}

RunConfig RunConfig::from_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind"))
    throw ValidationError("config must be an object with a 'kind'");
  RunConfig c;
  c.text = j.dump(2);  // nlohmann orders keys: canonical form
  return c;
}

std::string RunConfig::kind() const { return json::parse(text).at("kind").get<std::string>(); }

std::string RunConfig::hash() const { return hex64(fnv1a(text.data(), text.size())); }

RunResult cmd_run(const RunConfig& config, const RunOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  const std::string kind = config.kind();
  json params = json::parse(config.text);

  using Handler = std::vector<std::string> (*)(const json&, const fs::path&, int);
  Handler handler = nullptr;
  if (kind == "xy_sweep") handler = &run_xy_sweep;
  else if (kind == "xy_verify") handler = &run_xy_verify;
  else if (kind == "xy_schedule") handler = &run_xy_schedule;
  else if (kind == "laplace") handler = &run_laplace;
  else if (kind == "proof_replay") handler = &run_proof_replay;
  else if (kind == "sym_calibrate") handler = &run_sym_calibrate;
  else if (kind == "sym_sweep") handler = &run_sym_sweep;
  else if (kind == "sym_verify") handler = &run_sym_verify;
  else if (kind == "ladder") handler = &run_ladder;
  else if (kind == "appendix_checks") handler = &run_appendix_checks;
  else throw ValidationError("unknown kind '" + kind + "'");

  fs::path out(opts.out_dir);
  fs::create_directories(out);
  RunResult result;

  fs::path entry = cache_root(opts.out_dir) / config.hash();
  if (!opts.no_cache && fs::exists(entry / "meta.json")) {
    json meta;
    bool usable = true;
    try {
      meta = json::parse(read_text(entry / "meta.json"));
      for (const auto& a : meta.at("artifacts")) {
        auto name = a.get<std::string>();
        if (!fs::exists(entry / name)) usable = false;
      }
    } catch (const std::exception&) {
      usable = false;
    }
    if (usable) {
      for (const auto& a : meta.at("artifacts")) {
        auto name = a.get<std::string>();
        fs::copy_file(entry / name, out / name, fs::copy_options::overwrite_existing);
        result.artifacts.push_back(name);
      }
      result.from_cache = true;
    } else {
      std::fprintf(stderr, "warning: cache entry %s corrupt, bypassing\n",
                   config.hash().c_str());
    }
  }

  if (!result.from_cache) {
    try {
      result.artifacts = handler(params, out, opts.threads);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("config field error: ") + e.what());
    }
    if (!opts.no_cache) {
      CacheLock lock(cache_root(opts.out_dir) / "");
      fs::create_directories(entry);
      for (const auto& name : result.artifacts)
        fs::copy_file(out / name, entry / name, fs::copy_options::overwrite_existing);
      json meta;
      meta["hash"] = config.hash();
      meta["kind"] = kind;
      meta["config"] = json::parse(config.text);
      meta["artifacts"] = result.artifacts;
      meta["stamp"] = static_cast<long long>(
          std::chrono::duration_cast<std::chrono::milliseconds>(
              std::chrono::system_clock::now().time_since_epoch())
              .count());
      write_text(entry / "meta.json", meta.dump(2));
    }
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest;
  manifest["config_hash"] = config.hash();
  manifest["kind"] = kind;
  manifest["version"] = kVersion;
  manifest["wall_seconds"] = result.wall_seconds;
  manifest["from_cache"] = result.from_cache;
  json digests;
  for (const auto& name : result.artifacts)
    digests[name] = hex64(fnv1a_file((out / name).string()));
  manifest["outputs"] = digests;
  manifest["input_digest"] = hex64(fnv1a(config.text.data(), config.text.size()));
  write_text(out / "manifest.json", manifest.dump(2));
  return result;
}

int cmd_cache(const std::string& action, const std::string& out_dir) {
  fs::path root = cache_root(out_dir);
  if (action == "clear") {
    std::error_code ec;
    std::uintmax_t n = fs::exists(root) ? fs::remove_all(root, ec) : 0;
    std::printf("cache cleared (%ju files)\n", static_cast<std::uintmax_t>(n));
    return 0;
  }
  std::vector<json> entries;
  if (fs::exists(root)) {
    for (const auto& e : fs::directory_iterator(root)) {
      if (!e.is_directory()) continue;
      auto meta_path = e.path() / "meta.json";
      if (!fs::exists(meta_path)) continue;
      try {
        entries.push_back(json::parse(read_text(meta_path)));
      } catch (const std::exception&) {
        throw CacheIntegrityError("unreadable cache entry: " + e.path().string());
      }
    }
  }
  std::sort(entries.begin(), entries.end(), [](const json& a, const json& b) {
    return a.value("stamp", 0ll) < b.value("stamp", 0ll);
  });
  if (action == "list") {
    for (const auto& m : entries)
      std::printf("%s  %s  %lld\n", m.at("hash").get<std::string>().c_str(),
                  m.at("kind").get<std::string>().c_str(), m.value("stamp", 0ll));
    std::printf("%zu entries\n", entries.size());
    return 0;
  }
  if (action == "verify") {
    if (entries.empty()) {
      std::printf("cache empty, nothing to verify\n");
      return 0;
    }
    std::mt19937_64 rng(std::random_device{}());
    const json& pick = entries[rng() % entries.size()];
    auto hash = pick.at("hash").get<std::string>();
    std::printf("verifying entry %s (%s)\n", hash.c_str(),
                pick.at("kind").get<std::string>().c_str());
    fs::path tmp = root / ".verify_tmp";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    RunOptions ropts;
    ropts.out_dir = tmp.string();
    ropts.no_cache = true;
    auto cfg = RunConfig::from_text(pick.at("config").dump());
    auto res = cmd_run(cfg, ropts);
    for (const auto& name : res.artifacts) {
      auto fresh = fnv1a_file((tmp / name).string());
      auto cached = fnv1a_file((root / hash / name).string());
      if (fresh != cached)
        throw CacheIntegrityError("cache digest mismatch for entry " + hash +
                                  " artifact " + name);
    }
    fs::remove_all(tmp);
    std::printf("entry %s verified: recomputation matches\n", hash.c_str());
    return 0;
  }
  throw ValidationError("cache: unknown action '" + action + "'");
}

}  // namespace gibbslab::harness
