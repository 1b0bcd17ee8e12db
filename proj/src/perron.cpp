#include "gibbslab/perron.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gibbslab::num {

namespace {

std::vector<char> reach(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<int> stack{start};
  seen[static_cast<std::size_t>(start)] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

struct IterationResult {
  std::vector<double> vec_log;  // normalized: max component log = 0
  double lambda_shift_log;      // log of Perron value of the shifted matrix
  double residual;
  int iterations;
  bool converged;
};

// damped power iteration; `entries` hold (col, logw - shift) per row
IterationResult iterate(const std::vector<std::vector<std::pair<int, double>>>& rows,
                        double tol, int max_iterations, bool log_domain) {
  const std::size_t n = rows.size();
  IterationResult out;
  out.vec_log.assign(n, 0.0);
  std::vector<double> x(n, 1.0), y(n), xl(n, 0.0), yl(n), q(n);
  int it = 0;
  bool ok = false;
  double lam_log = 0.0, resid = 0.0;
  while (it < max_iterations) {
    ++it;
    if (!log_domain) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];  // +I damping
        for (const auto& [c, lw] : rows[i]) s += std::exp(lw) * x[static_cast<std::size_t>(c)];
        y[i] = s;
      }
      double mx = 0.0;
      for (double v : y) mx = std::max(mx, v);
      if (!(mx > 0.0) || !std::isfinite(mx)) { log_domain = true; for (std::size_t i = 0; i < n; ++i) xl[i] = 0.0; continue; }
      bool under = false;
      for (std::size_t i = 0; i < n; ++i) {
        y[i] /= mx;
        if (y[i] <= 0.0) under = true;
      }
      if (under) { log_domain = true; for (std::size_t i = 0; i < n; ++i) xl[i] = 0.0; continue; }
      // undamped Collatz ratios for value and convergence
      double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& [c, lw] : rows[i]) s += std::exp(lw) * y[static_cast<std::size_t>(c)];
        q[i] = s / y[i];
        qmin = std::min(qmin, q[i]);
        qmax = std::max(qmax, q[i]);
      }
      lam_log = std::log(0.5 * (qmin + qmax));
      resid = (qmax - qmin) / (qmin + qmax);
      x = y;
      if (resid <= tol) { ok = true; break; }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        double s = xl[i];
        for (const auto& [c, lw] : rows[i]) s = log_add_exp(s, lw + xl[static_cast<std::size_t>(c)]);
        yl[i] = s;
      }
      double mx = -std::numeric_limits<double>::infinity();
      for (double v : yl) mx = std::max(mx, v);
      for (std::size_t i = 0; i < n; ++i) yl[i] -= mx;
      double qmin = std::numeric_limits<double>::infinity(), qmax = -qmin;
      for (std::size_t i = 0; i < n; ++i) {
        double s = -std::numeric_limits<double>::infinity();
        for (const auto& [c, lw] : rows[i]) s = log_add_exp(s, lw + yl[static_cast<std::size_t>(c)]);
        double qi = s - yl[i];
        qmin = std::min(qmin, qi);
        qmax = std::max(qmax, qi);
      }
      lam_log = 0.5 * (qmin + qmax);
      resid = 0.5 * (qmax - qmin);
      xl = yl;
      if (resid <= tol) { ok = true; break; }
    }
  }
  if (!log_domain) {
    for (std::size_t i = 0; i < n; ++i) out.vec_log[i] = std::log(x[i]);
  } else {
    out.vec_log = xl;
  }
  out.lambda_shift_log = lam_log;
  out.residual = resid;
  out.iterations = it;
  out.converged = ok;
  return out;
}

}  // namespace

SparseNonnegMatrix SparseNonnegMatrix::transposed() const {
  SparseNonnegMatrix t(dim);
  for (int i = 0; i < dim; ++i) {
    for (const auto& e : rows[static_cast<std::size_t>(i)]) t.add(e.col, i, e.weight);
  }
  return t;
}

bool SparseNonnegMatrix::strongly_connected() const {
  if (dim <= 0) return false;
  std::vector<std::vector<int>> fwd(static_cast<std::size_t>(dim)),
      bwd(static_cast<std::size_t>(dim));
  bool any_edge = false;
  for (int i = 0; i < dim; ++i) {
    for (const auto& e : rows[static_cast<std::size_t>(i)]) {
      if (e.weight.is_zero) continue;
      fwd[static_cast<std::size_t>(i)].push_back(e.col);
      bwd[static_cast<std::size_t>(e.col)].push_back(i);
      any_edge = true;
    }
  }
  if (!any_edge) return false;
  auto f = reach(fwd, 0);
  auto b = reach(bwd, 0);
  for (int i = 0; i < dim; ++i) {
    if (!f[static_cast<std::size_t>(i)] || !b[static_cast<std::size_t>(i)]) return false;
  }
  if (dim == 1) {
    for (const auto& e : rows[0]) {
      if (e.col == 0 && !e.weight.is_zero) return true;
    }
    return false;
  }
  return true;
}

PerronData perron(const SparseNonnegMatrix& m, double tol, int max_iterations) {
  if (m.dim <= 0) throw std::invalid_argument("perron: empty matrix");
  if (!m.strongly_connected())
    throw std::invalid_argument("perron: support graph is not strongly connected");

  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& row : m.rows) {
    for (const auto& e : row) {
      if (!e.weight.is_zero) shift = std::max(shift, e.weight.log_magnitude);
    }
  }

  auto shifted = [&](const SparseNonnegMatrix& mm) {
    std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(mm.dim));
    for (int i = 0; i < mm.dim; ++i) {
      for (const auto& e : mm.rows[static_cast<std::size_t>(i)]) {
        if (e.weight.is_zero) continue;
        rows[static_cast<std::size_t>(i)].emplace_back(e.col, e.weight.log_magnitude - shift);
      }
    }
    return rows;
  };

  auto right = iterate(shifted(m), tol, max_iterations, false);
  if (!right.converged)
    throw std::runtime_error("perron: no convergence after " +
                             std::to_string(right.iterations) +
                             " iterations, residual " + std::to_string(right.residual));
  auto left = iterate(shifted(m.transposed()), tol, max_iterations, false);
  if (!left.converged)
    throw std::runtime_error("perron: no convergence (left vector), residual " +
                             std::to_string(left.residual));

  // normalize pairing <l, r> = 1 in the log domain
  double pair_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < right.vec_log.size(); ++i)
    pair_log = log_add_exp(pair_log, left.vec_log[i] + right.vec_log[i]);

  PerronData out;
  out.value = LogScalar::from_log(shift + right.lambda_shift_log);
  out.right_log = right.vec_log;
  out.left_log = std::move(left.vec_log);
  for (auto& v : out.left_log) v -= pair_log;
  out.residual = std::max(right.residual, left.residual);
  out.iterations = right.iterations + left.iterations;
  return out;
}

}  // namespace gibbslab::num
