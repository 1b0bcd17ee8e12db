#pragma once

// Perron eigendata of sparse nonnegative matrices. Weights are held in the
// log domain so transfer operators with exp(beta * potential) entries can be
// handled at any beta; iteration runs in a shifted linear domain and falls
// back to pure log arithmetic when components underflow.

#include <cstdint>
#include <vector>

#include "gibbslab/log_scalar.hpp"

namespace gibbslab::num {

struct SparseNonnegMatrix {
  int dim = 0;
  struct Entry {
    int col;
    LogScalar weight;
  };
  std::vector<std::vector<Entry>> rows;

  explicit SparseNonnegMatrix(int n = 0) : dim(n), rows(static_cast<std::size_t>(n)) {}
  void add(int row, int col, LogScalar w) {
    rows[static_cast<std::size_t>(row)].push_back(Entry{col, w});
  }
  SparseNonnegMatrix transposed() const;
  bool strongly_connected() const;
};

struct PerronData {
  LogScalar value;                 // spectral radius
  std::vector<double> left_log;    // strictly positive, stored as logs
  std::vector<double> right_log;   // normalized so <left, right> = 1
  double residual = 0.0;
  int iterations = 0;
};

// Requires strongly connected support (checked; throws std::invalid_argument
// otherwise). Throws std::runtime_error on non-convergence, reporting the
// achieved residual. Iteration is damped by +I so period-2 supports converge.
PerronData perron(const SparseNonnegMatrix& m, double tol = 1e-12,
                  int max_iterations = 50000);

}  // namespace gibbslab::num
