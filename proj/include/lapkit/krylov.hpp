#pragma once

#include <functional>

#include "lapkit/grid.hpp"

namespace lapkit {

using ApplyOp = std::function<void(const Vector& in, Vector& out)>;

struct SolverSettings {
  int max_iterations = 4000;
  int restart = 80;
  /// Relative residual ||b - A x|| / ||b||.
  double tol = 1e-10;
};

struct SolveResult {
  Vector x;
  int iterations = 0;
  int restarts = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Right-preconditioned restarted GMRES. precond may be empty (identity).
/// The reported residual is recomputed from A at the end, not the Arnoldi
/// estimate.
SolveResult gmres(const ApplyOp& A, const ApplyOp& precond, const Vector& b, const SolverSettings& settings,
                  const Vector* x0 = nullptr);

}  // namespace lapkit
