#pragma once

#include <stdexcept>
#include <string>

namespace specdec {

/// Tolerances and iteration limits for the dual solvers.
struct SolverConfig {
  int max_iters = 20000;
  double tol_gap = 1e-10;     // relative duality-gap tolerance
  double tol_member = 1e-9;   // dual-ball membership residual tolerance
  bool polish = true;         // active-set refinement for polyhedral problems
};

struct SolverDiagnostics {
  int iterations = 0;
  double gap = 0.0;       // final certified gap (or fixed-point residual)
  bool exact = false;     // active-set polish verified KKT exactly
  bool converged = false;
};

/// Thrown when an iterative solve hits its iteration cap before reaching
/// the requested tolerance. Carries the last residual for diagnosis.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace specdec
