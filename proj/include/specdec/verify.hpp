#pragma once

#include <string>
#include <vector>

#include "specdec/flows.hpp"
#include "specdec/spectral.hpp"

namespace specdec {

struct Check {
  std::string name;
  bool pass = false;
  double residual = 0;
  double tolerance = 0;
  std::string context;
  bool informative = false;  // precondition (DDL1) not certified; no pass requirement
};

struct VerificationReport {
  std::vector<Check> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass && !c.informative) return false;
    return true;
  }
  std::string summary() const;
};

/// Pairwise correlations <phi_i,phi_j>/(||phi_i|| ||phi_j||) of the exact
/// atoms; pass iff the largest off-diagonal magnitude is <= 1e-6. Atoms with
/// ||phi|| <= 1e-12 ||f|| are dropped first. The full matrix is emitted in
/// the check context. Fewer than two atoms passes vacuously.
VerificationReport check_orthogonality(const SpectralDecomposition& dec,
                                       bool ddl1_certified = true);

/// Every nonzero event subgradient of an exact gradient flow is an
/// eigenvector: |J(p_i) - ||p_i||^2| <= 1e-8 (1 + ||p_i||^2).
VerificationReport check_eigenvectors(const Regularizer& reg, const FlowTrajectory& gf);

/// f = P0 f + sum_i (t_{i+1} - t_i) p_{i+1} within 1e-8 ||f||.
VerificationReport check_eigendecomposition(const Regularizer& reg, const FlowTrajectory& gf,
                                            const Signal& f);

/// Cross-method agreement: (a) prox solves along a probe grid against the
/// exact gradient flow; (b) GF atoms against VM atoms; (c) gridded ISS jumps
/// against the exact ISS trajectory derived from the gradient flow.
VerificationReport check_equivalence(const Regularizer& reg, const Signal& f,
                                     const SolverConfig& cfg = {});

/// Empirical MINSUB test: for each sample u the maximum of
/// |<p_hat, p_hat - K^T q>| over feasible certificates q (a separable
/// closed-form maximization) must be <= 1e-8.
VerificationReport check_minsub(const Regularizer& reg, const std::vector<Signal>& samples,
                                const SolverConfig& cfg = {});

/// Deterministic uniform [-1,1]^n samples for the empirical checks.
std::vector<Signal> random_signals(const Shape& shape, int count, unsigned long long seed);

/// Matches the jumps of a gridded ISS trajectory against an exact one. Jumps
/// closer than the grid resolution ds merge in the gridded flow, so exact
/// atoms are assigned to the nearest detected jump interval and compared in
/// aggregate. Atoms below the noise floor may stay unassigned.
struct IssJumpComparison {
  int detected = 0;
  int exact = 0;
  double worst_time = 0;   // distance in s from an atom to its jump interval
  double worst_value = 0;  // ||merged jump - sum of assigned atoms||
  bool matched = true;     // every significant atom and every jump accounted for
};

IssJumpComparison compare_iss_jumps(const FlowTrajectory& gridded,
                                    const FlowTrajectory& exact, double ds);

}  // namespace specdec
