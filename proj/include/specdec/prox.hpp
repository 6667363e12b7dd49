#pragma once

#include "specdec/config.hpp"
#include "specdec/regularizer.hpp"
#include "specdec/signal.hpp"

namespace specdec {

struct ProxResult {
  Signal u;
  DualCertificate cert;  // K^T cert in dJ(u); u = f - t K^T cert
  SolverDiagnostics diag;
};

/// u = argmin_u 1/2 ||u - f||^2 + t J(u), solved through the dual problem
/// min_{q in B} 1/2 ||f - t K^T q||^2 with accelerated projected gradient and
/// an optional active-set polish. Stops on the certified duality gap
/// t (J(u) - <q, Ku>) <= tol_gap * (1 + ||f||^2). A certificate from a nearby
/// solve may be passed as a warm start.
ProxResult prox(const Regularizer& reg, const Signal& f, double t,
                const SolverConfig& cfg = {}, const DualCertificate* warm = nullptr);

/// Smallest T such that Q0 f / T lies in dJ(0): the time at which the
/// variational path reaches P0 f. Monotone bisection with geometric bracket
/// growth, relative tolerance 1e-8. Returns 0 when Q0 f = 0.
double extinction_time_vm(const Regularizer& reg, const Signal& f,
                          const SolverConfig& cfg = {});

/// Per-group radial clip onto the dual unit ball: q_g = w_g / max(1, ||w_g||).
DualCertificate project_dual_ball(const Regularizer& reg, const Vector& w);

namespace detail {

/// Shared dual solver: minimize 1/2 || alpha K^T q - b ||^2 over the product
/// of unit balls, with an optional set of rows pinned to fixed values.
/// FISTA with gradient-based adaptive restart; for all-singleton groups an
/// active-set polish solves the reduced equality-constrained least squares
/// exactly and verifies KKT, giving vertex-accurate certificates.
struct BallLsqResult {
  Vector q;
  SolverDiagnostics diag;
};

BallLsqResult solve_ball_lsq(const Regularizer& reg, double alpha, const Vector& b,
                             const std::vector<char>& fixed, const Vector& fixed_values,
                             const SolverConfig& cfg, const Vector* warm_start = nullptr);

/// min over q in B of ||K^T q - p||; used for dual-ball membership tests.
double membership_residual(const Regularizer& reg, const Vector& p, const SolverConfig& cfg,
                           Vector* q_out = nullptr, const Vector* warm_start = nullptr);

}  // namespace detail

}  // namespace specdec
