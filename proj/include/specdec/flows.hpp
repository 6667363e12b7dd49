#pragma once

#include <vector>

#include "specdec/prox.hpp"
#include "specdec/regularizer.hpp"
#include "specdec/signal.hpp"

namespace specdec {

enum class Method { VM, GF, IS };
enum class Mode { exact, gridded };

/// One node of an exact trajectory. For the gradient flow, p is the
/// subgradient driving the segment (t_prev, t]; events[0] is always
/// {t = 0, u = f, p = 0}. For the inverse scale space flow in wavelength
/// time, u is the plateau value on (t, t_next) and p = q_IS(1/t).
struct FlowEvent {
  double t = 0;
  Signal u;
  Signal p;
};

struct FlowTrajectory {
  Method method = Method::GF;
  Mode mode = Mode::exact;

  std::vector<FlowEvent> events;  // exact mode

  // gridded mode; grid_p[k] is the implicit-Euler subgradient on
  // (grid_t[k-1], grid_t[k]] for GF, the optimality subgradient (f-u)/t for
  // VM, and the accumulated ISS dual variable for IS.
  std::vector<double> grid_t;
  std::vector<Signal> grid_u;
  std::vector<Signal> grid_p;

  double extinction_time = 0;
  Signal nullspace_part;
  Signal input;
  bool ddl1_path = false;  // exact trajectory produced by the DDL1 fast path

  int num_events() const {
    return mode == Mode::exact ? static_cast<int>(events.size()) - 1 : 0;
  }
};

/// Event-driven exact gradient flow for polyhedral J. Under DDL1 the next
/// event time is the smallest positive ratio (Ku)_l / (Kp)_l over the active
/// rows; otherwise event times are bracketed by bisection on subgradient
/// validity. Terminates with u = P0 f when the minimal-norm subgradient
/// vanishes.
FlowTrajectory gradient_flow_exact(const Regularizer& reg, const Signal& f,
                                   const SolverConfig& cfg = {});

/// Implicit Euler u_{k+1} = prox(u_k, dt) on a uniform grid, run until
/// ||Q0 u|| <= tol_extinct * ||Q0 f|| or t exceeds t_max (0 = auto).
FlowTrajectory gradient_flow_gridded(const Regularizer& reg, const Signal& f, double dt,
                                     const SolverConfig& cfg = {}, double t_max = 0,
                                     double tol_extinct = 1e-10);

/// Independent prox solves at each grid time; p(t) = (f - u(t)) / t.
FlowTrajectory variational_path(const Regularizer& reg, const Signal& f,
                                const std::vector<double>& t_grid,
                                const SolverConfig& cfg = {});

/// Log-spaced default grid for the variational path, augmented with the
/// event times of an exact trajectory when one is supplied.
std::vector<double> default_vm_grid(double t_extinction, int points,
                                    const FlowTrajectory* exact = nullptr);

/// Bregman iteration / implicit Euler for the inverse scale space flow:
///   v_{k+1} = argmin_v J(v) - <q_k, v> + (ds/2) ||v - f||^2,
///   q_{k+1} = q_k + ds (f - v_{k+1}),
/// realized as v_{k+1} = prox(f + q_k/ds, 1/ds). The returned trajectory is
/// stored in wavelength time t = 1/s (ascending); the s = 0 state P0 f is
/// not representable on the t-grid and is kept in nullspace_part.
FlowTrajectory iss_gridded(const Regularizer& reg, const Signal& f, double ds,
                           const SolverConfig& cfg = {}, double s_max = 0);

/// Exact piecewise-constant ISS trajectory derived from an exact DDL1
/// gradient flow: jumps at s_i = 1/t_i with plateau u_GF(t_i) + t_i p_GF(t_{i+1})
/// on (t_i, t_{i+1}); the final plateau toward t = 0 is f itself.
FlowTrajectory iss_exact_from_gf(const FlowTrajectory& gf);

/// Re-labels an exact gradient-flow trajectory as the variational path,
/// storing the VM optimality subgradients (f - u(t_i)) / t_i so that u-based
/// atom formulas can be exercised. The identification of the two paths is
/// certified by the DDL1 fast path; other trajectories are refused.
FlowTrajectory as_variational(const FlowTrajectory& gf);

}  // namespace specdec
