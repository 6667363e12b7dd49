#include "specdec/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace specdec {

namespace {

Vector zeros_like(const Signal& s) { return Vector::Zero(s.size()); }

// Largest step Delta such that p stays a subgradient along u - Delta p. The
// dual-ball membership of p does not depend on Delta, so validity reduces to
// the gap condition h(Delta) = J(u - Delta p) - <p, u - Delta p> <= tol.
//
// With an exact minimal-norm certificate the KKT conditions make h vanish up
// to the first sign change of a support row, so the event sits on the
// smallest positive crossing ratio; that candidate is validated through the
// gap condition and bisection only takes over when the validation fails
// (imperfect certificate). J(u)/||p||^2 bounds every admissible step.
double generic_event_time(const Regularizer& reg, const Signal& u, const Signal& p,
                          const Vector& Ku, const Vector& Kp, const Vector& sigma,
                          const SolverConfig& cfg) {
  const double pn2 = p.values.squaredNorm();
  const double j_u = reg.group_norms(Ku).sum();
  const double tol_h = 10.0 * cfg.tol_gap * (1.0 + j_u);

  auto h = [&](double d) {
    const Vector Kv = Ku - d * Kp;
    const double j_v = reg.group_norms(Kv).sum();
    return j_v - (p.values.dot(u.values) - d * pn2);
  };

  // Candidate crossings come from the active rows only; rows outside the
  // sign pattern hold rounding dust whose ratios are meaningless.
  double ratio = std::numeric_limits<double>::infinity();
  for (int l = 0; l < Ku.size(); ++l) {
    if (sigma[l] == 0.0 || Kp[l] == 0.0) continue;
    const double r = Ku[l] / Kp[l];
    if (r > 0 && r < ratio) ratio = r;
  }
  if (std::isfinite(ratio) && h(ratio * (1.0 - 1e-12)) <= tol_h) return ratio;

  double hi = std::min((j_u / pn2) * (1.0 + 1e-6) + 1e-300, ratio);
  if (h(hi) <= tol_h) return hi;
  double lo = 0.0;
  for (int it = 0; it < 60 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) <= tol_h ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

FlowTrajectory gradient_flow_exact(const Regularizer& reg, const Signal& f,
                                   const SolverConfig& cfg) {
  if (!(f.shape == reg.signal_shape()))
    throw std::invalid_argument("gradient_flow_exact: signal shape mismatch");
  if (!reg.is_polyhedral())
    throw std::invalid_argument("gradient_flow_exact: polyhedral regularizers only");

  auto [p0, q0] = project_nullspace(reg, f);
  const bool fast = reg.ddl1() == TriState::holds;
  const int m = reg.dual_dim();

  FlowTrajectory traj;
  traj.method = Method::GF;
  traj.mode = Mode::exact;
  traj.input = f;
  traj.nullspace_part = p0;
  traj.ddl1_path = fast;
  traj.events.push_back({0.0, f, Signal(zeros_like(f), f.shape)});

  Signal u = f;
  Vector Ku = reg.apply(u.values);
  // All activity thresholds are pinned to the scale of the initial data: the
  // flow only shrinks |Ku|, and near extinction the current maximum is
  // rounding dust that must not be mistaken for support.
  const double scale0 = Ku.size() > 0 ? Ku.cwiseAbs().maxCoeff() : 0.0;
  Vector sigma = Vector::Zero(m);
  for (int l = 0; l < m; ++l)
    if (std::abs(Ku[l]) > 1e-9 * scale0) sigma[l] = Ku[l] > 0 ? 1.0 : -1.0;

  double t = 0.0;
  double prev_norm = std::numeric_limits<double>::infinity();
  const int max_events = 4 * (m + reg.signal_dim()) + 16;
  bool extinct = false;

  for (int ev = 0; ev < max_events; ++ev) {
    auto sub = min_norm_subgradient_signs(reg, sigma, cfg);
    const double pn = sub.p.norm();
    if (pn <= 1e-13 * (1.0 + f.norm())) {
      extinct = true;
      break;
    }
    if (pn >= prev_norm * (1.0 + 1e-10))
      throw SolverError("gradient_flow_exact: subgradient norms must decrease", pn);
    prev_norm = pn;

    const Vector Kp = reg.apply(sub.p.values);
    double delta;
    std::vector<int> leaving;

    if (fast) {
      // Off the support (KK^T q)_l = 0 under DDL1, so those rows stay put.
      double off = 0.0;
      for (int l = 0; l < m; ++l)
        if (sigma[l] == 0.0) off = std::max(off, std::abs(Kp[l]));
      if (off > 1e-8 * (1.0 + Kp.cwiseAbs().maxCoeff()))
        throw SolverError(
            "gradient_flow_exact: DDL1 fast-path assertion |(Kp)_l| = 0 off support "
            "failed; rerun with a non-DDL1 regularizer flag (bisection fallback)",
            off);

      delta = std::numeric_limits<double>::infinity();
      for (int l = 0; l < m; ++l) {
        if (sigma[l] == 0.0 || Kp[l] == 0.0) continue;
        const double r = Ku[l] / Kp[l];
        if (r > 0 && r < delta) delta = r;
      }
      if (!std::isfinite(delta))
        throw SolverError("gradient_flow_exact: no positive crossing ratio", pn);
      for (int l = 0; l < m; ++l) {
        if (sigma[l] == 0.0 || Kp[l] == 0.0) continue;
        const double r = Ku[l] / Kp[l];
        if (r > 0 && r <= delta * (1.0 + 1e-9)) leaving.push_back(l);
      }
    } else {
      delta = generic_event_time(reg, u, sub.p, Ku, Kp, sigma, cfg);
      for (int l = 0; l < m; ++l) {
        if (sigma[l] == 0.0 || Kp[l] == 0.0) continue;
        const double r = Ku[l] / Kp[l];
        if (r > 0 && std::abs(r - delta) <= 1e-9 * delta) leaving.push_back(l);
      }
    }

    t += delta;
    u = Signal(u.values - delta * sub.p.values, u.shape);
    Ku -= delta * Kp;
    for (int l : leaving) Ku[l] = 0.0;

    if (fast) {
      for (int l : leaving) sigma[l] = 0.0;
    } else {
      // The support may grow off the DDL1 class; rebuild the sign pattern.
      const Vector sigma_old = sigma;
      for (int l = 0; l < m; ++l)
        sigma[l] = std::abs(Ku[l]) > 1e-9 * scale0 ? (Ku[l] > 0 ? 1.0 : -1.0) : 0.0;
      if (sigma == sigma_old)
        throw SolverError("gradient_flow_exact: event produced no support change", delta);
    }

    traj.events.push_back({t, u, sub.p});
  }

  if (!extinct)
    throw SolverError("gradient_flow_exact: event cap exceeded", prev_norm);

  traj.extinction_time = t;
  return traj;
}

FlowTrajectory gradient_flow_gridded(const Regularizer& reg, const Signal& f, double dt,
                                     const SolverConfig& cfg, double t_max,
                                     double tol_extinct) {
  if (!(dt > 0)) throw std::invalid_argument("gradient_flow_gridded: need dt > 0");
  auto [p0, q0] = project_nullspace(reg, f);

  FlowTrajectory traj;
  traj.method = Method::GF;
  traj.mode = Mode::gridded;
  traj.input = f;
  traj.nullspace_part = p0;
  traj.grid_t.push_back(0.0);
  traj.grid_u.push_back(f);
  traj.grid_p.push_back(Signal(zeros_like(f), f.shape));

  Signal u = f;
  DualCertificate warm{Vector::Zero(reg.dual_dim())};
  const long cap = t_max > 0 ? std::lround(std::ceil(t_max / dt)) : 1000000L;
  int quiet_steps = 0;

  for (long k = 1; k <= cap; ++k) {
    auto res = prox(reg, u, dt, cfg, &warm);
    warm = res.cert;
    Signal p((u.values - res.u.values) / dt, f.shape);
    u = res.u;
    traj.grid_t.push_back(static_cast<double>(k) * dt);
    traj.grid_u.push_back(u);
    traj.grid_p.push_back(std::move(p));
    // Polyhedral solves are polished to vertices, so the stop threshold can
    // be taken at face value; otherwise the reachable accuracy is limited by
    // the prox gap and stopping below that floor would ride a noise plateau.
    // A few quiet steps past extinction keep the difference stencils of
    // downstream spectra clean.
    const double noise_floor =
        reg.is_polyhedral() ? 0.0 : 4.0 * std::sqrt(2.0 * std::max(res.diag.gap, 0.0));
    const double stop_norm = std::max(tol_extinct * q0.norm(), noise_floor);
    const double rem = (u.values - p0.values).norm();
    if (rem <= stop_norm) {
      if (traj.extinction_time == 0) traj.extinction_time = traj.grid_t.back();
      if (++quiet_steps >= 6) break;
    } else if (t_max <= 0 && k == cap) {
      throw SolverError("gradient_flow_gridded: extinction not reached within step cap", rem);
    }
  }
  if (traj.extinction_time == 0) traj.extinction_time = traj.grid_t.back();
  return traj;
}

FlowTrajectory variational_path(const Regularizer& reg, const Signal& f,
                                const std::vector<double>& t_grid, const SolverConfig& cfg) {
  if (t_grid.empty()) throw std::invalid_argument("variational_path: empty grid");
  for (size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0) || (i > 0 && t_grid[i] <= t_grid[i - 1]))
      throw std::invalid_argument("variational_path: grid must be positive and increasing");
  }
  auto [p0, q0] = project_nullspace(reg, f);

  FlowTrajectory traj;
  traj.method = Method::VM;
  traj.mode = Mode::gridded;
  traj.input = f;
  traj.nullspace_part = p0;
  traj.grid_t.push_back(0.0);
  traj.grid_u.push_back(f);
  traj.grid_p.push_back(Signal(zeros_like(f), f.shape));

  DualCertificate warm{Vector::Zero(reg.dual_dim())};
  traj.extinction_time = 0.0;
  for (double t : t_grid) {
    auto res = prox(reg, f, t, cfg, &warm);
    warm = res.cert;
    traj.grid_t.push_back(t);
    traj.grid_p.push_back(Signal((f.values - res.u.values) / t, f.shape));
    const bool extinct = (res.u.values - p0.values).norm() <= 1e-10 * (1.0 + f.norm());
    traj.grid_u.push_back(std::move(res.u));
    if (extinct && traj.extinction_time == 0.0) traj.extinction_time = t;
  }
  return traj;
}

std::vector<double> default_vm_grid(double t_extinction, int points,
                                    const FlowTrajectory* exact) {
  if (!(t_extinction > 0) || points < 2)
    throw std::invalid_argument("default_vm_grid: bad parameters");
  std::vector<double> grid;
  const double lo = std::log(t_extinction * 1e-3);
  const double hi = std::log(t_extinction * 1.25);
  for (int i = 0; i < points; ++i)
    grid.push_back(std::exp(lo + (hi - lo) * i / (points - 1)));
  if (exact && exact->mode == Mode::exact)
    for (size_t i = 1; i < exact->events.size(); ++i)
      grid.push_back(exact->events[i].t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) <= 1e-15 * b; }),
             grid.end());
  return grid;
}

FlowTrajectory iss_gridded(const Regularizer& reg, const Signal& f, double ds,
                           const SolverConfig& cfg, double s_max) {
  if (!(ds > 0)) throw std::invalid_argument("iss_gridded: need ds > 0");
  auto [p0, q0] = project_nullspace(reg, f);

  // March in s; store states and convert to wavelength time afterwards.
  std::vector<double> s_nodes;
  std::vector<Signal> v_nodes, q_nodes;
  Vector qdual = Vector::Zero(f.size());
  DualCertificate warm{Vector::Zero(reg.dual_dim())};
  double prev_fid = std::numeric_limits<double>::infinity();
  double prev_slack = 0.0;
  const long cap = s_max > 0 ? std::lround(std::ceil(s_max / ds)) : 1000000L;

  double first_change_s = 0.0;
  for (long k = 1; k <= cap; ++k) {
    const double s = static_cast<double>(k) * ds;
    Signal shifted(f.values + qdual / ds, f.shape);
    auto res = prox(reg, shifted, 1.0 / ds, cfg, &warm);
    warm = res.cert;
    qdual += ds * (f.values - res.u.values);

    // Two noise floors sit under the monotone-fidelity guard: the plateau is
    // recovered as (f + q/ds) - t K^T q, two quantities that grow like
    // s ||f - v|| / ds and cancel to rounding, and each state carries the
    // prox-gap error of its own solve.
    const double fid = (res.u.values - f.values).norm();
    const double gap_noise = 2.0 * std::sqrt(2.0 * std::max(res.diag.gap, 0.0));
    const double slack =
        1e-12 * (2.0 + f.norm() + qdual.norm() / ds) + gap_noise + prev_slack;
    if (fid > prev_fid + slack)
      throw SolverError("iss_gridded: fidelity must be non-increasing", fid);
    prev_fid = fid;
    prev_slack = gap_noise;

    const double change_floor =
        reg.is_polyhedral() ? 0.0 : 4.0 * std::sqrt(2.0 * std::max(res.diag.gap, 0.0));
    if (first_change_s == 0.0 &&
        (res.u.values - p0.values).norm() >
            std::max(1e-8 * (1.0 + f.norm()), change_floor))
      first_change_s = s - 0.5 * ds;

    s_nodes.push_back(s);
    q_nodes.push_back(Signal(qdual, f.shape));
    v_nodes.push_back(std::move(res.u));
    // reachable fidelity is limited by the prox gap when there is no polish
    const double fid_floor =
        reg.is_polyhedral() ? 0.0 : 4.0 * std::sqrt(2.0 * std::max(res.diag.gap, 0.0));
    const double fid_stop = std::max(1e-9 * (1.0 + f.norm()), fid_floor);
    if (fid <= fid_stop) break;
    if (s_max <= 0 && k == cap)
      throw SolverError("iss_gridded: flow did not reach the data within step cap", fid);
  }

  FlowTrajectory traj;
  traj.method = Method::IS;
  traj.mode = Mode::gridded;
  traj.input = f;
  traj.nullspace_part = p0;
  traj.extinction_time = first_change_s > 0 ? 1.0 / first_change_s : 0.0;
  for (size_t i = s_nodes.size(); i-- > 0;) {
    traj.grid_t.push_back(1.0 / s_nodes[i]);
    traj.grid_u.push_back(std::move(v_nodes[i]));
    traj.grid_p.push_back(std::move(q_nodes[i]));
  }
  return traj;
}

FlowTrajectory iss_exact_from_gf(const FlowTrajectory& gf) {
  if (gf.mode != Mode::exact || gf.method != Method::GF)
    throw std::invalid_argument("iss_exact_from_gf: need an exact gradient-flow trajectory");
  if (!gf.ddl1_path)
    throw std::invalid_argument("iss_exact_from_gf: exact ISS derivation requires the DDL1 fast path");

  const int n_events = gf.num_events();
  FlowTrajectory traj;
  traj.method = Method::IS;
  traj.mode = Mode::exact;
  traj.input = gf.input;
  traj.nullspace_part = gf.nullspace_part;
  traj.extinction_time = gf.extinction_time;
  traj.ddl1_path = true;

  // Plateau on (t_i, t_{i+1}) equals u(t_i) + t_i p(t_{i+1}); the plateau
  // after the last event is P0 f and the one before the first event is f.
  traj.events.push_back({0.0, gf.input, Signal(Vector::Zero(gf.input.size()), gf.input.shape)});
  for (int i = 1; i <= n_events; ++i) {
    const auto& e = gf.events[i];
    Vector plateau = e.u.values;
    if (i + 1 <= n_events) plateau += e.t * gf.events[i + 1].p.values;
    Vector p_vm = (gf.input.values - e.u.values) / e.t;
    traj.events.push_back({e.t, Signal(std::move(plateau), e.u.shape),
                           Signal(std::move(p_vm), e.u.shape)});
  }
  return traj;
}

FlowTrajectory as_variational(const FlowTrajectory& gf) {
  if (gf.mode != Mode::exact || gf.method != Method::GF)
    throw std::invalid_argument("as_variational: need an exact gradient-flow trajectory");
  if (!gf.ddl1_path)
    throw std::invalid_argument(
        "as_variational: the variational path coincides with the gradient flow only "
        "under the certified (DDL1) equivalence; use a gridded variational path instead");
  FlowTrajectory traj = gf;
  traj.method = Method::VM;
  for (size_t i = 1; i < traj.events.size(); ++i) {
    auto& e = traj.events[i];
    e.p = Signal((gf.input.values - e.u.values) / e.t, e.u.shape);
  }
  return traj;
}

}  // namespace specdec
