#include "specdec/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace specdec {

std::string VerificationReport::summary() const {
  int passed = 0, informative = 0;
  for (const auto& c : checks) {
    if (c.informative) ++informative;
    if (c.pass) ++passed;
  }
  std::ostringstream os;
  os << passed << "/" << checks.size() << " checks passed";
  if (informative > 0) os << " (" << informative << " informative)";
  return os.str();
}

std::vector<Signal> random_signals(const Shape& shape, int count, unsigned long long seed) {
  std::mt19937_64 gen(seed);
  // Map the top 53 bits to [0,1) directly; the standard distributions are
  // implementation-defined and would break byte-level reproducibility.
  auto uniform = [&gen]() {
    return static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
  };
  std::vector<Signal> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vector v(shape.size());
    for (int j = 0; j < v.size(); ++j) v[j] = 2.0 * uniform() - 1.0;
    out.emplace_back(std::move(v), shape);
  }
  return out;
}

VerificationReport check_orthogonality(const SpectralDecomposition& dec, bool ddl1_certified) {
  if (dec.mode != Mode::exact)
    throw std::invalid_argument("check_orthogonality: exact decompositions only");

  const double fn = dec.input.norm();
  std::vector<const SpectralAtom*> atoms;
  for (const auto& a : dec.atoms)
    if (a.phi.norm() > 1e-12 * fn) atoms.push_back(&a);

  VerificationReport rep;
  Check c;
  c.name = "orthogonality";
  c.tolerance = 1e-6;
  c.informative = !ddl1_certified;
  if (atoms.size() < 2) {
    c.pass = true;
    c.residual = 0;
    c.context = "fewer than 2 atoms: vacuous";
    rep.checks.push_back(std::move(c));
    return rep;
  }

  std::ostringstream mat;
  double worst = 0;
  for (size_t i = 0; i < atoms.size(); ++i) {
    for (size_t j = 0; j < atoms.size(); ++j) {
      const double corr = atoms[i]->phi.values.dot(atoms[j]->phi.values) /
                          (atoms[i]->phi.norm() * atoms[j]->phi.norm());
      if (i != j) worst = std::max(worst, std::abs(corr));
      mat << corr << (j + 1 < atoms.size() ? " " : "");
    }
    if (i + 1 < atoms.size()) mat << "; ";
  }
  c.residual = worst;
  c.pass = worst <= c.tolerance;
  c.context = "corr = [" + mat.str() + "]";
  rep.checks.push_back(std::move(c));
  return rep;
}

VerificationReport check_eigenvectors(const Regularizer& reg, const FlowTrajectory& gf) {
  if (gf.mode != Mode::exact || gf.method != Method::GF)
    throw std::invalid_argument("check_eigenvectors: need an exact gradient-flow trajectory");

  VerificationReport rep;
  Check c;
  c.name = "eigenvectors";
  c.tolerance = 1e-8;
  c.informative = reg.ddl1() != TriState::holds;
  double worst = 0;
  int tested = 0;
  std::ostringstream ctx;
  for (int i = 1; i <= gf.num_events(); ++i) {
    const auto& p = gf.events[i].p;
    const double pn2 = p.values.squaredNorm();
    if (pn2 <= 1e-24 * (1.0 + gf.input.norm())) continue;  // zero tail event
    const double res = std::abs(eval_j(reg, p) - pn2) / (1.0 + pn2);
    worst = std::max(worst, res);
    ++tested;
    ctx << "lambda_" << i << "=" << std::sqrt(pn2) << " ";
  }
  c.residual = worst;
  c.pass = worst <= c.tolerance;
  c.context = tested > 0 ? ctx.str() : "no nonzero subgradients";
  rep.checks.push_back(std::move(c));
  return rep;
}

VerificationReport check_eigendecomposition(const Regularizer& reg, const FlowTrajectory& gf,
                                            const Signal& f) {
  if (gf.mode != Mode::exact || gf.method != Method::GF)
    throw std::invalid_argument("check_eigendecomposition: need an exact gradient-flow trajectory");

  Vector acc = gf.nullspace_part.values;
  for (int i = 0; i + 1 <= gf.num_events(); ++i)
    acc += (gf.events[i + 1].t - gf.events[i].t) * gf.events[i + 1].p.values;

  VerificationReport rep;
  Check c;
  c.name = "eigendecomposition";
  c.tolerance = 1e-8;
  c.informative = reg.ddl1() != TriState::holds;
  c.residual = (f.values - acc).norm() / std::max(1e-300, f.norm());
  c.pass = c.residual <= c.tolerance;
  rep.checks.push_back(std::move(c));
  return rep;
}

IssJumpComparison compare_iss_jumps(const FlowTrajectory& gridded,
                                    const FlowTrajectory& exact, double ds) {
  if (gridded.mode != Mode::gridded || gridded.method != Method::IS ||
      exact.mode != Mode::exact || exact.method != Method::IS)
    throw std::invalid_argument("compare_iss_jumps: need gridded and exact ISS trajectories");

  const Signal& f = gridded.input;
  const double thresh = 1e-6 * (1.0 + f.norm());

  // gridded states in ascending s (wavelength storage is descending s)
  std::vector<double> s_nodes;
  std::vector<const Signal*> v_nodes;
  for (size_t i = gridded.grid_t.size(); i-- > 0;) {
    s_nodes.push_back(1.0 / gridded.grid_t[i]);
    v_nodes.push_back(&gridded.grid_u[i]);
  }

  struct Jump {
    double s_lo, s_hi;
    Vector delta;
    Vector expected;
    int assigned = 0;
  };
  std::vector<Jump> jumps;
  Vector before = gridded.nullspace_part.values;
  for (size_t i = 0; i < s_nodes.size(); ++i) {
    if ((v_nodes[i]->values - before).norm() > thresh) {
      const double s_lo = i > 0 ? s_nodes[i - 1] : 0.0;
      size_t j = i;
      Vector after = v_nodes[j]->values;
      while (j + 1 < s_nodes.size() && (v_nodes[j + 1]->values - after).norm() > thresh) {
        ++j;
        after = v_nodes[j]->values;
      }
      jumps.push_back({s_lo, s_nodes[j], after - before,
                       Vector::Zero(f.size()), 0});
      before = after;
      i = j;
    }
  }

  auto dec = decompose(exact);
  IssJumpComparison out;
  out.detected = static_cast<int>(jumps.size());
  out.exact = static_cast<int>(dec.atoms.size());
  const double tiny_atom = 1e-4 * (1.0 + f.norm());

  for (const auto& atom : dec.atoms) {
    const double s_atom = 1.0 / atom.t;
    double best = std::numeric_limits<double>::infinity();
    Jump* host = nullptr;
    for (auto& j : jumps) {
      const double d = s_atom < j.s_lo ? j.s_lo - s_atom
                       : s_atom > j.s_hi ? s_atom - j.s_hi
                                         : 0.0;
      if (d < best) {
        best = d;
        host = &j;
      }
    }
    if (!host || best > 2.0 * ds) {
      if (atom.phi.norm() > tiny_atom) out.matched = false;
      continue;
    }
    host->expected += atom.phi.values;
    host->assigned += 1;
    out.worst_time = std::max(out.worst_time, best);
  }
  for (const auto& j : jumps) {
    if (j.assigned == 0) {
      out.matched = false;
      continue;
    }
    out.worst_value = std::max(out.worst_value, (j.delta - j.expected).norm());
  }
  return out;
}

namespace {

Signal interpolate_exact(const FlowTrajectory& traj, double t) {
  const auto& ev = traj.events;
  if (t >= traj.extinction_time) return ev.back().u;
  size_t i = 1;
  while (i < ev.size() && ev[i].t < t) ++i;
  const auto& a = ev[i - 1];
  const auto& b = ev[i];
  const double w = (t - a.t) / (b.t - a.t);
  return Signal(a.u.values + w * (b.u.values - a.u.values), a.u.shape);
}

}  // namespace

VerificationReport check_equivalence(const Regularizer& reg, const Signal& f,
                                     const SolverConfig& cfg) {
  VerificationReport rep;
  auto gf = gradient_flow_exact(reg, f, cfg);

  {  // (a) variational solves along a probe grid against the exact flow
    std::vector<double> probes;
    for (int i = 1; i <= gf.num_events(); ++i) {
      probes.push_back(gf.events[i].t);
      probes.push_back(0.5 * (gf.events[i - 1].t + gf.events[i].t));
    }
    if (gf.extinction_time > 0) probes.push_back(1.25 * gf.extinction_time);
    double worst = 0;
    DualCertificate warm{Vector::Zero(reg.dual_dim())};
    std::sort(probes.begin(), probes.end());
    for (double t : probes) {
      if (!(t > 0)) continue;
      auto res = prox(reg, f, t, cfg, &warm);
      warm = res.cert;
      worst = std::max(worst, (res.u.values - interpolate_exact(gf, t).values).norm());
    }
    Check c;
    c.name = "vm_gf_trajectory";
    c.tolerance = 10.0 * cfg.tol_gap * std::max(1e-300, f.norm());
    c.residual = worst;
    c.pass = worst <= c.tolerance;
    c.informative = reg.ddl1() != TriState::holds;
    rep.checks.push_back(std::move(c));
  }

  if (gf.ddl1_path) {  // (b) GF atoms against VM atoms (certified relabeling)
    auto dec_gf = decompose(gf);
    auto dec_vm = decompose(as_variational(gf));
    Check c;
    c.name = "vm_gf_atoms";
    c.tolerance = 1e-8;
    double worst = 0;
    if (dec_gf.atoms.size() != dec_vm.atoms.size()) {
      c.pass = false;
      c.residual = std::numeric_limits<double>::infinity();
      c.context = "atom count mismatch";
    } else {
      for (size_t i = 0; i < dec_gf.atoms.size(); ++i) {
        worst = std::max(worst, std::abs(dec_gf.atoms[i].t - dec_vm.atoms[i].t));
        worst = std::max(worst, (dec_gf.atoms[i].phi.values - dec_vm.atoms[i].phi.values)
                                    .cwiseAbs()
                                    .maxCoeff());
      }
      c.residual = worst;
      c.pass = worst <= c.tolerance;
    }
    rep.checks.push_back(std::move(c));
  }

  if (gf.ddl1_path && gf.num_events() > 0) {  // (c) gridded ISS against exact ISS
    auto iss_ex = iss_exact_from_gf(gf);
    const double s_first = 1.0 / gf.extinction_time;  // first jump in s
    const double ds = s_first / 60.0;
    auto iss_gr = iss_gridded(reg, f, ds, cfg);
    auto cmp = compare_iss_jumps(iss_gr, iss_ex, ds);

    Check ct, cv;
    ct.name = "iss_jump_times";
    ct.tolerance = 2.0 * ds;
    cv.name = "iss_jump_values";
    cv.tolerance = std::max(dual_ball_bound(reg) * ds, 1e-12);
    if (!cmp.matched) {
      ct.pass = cv.pass = false;
      ct.residual = cv.residual = std::numeric_limits<double>::infinity();
      ct.context = cv.context = "unmatched jumps";
    } else {
      ct.residual = cmp.worst_time;
      ct.pass = cmp.worst_time <= ct.tolerance;
      cv.residual = cmp.worst_value;
      cv.pass = cmp.worst_value <= cv.tolerance;
    }
    rep.checks.push_back(std::move(ct));
    rep.checks.push_back(std::move(cv));
  }

  return rep;
}

VerificationReport check_minsub(const Regularizer& reg, const std::vector<Signal>& samples,
                                const SolverConfig& cfg) {
  if (!reg.is_polyhedral())
    throw std::invalid_argument("check_minsub: polyhedral regularizers only");

  VerificationReport rep;
  Check c;
  c.name = "minsub";
  c.tolerance = 1e-8;
  double worst = 0;
  for (const auto& u : samples) {
    auto sub = min_norm_subgradient(reg, u, cfg);
    const Vector Ku = reg.apply(u.values);
    const Vector Kp = reg.apply(sub.p.values);
    const double maxabs = Ku.size() > 0 ? Ku.cwiseAbs().maxCoeff() : 0.0;
    const double tol_active = 1e-9 * maxabs;
    const double pn2 = sub.p.values.squaredNorm();

    // <p, p - K^T q> = ||p||^2 - <Kp, q>; the certificate range over dJ(u)
    // splits into the pinned active part and a box/ball over inactive rows.
    double fixed_part = 0, radius = 0;
    for (int l = 0; l < Ku.size(); ++l) {
      if (std::abs(Ku[l]) > tol_active)
        fixed_part += Kp[l] * (Ku[l] > 0 ? 1.0 : -1.0);
      else
        radius += std::abs(Kp[l]);
    }
    const double v = std::max(std::abs(pn2 - (fixed_part - radius)),
                              std::abs(pn2 - (fixed_part + radius)));
    worst = std::max(worst, v);
  }
  c.residual = worst;
  c.pass = worst <= c.tolerance;
  c.informative = reg.ddl1() != TriState::holds;
  rep.checks.push_back(std::move(c));
  return rep;
}

}  // namespace specdec
