#include "specdec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace specdec {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Quadratic-fit second derivative through three nodes, exact for nonuniform
// spacing; evaluating it at any of the three nodes gives the same value.
Vector second_derivative_3pt(const Signal& a, const Signal& b, const Signal& c,
                             double ta, double tb, double tc) {
  const double h0 = tb - ta, h1 = tc - tb;
  return 2.0 * (a.values * h1 - b.values * (h0 + h1) + c.values * h0) /
         (h0 * h1 * (h0 + h1));
}

std::vector<Signal> gridded_phi(const FlowTrajectory& traj) {
  const auto& t = traj.grid_t;
  const auto& u = traj.grid_u;
  const int K = static_cast<int>(t.size());
  std::vector<Signal> phi;
  phi.reserve(K);
  if (K < 3) {
    for (int k = 0; k < K; ++k)
      phi.push_back(Signal(Vector::Zero(traj.input.size()), traj.input.shape));
    return phi;
  }
  if (traj.method == Method::IS) {
    // The wavelength pairing is defined through the frequency variable:
    // integral h(t) phi(t) dt = integral h(1/s) dv(s). As a plain t-density
    // that is the negative jump measure of the piecewise-constant u, i.e.
    // -du/dt; the s^2 Jacobian of the relabeling cancels the t^2 factor of
    // the frequency-form notation. Central first differences.
    for (int k = 0; k < K; ++k) {
      const int lo = std::max(0, k - 1), hi = std::min(K - 1, k + 1);
      Vector d = (u[hi].values - u[lo].values) / (t[hi] - t[lo]);
      phi.push_back(Signal(-d, traj.input.shape));
    }
    return phi;
  }
  // phi(t) = t u''(t), central second differences, one-sided at the ends.
  for (int k = 0; k < K; ++k) {
    const int c = std::clamp(k, 1, K - 2);
    Vector dd = second_derivative_3pt(u[c - 1], u[c], u[c + 1], t[c - 1], t[c], t[c + 1]);
    phi.push_back(Signal(t[k] * dd, traj.input.shape));
  }
  return phi;
}

}  // namespace

SpectralDecomposition decompose(const FlowTrajectory& traj) {
  SpectralDecomposition dec;
  dec.method = traj.method;
  dec.mode = traj.mode;
  dec.nullspace_part = traj.nullspace_part;
  dec.input = traj.input;

  if (traj.mode == Mode::gridded) {
    if (traj.grid_t.empty())
      throw std::invalid_argument("decompose: empty gridded trajectory");
    dec.grid_t = traj.grid_t;
    dec.density = gridded_phi(traj);
    const auto& t = traj.grid_t;
    const auto& u = traj.grid_u;
    const int K = static_cast<int>(t.size());
    for (int k = 0; k < K; ++k) {
      if (K < 2) {
        dec.du.push_back(Signal(Vector::Zero(traj.input.size()), traj.input.shape));
        continue;
      }
      const int lo = std::max(0, k - 1), hi = std::min(K - 1, k + 1);
      dec.du.push_back(
          Signal((u[hi].values - u[lo].values) / (t[hi] - t[lo]), traj.input.shape));
    }
    return dec;
  }

  const int N = traj.num_events();
  if (N < 0 || traj.events.empty() || traj.events[0].t != 0.0)
    throw std::invalid_argument("decompose: malformed exact trajectory");
  const auto& ev = traj.events;

  switch (traj.method) {
    case Method::GF:
      // phi_i = t_i (p_i - p_{i+1}), with p after extinction equal to 0.
      for (int i = 1; i <= N; ++i) {
        Vector d = ev[i].p.values;
        if (i + 1 <= N) d -= ev[i + 1].p.values;
        dec.atoms.push_back({ev[i].t, Signal(ev[i].t * d, traj.input.shape)});
      }
      break;
    case Method::VM: {
      // phi_i = t_i (slope after t_i - slope before t_i); u is affine between
      // events and constant past extinction.
      auto slope = [&](int i) -> Vector {  // slope on (t_{i-1}, t_i)
        return (ev[i].u.values - ev[i - 1].u.values) / (ev[i].t - ev[i - 1].t);
      };
      for (int i = 1; i <= N; ++i) {
        Vector after = i + 1 <= N ? slope(i + 1) : Vector(Vector::Zero(traj.input.size()));
        dec.atoms.push_back({ev[i].t, Signal(ev[i].t * (after - slope(i)), traj.input.shape)});
      }
      break;
    }
    case Method::IS:
      // phi_i = u_IS(t_i^-) - u_IS(t_i^+): difference of adjacent plateaus.
      for (int i = 1; i <= N; ++i)
        dec.atoms.push_back(
            {ev[i].t, Signal(ev[i - 1].u.values - ev[i].u.values, traj.input.shape)});
      break;
  }
  return dec;
}

Signal reconstruct(const SpectralDecomposition& dec) {
  Vector acc = dec.nullspace_part.values;
  if (dec.mode == Mode::exact) {
    for (const auto& a : dec.atoms) acc += a.phi.values;
    return Signal(std::move(acc), dec.nullspace_part.shape);
  }
  for (size_t k = 0; k + 1 < dec.grid_t.size(); ++k) {
    const double h = dec.grid_t[k + 1] - dec.grid_t[k];
    acc += 0.5 * h * (dec.density[k].values + dec.density[k + 1].values);
  }
  return Signal(std::move(acc), dec.nullspace_part.shape);
}

FilterSpec FilterSpec::ideal_lowpass(double t_c, double w0) {
  FilterSpec s;
  s.kind = FilterKind::lowpass;
  s.t1 = t_c;
  s.w0 = w0;
  return s;
}
FilterSpec FilterSpec::ideal_highpass(double t_c, double w0) {
  FilterSpec s;
  s.kind = FilterKind::highpass;
  s.t1 = t_c;
  s.w0 = w0;
  return s;
}
FilterSpec FilterSpec::ideal_bandpass(double t1, double t2, double w0) {
  FilterSpec s;
  s.kind = FilterKind::bandpass;
  s.t1 = t1;
  s.t2 = t2;
  s.w0 = w0;
  return s;
}
FilterSpec FilterSpec::ideal_bandstop(double t1, double t2, double w0) {
  FilterSpec s;
  s.kind = FilterKind::bandstop;
  s.t1 = t1;
  s.t2 = t2;
  s.w0 = w0;
  return s;
}

double FilterSpec::weight(double t) const {
  switch (kind) {
    case FilterKind::lowpass:
      return t >= t1 ? 1.0 : 0.0;  // right-continuous: the cutoff passes
    case FilterKind::highpass:
      return t < t1 ? 1.0 : 0.0;
    case FilterKind::bandpass:
      return (t >= t1 && t < t2) ? 1.0 : 0.0;
    case FilterKind::bandstop:
      return (t >= t1 && t < t2) ? 0.0 : 1.0;
    case FilterKind::custom:
      break;
  }
  if (breakpoints.empty()) return 0.0;
  if (t <= breakpoints.front().first) return breakpoints.front().second;
  if (t >= breakpoints.back().first) return breakpoints.back().second;
  for (size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const auto [ta, wa] = breakpoints[i];
    const auto [tb, wb] = breakpoints[i + 1];
    if (t >= ta && t <= tb)
      return wa + (wb - wa) * (t - ta) / (tb - ta);
  }
  return breakpoints.back().second;
}

namespace {

// Piecewise-linear form of a step filter with jumps smoothed over the grid
// cell containing each cutoff.
std::vector<std::pair<double, double>> smoothed_breakpoints(
    const FilterSpec& spec, const std::vector<double>& grid, bool* smoothed) {
  if (spec.kind == FilterKind::custom) return spec.breakpoints;
  *smoothed = true;
  auto cell_width = [&](double tc) {
    for (size_t k = 0; k + 1 < grid.size(); ++k)
      if (tc >= grid[k] && tc <= grid[k + 1]) return grid[k + 1] - grid[k];
    return grid.size() > 1 ? grid[1] - grid[0] : 1.0;
  };
  std::vector<std::pair<double, double>> bp;
  auto add_step = [&](double tc, double before, double after) {
    const double h = 0.5 * cell_width(tc);
    bp.emplace_back(tc - h, before);
    bp.emplace_back(tc + h, after);
  };
  switch (spec.kind) {
    case FilterKind::lowpass:
      add_step(spec.t1, 0.0, 1.0);
      break;
    case FilterKind::highpass:
      add_step(spec.t1, 1.0, 0.0);
      break;
    case FilterKind::bandpass:
      add_step(spec.t1, 0.0, 1.0);
      add_step(spec.t2, 1.0, 0.0);
      break;
    case FilterKind::bandstop:
      add_step(spec.t1, 1.0, 0.0);
      add_step(spec.t2, 0.0, 1.0);
      break;
    case FilterKind::custom:
      break;
  }
  return bp;
}

double piecewise_linear(const std::vector<std::pair<double, double>>& bp, double t,
                        double* slope) {
  *slope = 0.0;
  if (bp.empty()) return 0.0;
  if (t <= bp.front().first) return bp.front().second;
  if (t >= bp.back().first) return bp.back().second;
  for (size_t i = 0; i + 1 < bp.size(); ++i) {
    const auto [ta, wa] = bp[i];
    const auto [tb, wb] = bp[i + 1];
    if (t >= ta && t <= tb) {
      *slope = (wb - wa) / (tb - ta);
      return wa + *slope * (t - ta);
    }
  }
  return bp.back().second;
}

}  // namespace

FilterResult apply_filter(const SpectralDecomposition& dec, const FilterSpec& spec) {
  FilterResult out;
  if (dec.mode == Mode::exact) {
    Vector acc = spec.w0 * dec.nullspace_part.values;
    for (const auto& a : dec.atoms) acc += spec.weight(a.t) * a.phi.values;
    out.u = Signal(std::move(acc), dec.nullspace_part.shape);
    return out;
  }

  bool smoothed = false;
  const auto bp = smoothed_breakpoints(spec, dec.grid_t, &smoothed);
  if (smoothed)
    out.warnings.push_back("step filter smoothed over one grid cell for the gridded pairing");

  if (dec.du.size() != dec.grid_t.size())
    throw std::invalid_argument("apply_filter: gridded decomposition lacks du samples");
  Vector acc = spec.w0 * dec.nullspace_part.values;
  const auto& t = dec.grid_t;

  // VM/GF pair through the integrated-by-parts form
  // w0 P0 f - integral (t w'(t) + w(t)) u'(t) dt; the inverse scale space
  // density is already a first-derivative measure and pairs with w directly.
  auto integrand = [&](size_t k) -> Vector {
    double slope = 0.0;
    const double w = piecewise_linear(bp, t[k], &slope);
    if (dec.method == Method::IS) return -w * dec.density[k].values;
    return (t[k] * slope + w) * dec.du[k].values;
  };
  if (!t.empty()) {
    Vector prev = integrand(0);
    for (size_t k = 0; k + 1 < t.size(); ++k) {
      Vector next = integrand(k + 1);
      acc -= 0.5 * (t[k + 1] - t[k]) * (prev + next);
      prev = std::move(next);
    }
  }
  out.u = Signal(std::move(acc), dec.nullspace_part.shape);
  return out;
}

ParsevalReport parseval_check(const SpectralDecomposition& dec) {
  if (dec.mode != Mode::exact)
    throw std::invalid_argument("parseval_check: exact decompositions only");
  const double f2 = dec.input.values.squaredNorm();
  const double p02 = dec.nullspace_part.values.squaredNorm();
  double inner = 0, norms = 0;
  for (const auto& a : dec.atoms) {
    inner += a.phi.values.dot(dec.input.values);
    norms += a.phi.values.squaredNorm();
  }
  return {f2 - p02 - inner, f2 - p02 - norms};
}

namespace {

double gaussian(double x, double sigma) {
  return std::exp(-0.5 * x * x / (sigma * sigma)) / (sigma * std::sqrt(2.0 * kPi));
}

Spectrum s1_from_atoms(const SpectralDecomposition& dec, double sigma) {
  Spectrum s;
  s.kind = SpectrumKind::S1;
  for (const auto& a : dec.atoms)
    s.atoms.emplace_back(a.t, a.phi.values.cwiseAbs().sum());
  if (dec.atoms.empty()) return s;
  const double t_max = dec.atoms.back().t;
  const double span = t_max - dec.atoms.front().t;
  s.sigma = sigma > 0 ? sigma : std::max(0.01 * span, 0.01 * t_max);
  const int points = 512;
  const double hi = 1.1 * t_max;
  const int n = dec.input.size();
  for (int i = 0; i < points; ++i) {
    const double t = hi * (i + 0.5) / points;
    Vector acc = Vector::Zero(n);
    for (const auto& a : dec.atoms)
      if (std::abs(t - a.t) < 6 * s.sigma) acc += gaussian(t - a.t, s.sigma) * a.phi.values;
    s.grid_t.push_back(t);
    s.density.push_back(acc.cwiseAbs().sum());
  }
  return s;
}

// Gaussian mollification of a sampled scalar density (mass-preserving on the
// interior). Sampled spectra of near-atomic measures are only pointwise
// meaningful after smoothing; raw node values split sub-cell events
// stencil-dependently.
void smooth_density(const std::vector<double>& t, std::vector<double>& density,
                    double sigma) {
  const int K = static_cast<int>(t.size());
  if (K < 3 || !(sigma > 0)) return;
  std::vector<double> out(K, 0.0);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j) {
      const double d = t[k] - t[j];
      if (std::abs(d) >= 8 * sigma) continue;
      const double cell =
          0.5 * ((j + 1 < K ? t[j + 1] : t[j]) - (j > 0 ? t[j - 1] : t[j]));
      out[k] += gaussian(d, sigma) * cell * density[j];
    }
  }
  density.swap(out);
}

Spectrum s1_from_grid(const SpectralDecomposition& dec, double sigma) {
  Spectrum s;
  s.kind = SpectrumKind::S1;
  const auto& t = dec.grid_t;
  const int K = static_cast<int>(t.size());
  double mean_cell = K > 1 ? (t.back() - t.front()) / (K - 1) : 1.0;
  s.sigma = sigma > 0 ? sigma : mean_cell;
  const int n = dec.input.size();
  for (int k = 0; k < K; ++k) {
    Vector acc = Vector::Zero(n);
    for (int j = 0; j < K; ++j) {
      if (std::abs(t[k] - t[j]) >= 6 * s.sigma) continue;
      const double wj = 0.5 * ((j + 1 < K ? t[j + 1] : t[j]) - (j > 0 ? t[j - 1] : t[j]));
      acc += gaussian(t[k] - t[j], s.sigma) * wj * dec.density[j].values;
    }
    s.grid_t.push_back(t[k]);
    s.density.push_back(acc.cwiseAbs().sum());
  }
  return s;
}

}  // namespace

Spectrum compute_spectrum(const SpectralDecomposition& dec, SpectrumKind kind, double sigma) {
  if (kind == SpectrumKind::S2)
    throw std::invalid_argument("compute_spectrum: S2 needs a gradient-flow trajectory");
  if (kind == SpectrumKind::S1)
    return dec.mode == Mode::exact ? s1_from_atoms(dec, sigma) : s1_from_grid(dec, sigma);

  Spectrum s;
  s.kind = SpectrumKind::S3;
  if (dec.mode == Mode::exact) {
    for (const auto& a : dec.atoms)
      s.atoms.emplace_back(a.t, a.phi.values.dot(dec.input.values));
    return s;
  }
  s.grid_t = dec.grid_t;
  for (const auto& phi : dec.density)
    s.density.push_back(phi.values.dot(dec.input.values));
  const double mean_cell =
      s.grid_t.size() > 1 ? (s.grid_t.back() - s.grid_t.front()) / (s.grid_t.size() - 1) : 0;
  s.sigma = sigma != 0 ? std::max(sigma, 0.0) : 4.0 * mean_cell;
  smooth_density(s.grid_t, s.density, s.sigma);
  return s;
}

Spectrum compute_spectrum(const FlowTrajectory& traj, SpectrumKind kind, double sigma) {
  if (kind != SpectrumKind::S2) return compute_spectrum(decompose(traj), kind, sigma);
  if (traj.method != Method::GF)
    throw std::invalid_argument("compute_spectrum: S2 is defined for the gradient flow");

  Spectrum s;
  s.kind = SpectrumKind::S2;
  if (traj.mode == Mode::exact) {
    const int N = traj.num_events();
    for (int i = 1; i <= N; ++i) {
      const double pn2 = traj.events[i].p.values.squaredNorm();
      const double pn2_next = i + 1 <= N ? traj.events[i + 1].p.values.squaredNorm() : 0.0;
      s.atoms.emplace_back(traj.events[i].t,
                           traj.events[i].t * traj.events[i].t * (pn2 - pn2_next));
    }
    return s;
  }
  // -t^2 d/dt ||p||^2 as a density: the mass t_k^2 (||p_k||^2 - ||p_{k+1}||^2)
  // localized at node k, divided by the surrounding cell width.
  const auto& t = traj.grid_t;
  const int K = static_cast<int>(t.size());
  for (int k = 0; k < K; ++k) {
    const double pn2 = traj.grid_p[k].values.squaredNorm();
    const double pn2_next = k + 1 < K ? traj.grid_p[k + 1].values.squaredNorm() : 0.0;
    const double lo = k > 0 ? t[k - 1] : t[k];
    const double hi = k + 1 < K ? t[k + 1] : t[k];
    const double cell = 0.5 * (hi - lo);
    s.grid_t.push_back(t[k]);
    s.density.push_back(cell > 0 ? t[k] * t[k] * (pn2 - pn2_next) / cell : 0.0);
  }
  const double mean_cell = K > 1 ? (t.back() - t.front()) / (K - 1) : 0;
  s.sigma = sigma != 0 ? std::max(sigma, 0.0) : 4.0 * mean_cell;
  smooth_density(s.grid_t, s.density, s.sigma);
  return s;
}

}  // namespace specdec
