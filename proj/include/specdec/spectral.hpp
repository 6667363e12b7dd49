#pragma once

#include <string>
#include <vector>

#include "specdec/flows.hpp"
#include "specdec/signal.hpp"

namespace specdec {

struct SpectralAtom {
  double t = 0;  // wavelength time
  Signal phi;
};

/// Wavelength decomposition of a signal: the nullspace part P0 f plus either
/// a finite list of atoms (exact trajectories) or a sampled density phi(t_k)
/// (gridded trajectories). Exact atoms satisfy f = P0 f + sum_i phi_i.
struct SpectralDecomposition {
  Method method = Method::GF;
  Mode mode = Mode::exact;
  Signal nullspace_part;
  std::vector<SpectralAtom> atoms;  // exact mode, times increasing
  std::vector<double> grid_t;       // gridded mode
  std::vector<Signal> density;      // phi(t_k)
  std::vector<Signal> du;           // du/dt(t_k); drives the gridded filter pairing
  Signal input;
};

/// Atoms from an exact trajectory (method-matching formula: subgradient
/// differences for GF, slope jumps of u for VM, plateau differences for IS).
/// Gridded trajectories yield a sampled density: t u''(t) for VM/GF, and for
/// IS the negative step measure -u'(t) of the piecewise-constant flow, which
/// is the frequency-form density t^2 du/dt expressed against dt.
SpectralDecomposition decompose(const FlowTrajectory& traj);

/// nullspace_part + sum of atoms (exact) or trapezoid quadrature of the
/// density (gridded).
Signal reconstruct(const SpectralDecomposition& dec);

enum class FilterKind { lowpass, highpass, bandpass, bandstop, custom };

/// Filter weight w(t) plus the nullspace weight w0. The built-in kinds are
/// ideal step filters on wavelength time (lowpass passes t > t_c); custom
/// filters interpolate the given breakpoints piecewise-linearly.
struct FilterSpec {
  double w0 = 1.0;
  FilterKind kind = FilterKind::custom;
  double t1 = 0, t2 = 0;  // cutoffs for the step kinds
  std::vector<std::pair<double, double>> breakpoints;  // (t, w), t increasing

  static FilterSpec ideal_lowpass(double t_c, double w0 = 1.0);
  static FilterSpec ideal_highpass(double t_c, double w0 = 0.0);
  static FilterSpec ideal_bandpass(double t1, double t2, double w0 = 0.0);
  static FilterSpec ideal_bandstop(double t1, double t2, double w0 = 1.0);

  /// Right-continuous evaluation (atom exactly on a breakpoint takes the
  /// value just after it).
  double weight(double t) const;
};

struct FilterResult {
  Signal u;
  std::vector<std::string> warnings;
};

/// Exact mode: w0 P0 f + sum_i w(t_i) phi_i. Gridded mode: the integrated-
/// by-parts pairing w0 P0 f - integral (t w'(t) + w(t)) du, with step filters
/// auto-smoothed over one grid cell (warning attached).
FilterResult apply_filter(const SpectralDecomposition& dec, const FilterSpec& spec);

enum class SpectrumKind { S1, S2, S3 };

struct Spectrum {
  SpectrumKind kind = SpectrumKind::S3;
  double sigma = 0;  // mollification width (S1 only)
  std::vector<std::pair<double, double>> atoms;  // (t_i, mass)
  std::vector<double> grid_t;
  std::vector<double> density;
};

/// S1: l1 norm density of phi, mollified by a Gaussian of width sigma
/// (default: one grid cell, or 1% of the atom-time span in exact mode).
/// S3: masses <phi_i, f> (exact) or density <phi(t_k), f> (gridded).
/// Gridded S2/S3 densities are mollified as well (default four grid cells;
/// sigma < 0 requests the raw node values) since sampled densities of
/// near-atomic measures are not pointwise meaningful without smoothing.
Spectrum compute_spectrum(const SpectralDecomposition& dec, SpectrumKind kind,
                          double sigma = 0);

/// S2 requires a gradient-flow trajectory: -t^2 d/dt ||p(t)||^2, i.e. atom
/// masses t_i^2 (||p_i||^2 - ||p_{i+1}||^2). S1/S3 are also accepted here and
/// delegate through decompose().
Spectrum compute_spectrum(const FlowTrajectory& traj, SpectrumKind kind,
                          double sigma = 0);

struct ParsevalReport {
  double inner_residual = 0;  // ||f||^2 - ||P0 f||^2 - sum <phi_i, f>
  double norm_residual = 0;   // ||f||^2 - ||P0 f||^2 - sum ||phi_i||^2
};

/// Both residuals vanish when the decomposition is orthogonal.
ParsevalReport parseval_check(const SpectralDecomposition& dec);

}  // namespace specdec
