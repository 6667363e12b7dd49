#pragma once

#include <iosfwd>
#include <string>

#include "specdec/flows.hpp"
#include "specdec/regularizer.hpp"
#include "specdec/signal.hpp"
#include "specdec/spectral.hpp"
#include "specdec/verify.hpp"

namespace specdec::io {

// Signals: CSV with one value per line (1D) or one comma-separated row per
// line (2D). Values are written with 17 significant digits so that
// write/read round-trips bit-exactly. Plain PGM (P2) is supported for 2D
// signals as a lossy visualization format.
Signal read_signal(const std::string& path);
void write_signal(const std::string& path, const Signal& s);
void write_pgm(const std::string& path, const Signal& s);
Signal read_pgm(const std::string& path);

// Operator spec files:
// {"kind": "tv1d"|"tv2d_aniso"|"tv2d_iso"|"l1"|"matrix",
//  "shape": [n] or [rows, cols] (for "matrix": [m, n]),
//  "matrix": row-major coefficient array when kind == "matrix"}
Regularizer read_regularizer(const std::string& path);
Regularizer regularizer_from_json_text(const std::string& text);
void write_regularizer_spec(const std::string& path, const std::string& kind,
                            const Shape& shape, const Eigen::MatrixXd* matrix = nullptr);

// Trajectories and decompositions as JSON; numeric fields round-trip
// bit-exactly and dumps are byte-deterministic.
void write_trajectory(const std::string& path, const FlowTrajectory& traj);
FlowTrajectory read_trajectory(const std::string& path);
void write_decomposition(const std::string& path, const SpectralDecomposition& dec);
SpectralDecomposition read_decomposition(const std::string& path);

// Filter specs:
// {"w0": .., "kind": "lowpass"|"highpass"|"bandpass"|"bandstop"|"custom",
//  "t1": .., "t2": .., "breakpoints": [[t, w], ...]}
FilterSpec read_filter_spec(const std::string& path);
void write_filter_spec(const std::string& path, const FilterSpec& spec);

// Spectrum CSV: header "t,mass_or_density", one row per atom or grid node.
void write_spectrum(const std::string& path, const Spectrum& s);

void write_report(const std::string& path, const VerificationReport& report);
void print_report(std::ostream& os, const VerificationReport& report);

}  // namespace specdec::io
