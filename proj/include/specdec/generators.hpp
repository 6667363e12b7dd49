#pragma once

#include <vector>

#include "specdec/signal.hpp"

namespace specdec {

/// Unit spike at the middle index.
Signal gen_spike_1d(int n);

/// Flat plateaus: peak j covers [position_j, position_j + width_j) with the
/// given height. Peaks must stay in range and must not overlap or touch.
Signal gen_flat_peaks_1d(int n, const std::vector<int>& positions,
                         const std::vector<int>& widths,
                         const std::vector<double>& heights);

struct Disk {
  double row = 0, col = 0;
  double radius = 0;
  double contrast = 1;
};

struct DiskImage {
  Signal signal;
  std::vector<double> predicted_eigenvalues;  // continuum value 2/r per disk
};

/// Indicator disks of the given contrasts. The predicted eigenvalue per disk
/// is the continuum ratio perimeter/area = 2/r; the discrete value differs
/// and the prediction is reported as approximate metadata only.
DiskImage gen_disks_2d(int rows, int cols, const std::vector<Disk>& disks);

/// Uniform entries in [-1,1], reproducible across platforms for a fixed seed.
Signal gen_random(const Shape& shape, unsigned long long seed);

Signal gen_constant(const Shape& shape, double value);

}  // namespace specdec
