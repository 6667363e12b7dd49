#include "specdec/generators.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace specdec {

Signal gen_spike_1d(int n) {
  if (n < 1) throw std::invalid_argument("gen_spike_1d: need n >= 1");
  Vector v = Vector::Zero(n);
  v[n / 2] = 1.0;
  return Signal(std::move(v), Shape{n, 1});
}

Signal gen_flat_peaks_1d(int n, const std::vector<int>& positions,
                         const std::vector<int>& widths,
                         const std::vector<double>& heights) {
  if (positions.size() != widths.size() || widths.size() != heights.size())
    throw std::invalid_argument("gen_flat_peaks_1d: parameter lists must have equal length");

  std::vector<size_t> order(positions.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return positions[a] < positions[b]; });

  Vector v = Vector::Zero(n);
  int prev_end = -1;
  for (size_t k : order) {
    const int pos = positions[k], w = widths[k];
    if (w < 1 || pos < 0 || pos + w > n)
      throw std::invalid_argument("gen_flat_peaks_1d: peak out of range");
    if (pos <= prev_end)
      throw std::invalid_argument("gen_flat_peaks_1d: peaks must not overlap or touch");
    for (int i = pos; i < pos + w; ++i) v[i] = heights[k];
    prev_end = pos + w;  // require at least one zero sample between peaks
  }
  return Signal(std::move(v), Shape{n, 1});
}

DiskImage gen_disks_2d(int rows, int cols, const std::vector<Disk>& disks) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("gen_disks_2d: empty grid");
  Vector v = Vector::Zero(rows * cols);
  DiskImage out;
  for (const auto& d : disks) {
    if (!(d.radius > 0)) throw std::invalid_argument("gen_disks_2d: radius must be positive");
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double dr = r - d.row, dc = c - d.col;
        if (dr * dr + dc * dc <= d.radius * d.radius) v[r * cols + c] += d.contrast;
      }
    out.predicted_eigenvalues.push_back(2.0 / d.radius);
  }
  out.signal = Signal(std::move(v), Shape{rows, cols});
  return out;
}

Signal gen_random(const Shape& shape, unsigned long long seed) {
  std::mt19937_64 gen(seed);
  Vector v(shape.size());
  for (int i = 0; i < v.size(); ++i)
    v[i] = 2.0 * (static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0)) - 1.0;
  return Signal(std::move(v), shape);
}

Signal gen_constant(const Shape& shape, double value) {
  return Signal(Vector::Constant(shape.size(), value), shape);
}

}  // namespace specdec
