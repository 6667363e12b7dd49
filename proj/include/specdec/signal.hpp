#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace specdec {

using Vector = Eigen::VectorXd;

/// Grid shape of a signal: 1D signals have cols == 1.
struct Shape {
  int rows = 0;
  int cols = 1;

  int size() const { return rows * cols; }
  bool is_1d() const { return cols == 1 || rows == 1; }
  bool operator==(const Shape&) const = default;
};

/// A finite-dimensional signal: a real vector together with its grid shape.
/// 2D signals are stored row-major (row r, column c at index r*cols + c).
struct Signal {
  Vector values;
  Shape shape;

  Signal() = default;
  Signal(Vector v, Shape s) : values(std::move(v)), shape(s) {
    if (shape.size() != values.size())
      throw std::invalid_argument("Signal: shape does not match vector length");
    if (!values.allFinite())
      throw std::invalid_argument("Signal: entries must be finite");
  }

  static Signal vector(Vector v) {
    Shape s{static_cast<int>(v.size()), 1};
    return Signal(std::move(v), s);
  }

  int size() const { return static_cast<int>(values.size()); }
  double norm() const { return values.norm(); }
};

inline void require_same_shape(const Signal& a, const Signal& b, const std::string& where) {
  if (!(a.shape == b.shape))
    throw std::invalid_argument(where + ": shape mismatch");
}

}  // namespace specdec
