#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace eegraph {

/// Dense row-major matrix of doubles. This is a container, not a linear
/// algebra layer; the few kernels that need products implement them locally.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}

  static Matrix zeros(int r, int c) { return Matrix(r, c); }

  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return v[static_cast<size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return v[static_cast<size_t>(r) * cols + c];
  }

  const double* row_ptr(int r) const { return v.data() + static_cast<size_t>(r) * cols; }
  double* row_ptr(int r) { return v.data() + static_cast<size_t>(r) * cols; }

  std::vector<double> column(int c) const {
    std::vector<double> out(static_cast<size_t>(rows));
    for (int r = 0; r < rows; ++r) out[static_cast<size_t>(r)] = (*this)(r, c);
    return out;
  }

  void set_column(int c, const std::vector<double>& col) {
    assert(static_cast<int>(col.size()) == rows);
    for (int r = 0; r < rows; ++r) (*this)(r, c) = col[static_cast<size_t>(r)];
  }

  size_t numel() const { return v.size(); }

  bool operator==(const Matrix& o) const {
    return rows == o.rows && cols == o.cols && v == o.v;
  }
};

}  // namespace eegraph
