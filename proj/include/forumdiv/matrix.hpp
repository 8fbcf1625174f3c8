#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace forumdiv {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }

  Matrix transpose() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
/// aᵀ·b without materializing the transpose.
Matrix multiply_at_b(const Matrix& a, const Matrix& b);
/// a·bᵀ without materializing the transpose.
Matrix multiply_a_bt(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& m);
double dot(std::span<const double> a, std::span<const double> b);

struct EigenDecomposition {
  std::vector<double> values;  // non-increasing
  Matrix vectors;              // column j is the eigenvector for values[j]
  int sweeps = 0;
};

struct JacobiOptions {
  double tolerance = 1e-10;  // off-diagonal Frobenius norm relative to the matrix norm
  int max_sweeps = 100;
};

/// Cyclic Jacobi eigensolver for a symmetric matrix. Throws NumericError when
/// the off-diagonal mass does not fall below the tolerance within max_sweeps.
EigenDecomposition symmetric_eigen(const Matrix& symmetric, JacobiOptions options = {});

}  // namespace forumdiv
