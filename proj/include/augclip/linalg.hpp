#pragma once

// Small dense helpers for the n x n systems that appear when fitting a
// hyperplane to a handful of attribute points.

#include <cstddef>
#include <span>
#include <vector>

#include "augclip/geometry.hpp"

namespace augclip::linalg {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Overwrites `a` with its lower-triangular Cholesky factor. Returns false
// when a pivot is not positive; `a` is then partially factored garbage.
bool cholesky_in_place(Matrix& a);

// Solves (L L^T) x = b given the factor produced by cholesky_in_place.
Vector cholesky_solve(const Matrix& lower, std::span<const double> b);

Vector multiply(const Matrix& a, std::span<const double> x);

}  // namespace augclip::linalg
