#include "augclip/linalg.hpp"

#include <cmath>

#include "augclip/error.hpp"

namespace augclip::linalg {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool cholesky_in_place(Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorCode::DimensionMismatch, "cholesky of a non-square matrix");
  for (std::size_t j = 0; j < n; ++j) {
    long double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= static_cast<long double>(a(j, k)) * a(j, k);
    if (!(diag > 0.0L) || !std::isfinite(static_cast<double>(diag))) return false;
    const double ljj = static_cast<double>(std::sqrt(diag));
    a(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      long double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= static_cast<long double>(a(i, k)) * a(j, k);
      a(i, j) = static_cast<double>(s / ljj);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = 0.0;
  return true;
}

Vector cholesky_solve(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  if (b.size() != n) throw Error(ErrorCode::DimensionMismatch, "cholesky_solve rhs");
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= static_cast<long double>(lower(i, k)) * y[k];
    y[i] = static_cast<double>(s / lower(i, i));
  }
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    long double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= static_cast<long double>(lower(k, ii)) * x[k];
    x[ii] = static_cast<double>(s / lower(ii, ii));
  }
  return x;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix-vector product");
  Vector out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) out[r] = dot(a.row(r), x);
  return out;
}

}  // namespace augclip::linalg
