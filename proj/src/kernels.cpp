#include "augclip/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "augclip/error.hpp"

namespace augclip::kernels {

namespace {

void check_dims(std::span<const Embedding> a, std::span<const Embedding> b) {
  if (a.empty() || b.empty()) return;
  const std::size_t d = a.front().dim();
  for (const auto& e : a)
    if (e.dim() != d) throw Error(ErrorCode::DimensionMismatch, "kernel input rows");
  for (const auto& e : b)
    if (e.dim() != d) throw Error(ErrorCode::DimensionMismatch, "kernel input columns");
}

}  // namespace

linalg::Matrix dot_matrix(std::span<const Embedding> a, std::span<const Embedding> b) {
  check_dims(a, b);
  linalg::Matrix out(a.size(), b.size());
  const auto rows = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      out(static_cast<std::size_t>(i), j) = dot(a[i].values(), b[j].values());
    }
  }
  return out;
}

linalg::Matrix cosine_matrix(std::span<const Embedding> a, std::span<const Embedding> b) {
  check_dims(a, b);
  linalg::Matrix out(a.size(), b.size());
  const auto rows = static_cast<std::int64_t>(a.size());
  // Exceptions cannot cross the parallel region; record and rethrow.
  bool zero = false;
#pragma omp parallel for schedule(static) reduction(|| : zero)
  for (std::int64_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      try {
        out(static_cast<std::size_t>(i), j) = cosine(a[i].values(), b[j].values());
      } catch (const Error&) {
        zero = true;
      }
    }
  }
  if (zero) throw Error(ErrorCode::ZeroVector, "cosine kernel met a zero vector");
  return out;
}

Vector row_means(const linalg::Matrix& m) {
  Vector out(m.rows(), 0.0);
  if (m.cols() == 0) throw Error(ErrorCode::EmptySet, "row mean of an empty row");
  const auto rows = static_cast<std::int64_t>(m.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i) {
    long double acc = 0.0L;
    for (double v : m.row(static_cast<std::size_t>(i))) acc += v;
    out[static_cast<std::size_t>(i)] = static_cast<double>(acc / m.cols());
  }
  return out;
}

namespace reference {

linalg::Matrix dot_matrix(std::span<const Embedding> a, std::span<const Embedding> b) {
  check_dims(a, b);
  linalg::Matrix out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = dot(a[i].values(), b[j].values());
  return out;
}

linalg::Matrix cosine_matrix(std::span<const Embedding> a, std::span<const Embedding> b) {
  check_dims(a, b);
  linalg::Matrix out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = cosine(a[i].values(), b[j].values());
  return out;
}

Vector row_means(const linalg::Matrix& m) {
  if (m.cols() == 0) throw Error(ErrorCode::EmptySet, "row mean of an empty row");
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    long double acc = 0.0L;
    for (double v : m.row(i)) acc += v;
    out[i] = static_cast<double>(acc / m.cols());
  }
  return out;
}

}  // namespace reference

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) noexcept {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace augclip::kernels
