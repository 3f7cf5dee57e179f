#pragma once

// Pairwise similarity kernels. The default entry points are OpenMP-parallel
// over rows; `kernels::reference` holds the plain serial loops they are
// tested against. Every entry is computed by the same scalar routine in
// both versions, so results are bit-identical regardless of thread count.

#include <span>

#include "augclip/geometry.hpp"
#include "augclip/linalg.hpp"

namespace augclip::kernels {

// G(i, j) = a_i . b_j
linalg::Matrix dot_matrix(std::span<const Embedding> a, std::span<const Embedding> b);

// C(i, j) = cos(a_i, b_j)
linalg::Matrix cosine_matrix(std::span<const Embedding> a, std::span<const Embedding> b);

// Mean of each row.
Vector row_means(const linalg::Matrix& m);

namespace reference {

linalg::Matrix dot_matrix(std::span<const Embedding> a, std::span<const Embedding> b);
linalg::Matrix cosine_matrix(std::span<const Embedding> a, std::span<const Embedding> b);
Vector row_means(const linalg::Matrix& m);

}  // namespace reference

// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads() noexcept;
void set_threads(int n) noexcept;

}  // namespace augclip::kernels
