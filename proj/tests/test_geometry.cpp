#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "augclip/error.hpp"
#include "augclip/geometry.hpp"
#include "augclip/kernels.hpp"
#include "augclip/linalg.hpp"
#include "augclip/synthetic.hpp"

using namespace augclip;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an augclip::Error";
  return ErrorCode::InvalidArgument;
}

std::vector<Embedding> random_set(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Embedding> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vector v(dim);
    for (auto& x : v) x = g(rng);
    out.emplace_back(v);
  }
  return out;
}

}  // namespace

TEST(Normalize, ScalesToUnitLength) {
  const Embedding e = normalize(Vector{3.0, 4.0});
  EXPECT_DOUBLE_EQ(e[0], 0.6);
  EXPECT_DOUBLE_EQ(e[1], 0.8);
  EXPECT_TRUE(e.is_normalized());
}

TEST(Normalize, UnitVectorUnchanged) {
  Vector v(7, 0.0);
  v[0] = 1.0;
  EXPECT_EQ(normalize(v).vector(), v);
}

TEST(Normalize, ZeroVectorRejected) {
  EXPECT_EQ(code_of([] { normalize(Vector{0.0, 0.0}); }), ErrorCode::ZeroVector);
}

TEST(Normalize, Idempotent) {
  std::mt19937_64 rng(1);
  for (const auto& e : random_set(50, 33, rng)) {
    const Embedding once = normalize(e);
    const Embedding twice = normalize(once);
    for (std::size_t i = 0; i < once.dim(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-12);
  }
}

TEST(EmbeddingTest, RejectsNonFinite) {
  EXPECT_EQ(code_of([] { Embedding(Vector{1.0, NAN}); }), ErrorCode::NonFinite);
  EXPECT_EQ(code_of([] { Embedding(Vector{INFINITY, 0.0}); }), ErrorCode::NonFinite);
}

TEST(EmbeddingTest, NormFlagChecked) {
  EXPECT_NO_THROW(Embedding(Vector{0.6, 0.8}, true));
  EXPECT_EQ(code_of([] { Embedding(Vector{1.0, 1.0}, true); }), ErrorCode::InvalidArgument);
}

TEST(Cosine, BasicValues) {
  const Vector x{0.3, -1.2, 2.0};
  EXPECT_NEAR(cosine(x, x), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(cosine(Vector{1, 0}, Vector{0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(cosine(Vector{1, 0}, Vector{-1, 0}), -1.0);
}

TEST(Cosine, ZeroAndMismatch) {
  EXPECT_EQ(code_of([] { cosine(Vector{0, 0}, Vector{1, 0}); }), ErrorCode::ZeroVector);
  EXPECT_EQ(code_of([] { cosine(Vector{1, 0}, Vector{1, 0, 0}); }), ErrorCode::DimensionMismatch);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> pos(0.01, 100.0);
  const auto set = random_set(40, 16, rng);
  for (std::size_t i = 0; i + 1 < set.size(); ++i) {
    const auto& a = set[i].vector();
    const auto& b = set[i + 1].vector();
    EXPECT_NEAR(cosine(a, b), cosine(b, a), 1e-12);
    EXPECT_NEAR(cosine(scale(a, pos(rng)), scale(b, pos(rng))), cosine(a, b), 1e-12);
  }
}

TEST(Cosine, RotationInvariant) {
  std::mt19937_64 rng(3);
  const auto q = random_orthogonal(24, rng);
  const auto set = random_set(20, 24, rng);
  for (std::size_t i = 0; i + 1 < set.size(); ++i) {
    const auto qa = linalg::multiply(q, set[i].values());
    const auto qb = linalg::multiply(q, set[i + 1].values());
    EXPECT_NEAR(cosine(qa, qb), cosine(set[i], set[i + 1]), 1e-9);
  }
}

TEST(RandomOrthogonal, IsOrthogonal) {
  std::mt19937_64 rng(4);
  const auto q = random_orthogonal(12, rng);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      EXPECT_NEAR(dot(q.row(i), q.row(j)), i == j ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(Mean, Examples) {
  const std::vector<Embedding> two{Embedding(Vector{1, 0}), Embedding(Vector{0, 1})};
  EXPECT_EQ(mean_embedding(two), (Vector{0.5, 0.5}));
  const std::vector<Embedding> one{Embedding(Vector{1, 0})};
  const Vector w5{5.0};
  EXPECT_EQ(mean_embedding(one, std::span<const double>(w5)), (Vector{1, 0}));
  const Vector w31{3.0, 1.0};
  const Vector m = mean_embedding(two, std::span<const double>(w31));
  EXPECT_DOUBLE_EQ(m[0], 0.75);
  EXPECT_DOUBLE_EQ(m[1], 0.25);
}

TEST(Mean, Errors) {
  const std::vector<Embedding> none;
  EXPECT_EQ(code_of([&] { mean_embedding(none); }), ErrorCode::EmptySet);
  const std::vector<Embedding> two{Embedding(Vector{1, 0}), Embedding(Vector{0, 1})};
  const Vector zeros{0.0, 0.0};
  EXPECT_EQ(code_of([&] { mean_embedding(two, std::span<const double>(zeros)); }),
            ErrorCode::NonpositiveWeightSum);
  const Vector short_w{1.0};
  EXPECT_EQ(code_of([&] { mean_embedding(two, std::span<const double>(short_w)); }),
            ErrorCode::InvalidArgument);
}

TEST(Linalg, CholeskySolve) {
  linalg::Matrix a(3, 3);
  const double vals[3][3] = {{4, 1, 0.5}, {1, 3, 0.2}, {0.5, 0.2, 2}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = vals[i][j];
  linalg::Matrix l = a;
  ASSERT_TRUE(linalg::cholesky_in_place(l));
  const Vector x{1.0, -2.0, 0.5};
  const Vector b = linalg::multiply(a, x);
  const Vector got = linalg::cholesky_solve(l, b);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], x[i], 1e-12);
}

TEST(Linalg, CholeskyRejectsIndefinite) {
  linalg::Matrix a(2, 2);
  a(0, 0) = 1;
  a(0, 1) = a(1, 0) = 2;
  a(1, 1) = 1;
  EXPECT_FALSE(linalg::cholesky_in_place(a));
}

// The parallel kernels must agree with the serial reference for any thread
// count.
class KernelParity : public ::testing::TestWithParam<int> {};

TEST_P(KernelParity, MatchesReference) {
  const int saved = kernels::max_threads();
  kernels::set_threads(GetParam());
  std::mt19937_64 rng(5);
  const auto a = random_set(37, 64, rng);
  const auto b = random_set(29, 64, rng);
  const auto cm = kernels::cosine_matrix(a, b);
  const auto cr = kernels::reference::cosine_matrix(a, b);
  const auto dm = kernels::dot_matrix(a, b);
  const auto dr = kernels::reference::dot_matrix(a, b);
  ASSERT_EQ(cm.rows(), 37u);
  ASSERT_EQ(cm.cols(), 29u);
  for (std::size_t i = 0; i < cm.rows(); ++i) {
    for (std::size_t j = 0; j < cm.cols(); ++j) {
      EXPECT_EQ(cm(i, j), cr(i, j));
      EXPECT_EQ(dm(i, j), dr(i, j));
      EXPECT_NEAR(cm(i, j), cosine(a[i], b[j]), 1e-12);
    }
  }
  EXPECT_EQ(kernels::row_means(cm), kernels::reference::row_means(cr));
  kernels::set_threads(saved);
}

INSTANTIATE_TEST_SUITE_P(Threads, KernelParity, ::testing::Values(1, 2, 4));
