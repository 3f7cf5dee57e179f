#pragma once

// Exact vector operations in the shared image/text embedding space.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace augclip {

using Vector = std::vector<double>;

inline constexpr double kZeroNormThreshold = 1e-12;
inline constexpr double kUnitNormTolerance = 1e-6;

// An embedding vector. When is_normalized() is true the L2 norm is within
// kUnitNormTolerance of one. Components are always finite.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(Vector values, bool normalized = false);

  std::span<const double> values() const noexcept { return values_; }
  const Vector& vector() const noexcept { return values_; }
  std::size_t dim() const noexcept { return values_.size(); }
  bool is_normalized() const noexcept { return normalized_; }

  double operator[](std::size_t i) const noexcept { return values_[i]; }

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  Vector values_;
  bool normalized_ = false;
};

// Dot product accumulated in long double.
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

// v / |v|. Throws ZeroVector when |v| <= 1e-12.
Embedding normalize(std::span<const double> v);
inline Embedding normalize(const Embedding& e) { return normalize(e.values()); }

// a.b / (|a||b|), clamped to [-1, 1]. Throws DimensionMismatch or ZeroVector.
double cosine(std::span<const double> a, std::span<const double> b);
inline double cosine(const Embedding& a, const Embedding& b) {
  return cosine(a.values(), b.values());
}

// Unweighted arithmetic mean, or sum(w_i x_i) / sum(w_i) when weights are
// given. Throws EmptySet, DimensionMismatch, InvalidArgument (negative or
// misaligned weights) or NonpositiveWeightSum.
Vector mean_embedding(std::span<const Embedding> set,
                      std::optional<std::span<const double>> weights = std::nullopt);

Vector add(std::span<const double> a, std::span<const double> b);
Vector subtract(std::span<const double> a, std::span<const double> b);
Vector scale(std::span<const double> v, double s);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

void require_same_dim(std::span<const double> a, std::span<const double> b);

}  // namespace augclip
