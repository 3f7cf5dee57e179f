#include "augclip/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "augclip/error.hpp"

namespace augclip {

Embedding::Embedding(Vector values, bool normalized)
    : values_(std::move(values)), normalized_(normalized) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::NonFinite, "component " + std::to_string(i) + " is not finite");
    }
  }
  if (normalized_ && std::abs(norm(values_) - 1.0) > kUnitNormTolerance) {
    throw Error(ErrorCode::InvalidArgument, "embedding flagged as unit-norm has norm " +
                                                std::to_string(norm(values_)));
  }
}

void require_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<long double>(a[i]) * static_cast<long double>(b[i]);
  }
  return static_cast<double>(acc);
}

double norm(std::span<const double> v) {
  long double acc = 0.0L;
  for (double x : v) acc += static_cast<long double>(x) * x;
  return static_cast<double>(std::sqrt(acc));
}

Embedding normalize(std::span<const double> v) {
  const double n = norm(v);
  if (!(n > kZeroNormThreshold)) {
    throw Error(ErrorCode::ZeroVector, "cannot normalize vector with norm " + std::to_string(n));
  }
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return Embedding(std::move(out), true);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  const double na = norm(a);
  const double nb = norm(b);
  if (!(na > kZeroNormThreshold) || !(nb > kZeroNormThreshold)) {
    throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  }
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

Vector mean_embedding(std::span<const Embedding> set,
                      std::optional<std::span<const double>> weights) {
  if (set.empty()) throw Error(ErrorCode::EmptySet, "mean of an empty set");
  const std::size_t d = set.front().dim();
  if (weights && weights->size() != set.size()) {
    throw Error(ErrorCode::InvalidArgument, "weights length " + std::to_string(weights->size()) +
                                                " != set size " + std::to_string(set.size()));
  }
  long double total = 0.0L;
  std::vector<long double> acc(d, 0.0L);
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (set[k].dim() != d) {
      throw Error(ErrorCode::DimensionMismatch, "set member " + std::to_string(k));
    }
    const double w = weights ? (*weights)[k] : 1.0;
    if (w < 0.0 || !std::isfinite(w)) {
      throw Error(ErrorCode::InvalidArgument, "weight " + std::to_string(k) + " is negative");
    }
    total += w;
    const auto v = set[k].values();
    for (std::size_t i = 0; i < d; ++i) acc[i] += static_cast<long double>(w) * v[i];
  }
  if (!(total > 0.0L)) throw Error(ErrorCode::NonpositiveWeightSum, "weights sum to zero");
  Vector out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = static_cast<double>(acc[i] / total);
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a, b);
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scale(std::span<const double> v, double s) {
  Vector out(v.begin(), v.end());
  for (double& x : out) x *= s;
  return out;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace augclip
