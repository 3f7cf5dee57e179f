#include "augclip/weighting.hpp"

#include <algorithm>

#include "augclip/error.hpp"
#include "augclip/kernels.hpp"

namespace augclip {

namespace {

// Mean of row i of a square self-similarity matrix, optionally skipping the
// diagonal. A singleton class without its self term has no intra-class
// evidence and contributes 0.
double intra_mean(const linalg::Matrix& self, std::size_t i, bool include_self) {
  const std::size_t n = self.cols();
  long double acc = 0.0L;
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!include_self && j == i) continue;
    acc += self(i, j);
    ++count;
  }
  return count == 0 ? 0.0 : static_cast<double>(acc / count);
}

Vector side_weights(const linalg::Matrix& self, const Vector& cross_means, bool include_self) {
  Vector raw(self.rows());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = intra_mean(self, i, include_self) - cross_means[i];
  }
  return raw;
}

Vector floored(const Vector& raw, double floor) {
  Vector out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(),
                 [floor](double v) { return std::max(v, floor); });
  return out;
}

}  // namespace

WeightVector compute_weights(const AttributeSet& source, const AttributeSet& target,
                             const WeightingConfig& cfg) {
  if (source.size() == 0 || target.size() == 0) {
    throw Error(ErrorCode::EmptySet, "weights need at least one source and one target attribute");
  }
  require_embedded(source);
  require_embedded(target);
  if (!(cfg.floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "weight floor must be positive");

  const auto ss = kernels::cosine_matrix(source.embeddings, source.embeddings);
  const auto tt = kernels::cosine_matrix(target.embeddings, target.embeddings);
  const auto st = kernels::cosine_matrix(source.embeddings, target.embeddings);
  const auto ts = kernels::cosine_matrix(target.embeddings, source.embeddings);

  WeightVector w;
  w.floor = cfg.floor;
  w.source_raw = side_weights(ss, kernels::row_means(st), cfg.include_self);
  w.target_raw = side_weights(tt, kernels::row_means(ts), cfg.include_self);
  w.source = floored(w.source_raw, cfg.floor);
  w.target = floored(w.target_raw, cfg.floor);
  return w;
}

WeightVector uniform_weights(std::size_t n_source, std::size_t n_target) {
  WeightVector w;
  w.source_raw.assign(n_source, 1.0);
  w.target_raw.assign(n_target, 1.0);
  w.source = w.source_raw;
  w.target = w.target_raw;
  return w;
}

}  // namespace augclip
