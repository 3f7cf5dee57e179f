#include "augclip/projection.hpp"

#include "augclip/error.hpp"

namespace augclip {

ModificationResult modification_vector(std::span<const double> w, double b,
                                       std::span<const double> i_src) {
  require_same_dim(w, i_src);
  const double wn = norm(w);
  if (!(wn > 1e-9)) {
    throw Error(ErrorCode::DegenerateHyperplane, "normal vector norm " + std::to_string(wn));
  }
  const double f = dot(w, i_src) + b;
  ModificationResult r;
  r.alpha_min = -f / (wn * wn);
  r.v = scale(w, r.alpha_min);
  r.ideal = add(i_src, r.v);
  r.source_side = f < 0.0 ? -1 : (f > 0.0 ? 1 : 0);
  return r;
}

ModificationResult modification_vector(const Hyperplane& h, const Embedding& i_src) {
  return modification_vector(h.w, h.b, i_src.values());
}

double augclip_score(const Embedding& i_edit, const ModificationResult& projection) {
  if (!(norm(projection.ideal) > kZeroNormThreshold)) {
    throw Error(ErrorCode::ZeroIdeal, "ideal edited representation vanished");
  }
  return cosine(i_edit.values(), projection.ideal);
}

double augclip_score(const Embedding& i_edit, const Embedding& i_src, const Hyperplane& h) {
  return augclip_score(i_edit, modification_vector(h, i_src));
}

}  // namespace augclip
