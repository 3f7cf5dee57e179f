#pragma once

// Minimum modification vector and the AugCLIP score.
//
// The ideal edited representation is the orthogonal projection of the
// source-image embedding onto the decision boundary w.x + b = 0:
//
//   alpha_min = -(w.i_src + b) / |w|^2,   v = alpha_min * w,   ideal = i_src + v
//
// AugCLIP = cos(i_edit, ideal).

#include <span>

#include "augclip/geometry.hpp"
#include "augclip/hyperplane.hpp"

namespace augclip {

struct ModificationResult {
  Vector v;
  Vector ideal;
  double alpha_min = 0.0;
  // Sign of f(i_src): -1 source side (the expected case), +1 already on the
  // target side (projected back onto the boundary), 0 on the boundary.
  int source_side = 0;
};

// Throws DegenerateHyperplane when |w| <= 1e-9.
ModificationResult modification_vector(std::span<const double> w, double b,
                                       std::span<const double> i_src);
ModificationResult modification_vector(const Hyperplane& h, const Embedding& i_src);

// Throws ZeroIdeal when the ideal point vanishes.
double augclip_score(const Embedding& i_edit, const ModificationResult& projection);
double augclip_score(const Embedding& i_edit, const Embedding& i_src, const Hyperplane& h);

}  // namespace augclip
