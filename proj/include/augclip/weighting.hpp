#pragma once

// Per-attribute importance weights: mean cosine to the attribute's own class
// minus mean cosine to the opposite class.

#include "augclip/attribute_set.hpp"
#include "augclip/geometry.hpp"

namespace augclip {

struct WeightingConfig {
  // Include cs(s_i, s_i) = 1 in the intra-class mean.
  bool include_self = true;
  // Lower bound applied to raw weights before they reach a classifier.
  double floor = 1e-3;
};

struct WeightVector {
  Vector source_raw;
  Vector target_raw;
  Vector source;  // floored
  Vector target;  // floored
  double floor = 1e-3;
};

// Throws EmptySet when either set is empty, MissingId when not embedded.
WeightVector compute_weights(const AttributeSet& source, const AttributeSet& target,
                             const WeightingConfig& cfg = {});

// All-ones weights, used when weighting is switched off.
WeightVector uniform_weights(std::size_t n_source, std::size_t n_target);

}  // namespace augclip
