#pragma once

// Baseline metrics: directional CLIPScore, its description-augmented
// variants, an embedding-space preservation score, and gamma-interpolation
// of modification and preservation scores.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "augclip/attribute_set.hpp"
#include "augclip/geometry.hpp"
#include "augclip/weighting.hpp"

namespace augclip {

enum class MetricFamily {
  clipscore,
  clipscore_aug,
  augclip,
  preservation_embedding,
  preservation_external,
  combined,
};

// Which text embeddings are replaced by description means.
enum class AugSide { src, trg, src_trg };

struct AugVariant {
  AugSide side = AugSide::src_trg;
  bool weighted = false;
  friend bool operator==(const AugVariant&, const AugVariant&) = default;
};

// Metric identity. `variant` is set iff family == clipscore_aug; `gamma` is
// set iff family == combined (the gamma-interpolation of clipscore with the
// preservation metric in effect).
struct MetricId {
  MetricFamily family = MetricFamily::augclip;
  std::optional<AugVariant> variant;
  std::optional<double> gamma;

  static MetricId clipscore() { return {MetricFamily::clipscore, {}, {}}; }
  static MetricId augclip() { return {MetricFamily::augclip, {}, {}}; }
  static MetricId preservation_embedding() { return {MetricFamily::preservation_embedding, {}, {}}; }
  static MetricId preservation_external() { return {MetricFamily::preservation_external, {}, {}}; }
  static MetricId clipscore_aug(AugSide side, bool weighted) {
    return {MetricFamily::clipscore_aug, AugVariant{side, weighted}, {}};
  }
  static MetricId combined(double gamma) { return {MetricFamily::combined, {}, gamma}; }

  friend bool operator==(const MetricId&, const MetricId&) = default;
};

// Canonical names: "clipscore", "augclip", "preservation_embedding",
// "preservation_external", "clipscore_aug:<src|trg|src_trg>:<weighted|unweighted>",
// "combined:<gamma>".
std::string to_string(const MetricId& id);
// Throws InvalidArgument for unknown names.
MetricId parse_metric(std::string_view name);
// The six description-augmented variants.
std::vector<MetricId> clipscore_aug_variants();

// cos(i_edit - i_src, t_trg - t_src). Throws DegenerateDirection naming the
// collapsed side.
double clipscore(const Embedding& i_edit, const Embedding& i_src, const Embedding& t_trg,
                 const Embedding& t_src);
double clipscore(std::span<const double> i_edit, std::span<const double> i_src,
                 std::span<const double> t_trg, std::span<const double> t_src);

// CLIPScore with the source and/or target text embedding replaced by the
// (weighted) mean of the matching description embeddings. Weighted variants
// use the floored importance weights.
double clipscore_augmented(const Embedding& i_edit, const Embedding& i_src, const Embedding& t_trg,
                           const Embedding& t_src, const AttributeSet& source,
                           const AttributeSet& target, const WeightVector& weights,
                           AugVariant variant);

// cos(i_edit, i_src)
double preservation_embedding(const Embedding& i_edit, const Embedding& i_src);

enum class PreservationDirection { higher_better, lower_better };

struct CombineConfig {
  double gamma = 0.5;
  PreservationDirection preservation_direction = PreservationDirection::higher_better;
  void validate() const;
};

// Min-max scales both lists to [0, 1] over the whole list (lower_better
// preservation is negated first) and returns gamma*mod + (1-gamma)*presv.
// Throws ConstantScores when either list has fewer than two distinct values.
std::vector<double> combine_scores(std::span<const double> modification,
                                   std::span<const double> preservation, const CombineConfig& cfg);

// Min-max scaling on its own, exposed for ranking checks.
std::vector<double> minmax_scale(std::span<const double> values);

// Externally computed preservation scores: a header line
// "direction<TAB>higher_better|lower_better", then "case_id<TAB>score" rows.
// A case_id may carry an edit suffix "case_id/image_id" to score individual
// edits; a bare case_id applies to every edit of that case.
struct ExternalScores {
  PreservationDirection direction = PreservationDirection::higher_better;
  std::map<std::string, double> scores;

  std::optional<double> lookup(std::string_view case_id, std::string_view image_id) const;
};

ExternalScores load_external_scores(const std::filesystem::path& path);

}  // namespace augclip
