#pragma once

// Dataset scoring: every configured metric for every edited image, the two
// protocol statistics (2AFC alignment and triplet ground-truth accuracy), and
// the fitter x weighting ablation grid.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "augclip/embedding_store.hpp"
#include "augclip/error.hpp"
#include "augclip/hyperplane.hpp"
#include "augclip/manifest.hpp"
#include "augclip/metrics.hpp"
#include "augclip/weighting.hpp"

namespace augclip {

struct HarnessConfig {
  std::vector<MetricId> metrics = {MetricId::augclip(), MetricId::clipscore(),
                                   MetricId::preservation_embedding()};
  Fitter fitter = Fitter::svm;
  // Importance weights feed the classifier; off means uniform weights.
  bool weighting = true;
  WeightingConfig weighting_cfg;
  FitConfig fit;
  std::optional<ExternalScores> external;
  // 0: OpenMP default, 1: serial.
  int workers = 0;

  void validate() const;
};

nlohmann::json to_json(const HarnessConfig& cfg);

// Adds clipscore and the preservation metric in effect when a combined
// metric is requested; removes duplicates keeping first occurrence.
std::vector<MetricId> resolve_metrics(const HarnessConfig& cfg);

struct ScoreValue {
  std::optional<double> value;
  std::optional<ErrorCode> error;
  std::string message;

  bool ok() const noexcept { return value.has_value(); }
  friend bool operator==(const ScoreValue&, const ScoreValue&) = default;
};

struct EditScores {
  std::string image_id;
  EditTag tag = EditTag::candidate_a;
  // Aligned with ScoreReport::metrics.
  std::vector<ScoreValue> scores;
  friend bool operator==(const EditScores&, const EditScores&) = default;
};

struct CaseScores {
  std::string case_id;
  CaseKind kind = CaseKind::two_afc;
  std::optional<EditTag> human_vote;
  std::vector<EditScores> edits;
  // Set when a hyperplane was fitted for the case.
  std::optional<double> misclassification;
  std::optional<double> alpha_min;
  std::vector<std::string> warnings;
  friend bool operator==(const CaseScores&, const CaseScores&) = default;
};

struct MetricAggregate {
  std::optional<double> s_align;
  std::size_t s_align_cases = 0;
  std::size_t s_align_excluded = 0;
  std::optional<double> acc_both;
  std::size_t acc_both_cases = 0;
  std::size_t acc_both_excluded = 0;
  friend bool operator==(const MetricAggregate&, const MetricAggregate&) = default;
};

struct ScoreReport {
  std::string label;
  nlohmann::json config = nlohmann::json::object();
  std::string provenance;
  std::vector<std::string> metrics;
  std::vector<CaseScores> cases;
  std::map<std::string, MetricAggregate> aggregates;
  std::optional<double> misclassification_mean;
  std::size_t fitted_cases = 0;
  friend bool operator==(const ScoreReport&, const ScoreReport&) = default;
};

// Scores one case. The hyperplane is fitted once and reused for every edit;
// failures are recorded per metric. Combined metrics are left empty here and
// filled at dataset level, where min-max scaling happens.
CaseScores score_case(const CaseRecord& c, std::span<const MetricId> metrics,
                      const HarnessConfig& cfg, const EmbeddingStore& store,
                      const AttributeCatalog& sets);

// Scores every case (in parallel up to cfg.workers), fills combined metrics
// and aggregates. Case order follows the manifest.
ScoreReport score_dataset(const Manifest& manifest, const EmbeddingStore& store,
                          const HarnessConfig& cfg);

struct ProtocolStat {
  double value = 0.0;
  std::size_t eligible = 0;
  std::size_t excluded = 0;
};

// Fraction of 2AFC cases whose higher-scored candidate matches human_vote;
// exact ties count 0.5. Cases with a metric error are excluded. Throws
// NoEligibleCases.
ProtocolStat twoafc_alignment(const ScoreReport& report, const MetricId& metric);
// Fraction of triplet cases where ground_truth has the strict maximum.
ProtocolStat ground_truth_accuracy(const ScoreReport& report, const MetricId& metric);

// Recomputes report.aggregates and misclassification_mean from report.cases.
void compute_aggregates(ScoreReport& report);

struct AblationCell {
  Fitter fitter = Fitter::svm;
  bool weighting = true;
  std::string label;
  std::optional<ScoreReport> report;
  std::string error;
  friend bool operator==(const AblationCell&, const AblationCell&) = default;
};

// One report per (fitter, weighting) cell, in the given order with fitters
// outermost. A failing cell records its error and the grid continues.
std::vector<AblationCell> ablation_run(const Manifest& manifest, const EmbeddingStore& store,
                                       const HarnessConfig& base, std::span<const Fitter> fitters,
                                       const std::vector<bool>& weightings);

}  // namespace augclip
