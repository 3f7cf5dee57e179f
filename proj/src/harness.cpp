#include "augclip/harness.hpp"

#include <algorithm>
#include <exception>

#include "augclip/augmentation.hpp"
#include "augclip/kernels.hpp"
#include "augclip/projection.hpp"

namespace augclip {

using nlohmann::json;

void HarnessConfig::validate() const {
  if (metrics.empty()) throw Error(ErrorCode::InvalidArgument, "no metrics configured");
  if (workers < 0) throw Error(ErrorCode::InvalidArgument, "workers must be >= 0");
  if (!(weighting_cfg.floor > 0.0)) throw Error(ErrorCode::InvalidArgument, "weight floor must be > 0");
  fit.validate();
  for (const auto& m : metrics) {
    if (m.family == MetricFamily::combined) {
      CombineConfig{*m.gamma, PreservationDirection::higher_better}.validate();
    }
  }
}

json to_json(const HarnessConfig& cfg) {
  json metrics = json::array();
  for (const auto& m : cfg.metrics) metrics.push_back(to_string(m));
  return json{{"metrics", metrics},
              {"fitter", std::string(to_string(cfg.fitter))},
              {"weighting", cfg.weighting},
              {"include_self", cfg.weighting_cfg.include_self},
              {"weight_floor", cfg.weighting_cfg.floor},
              {"c", cfg.fit.c},
              {"max_iters", cfg.fit.max_iters},
              {"tol", cfg.fit.tol},
              {"ridge", cfg.fit.ridge},
              {"external_preservation", cfg.external.has_value()}};
}

std::vector<MetricId> resolve_metrics(const HarnessConfig& cfg) {
  std::vector<MetricId> out;
  auto add = [&](const MetricId& m) {
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  };
  bool combined = false;
  for (const auto& m : cfg.metrics) {
    add(m);
    combined = combined || m.family == MetricFamily::combined;
  }
  if (combined) {
    add(MetricId::clipscore());
    add(cfg.external ? MetricId::preservation_external() : MetricId::preservation_embedding());
  }
  return out;
}

namespace {

ScoreValue failure(ErrorCode code, std::string message) {
  return ScoreValue{std::nullopt, code, std::move(message)};
}

ScoreValue capture(const std::exception_ptr& ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const Error& e) {
    return failure(e.code(), e.what());
  } catch (const std::exception& e) {
    return failure(ErrorCode::InvalidArgument, e.what());
  }
}

template <typename F>
ScoreValue attempt(F&& f) {
  try {
    return ScoreValue{f(), std::nullopt, {}};
  } catch (...) {
    return capture(std::current_exception());
  }
}

bool needs_attributes(const MetricId& m) {
  return m.family == MetricFamily::augclip || m.family == MetricFamily::clipscore_aug;
}

}  // namespace

CaseScores score_case(const CaseRecord& c, std::span<const MetricId> metrics,
                      const HarnessConfig& cfg, const EmbeddingStore& store,
                      const AttributeCatalog& sets) {
  CaseScores out;
  out.case_id = c.case_id;
  out.kind = c.kind;
  out.human_vote = c.human_vote;
  for (const auto& e : c.edited) {
    out.edits.push_back(EditScores{e.image_id, e.tag, std::vector<ScoreValue>(metrics.size())});
  }

  // Inputs shared by every edit. A failure here is recorded against each
  // metric that depends on it.
  std::optional<ScoreValue> base_error;
  const Embedding* i_src = nullptr;
  const Embedding* t_src = nullptr;
  const Embedding* t_trg = nullptr;
  try {
    i_src = &store.resolve(c.source_image_id);
    t_src = &store.resolve(c.source_text_id);
    t_trg = &store.resolve(c.target_text_id);
  } catch (...) {
    base_error = capture(std::current_exception());
  }

  const bool want_attributes = std::any_of(metrics.begin(), metrics.end(), needs_attributes);
  const bool want_fit = std::any_of(metrics.begin(), metrics.end(), [](const MetricId& m) {
    return m.family == MetricFamily::augclip;
  });

  std::optional<ScoreValue> attr_error;
  AttributeSet source, target;
  WeightVector importance;
  if (want_attributes) {
    try {
      auto s = sets.find(c.source_attributes_id);
      auto t = sets.find(c.target_attributes_id);
      if (s == sets.end()) throw Error(ErrorCode::DanglingReference, c.source_attributes_id);
      if (t == sets.end()) throw Error(ErrorCode::DanglingReference, c.target_attributes_id);
      source = embed_attributes(s->second, store);
      target = embed_attributes(t->second, store);
      require_embedded(source);
      require_embedded(target);
      importance = compute_weights(source, target, cfg.weighting_cfg);
    } catch (...) {
      attr_error = capture(std::current_exception());
    }
  }

  std::optional<ScoreValue> fit_error;
  std::optional<ModificationResult> projection;
  if (want_fit) {
    if (base_error) {
      fit_error = base_error;
    } else if (attr_error) {
      fit_error = attr_error;
    } else {
      try {
        const WeightVector fit_weights =
            cfg.weighting ? importance : uniform_weights(source.size(), target.size());
        Hyperplane h = fit(cfg.fitter, source, target, fit_weights, cfg.fit);
        out.misclassification = misclassification_rate(h, source, target);
        out.warnings = h.warnings;
        projection = modification_vector(h, *i_src);
        out.alpha_min = projection->alpha_min;
      } catch (...) {
        fit_error = capture(std::current_exception());
      }
    }
  }

  for (std::size_t e = 0; e < c.edited.size(); ++e) {
    const EditedImage& edit = c.edited[e];
    const Embedding* i_edit = nullptr;
    std::optional<ScoreValue> edit_error;
    try {
      i_edit = &store.resolve(edit.image_id);
    } catch (...) {
      edit_error = capture(std::current_exception());
    }
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      const MetricId& metric = metrics[m];
      ScoreValue& slot = out.edits[e].scores[m];
      if (metric.family == MetricFamily::combined) continue;
      if (metric.family == MetricFamily::preservation_external) {
        if (!cfg.external) {
          slot = failure(ErrorCode::InvalidArgument, "no external preservation scores loaded");
        } else if (auto v = cfg.external->lookup(c.case_id, edit.image_id)) {
          slot = ScoreValue{*v, std::nullopt, {}};
        } else {
          slot = failure(ErrorCode::MissingId,
                         "no external preservation score for " + c.case_id + "/" + edit.image_id);
        }
        continue;
      }
      if (edit_error) {
        slot = *edit_error;
        continue;
      }
      if (base_error) {
        slot = *base_error;
        continue;
      }
      switch (metric.family) {
        case MetricFamily::clipscore:
          slot = attempt([&] { return clipscore(*i_edit, *i_src, *t_trg, *t_src); });
          break;
        case MetricFamily::preservation_embedding:
          slot = attempt([&] { return preservation_embedding(*i_edit, *i_src); });
          break;
        case MetricFamily::clipscore_aug:
          if (attr_error) {
            slot = *attr_error;
          } else {
            slot = attempt([&] {
              return clipscore_augmented(*i_edit, *i_src, *t_trg, *t_src, source, target,
                                         importance, *metric.variant);
            });
          }
          break;
        case MetricFamily::augclip:
          if (fit_error) {
            slot = *fit_error;
          } else {
            slot = attempt([&] { return augclip_score(*i_edit, *projection); });
          }
          break;
        default:
          break;
      }
    }
  }
  return out;
}

namespace {

void fill_combined(ScoreReport& report, const std::vector<MetricId>& metrics,
                   const HarnessConfig& cfg) {
  auto index_of = [&](const MetricId& id) -> std::ptrdiff_t {
    auto it = std::find(metrics.begin(), metrics.end(), id);
    return it == metrics.end() ? -1 : it - metrics.begin();
  };
  const MetricId presv_id =
      cfg.external ? MetricId::preservation_external() : MetricId::preservation_embedding();
  const PreservationDirection direction =
      cfg.external ? cfg.external->direction : PreservationDirection::higher_better;
  const std::ptrdiff_t mod_idx = index_of(MetricId::clipscore());
  const std::ptrdiff_t presv_idx = index_of(presv_id);

  for (std::size_t m = 0; m < metrics.size(); ++m) {
    if (metrics[m].family != MetricFamily::combined) continue;
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    std::vector<double> mod, presv;
    for (std::size_t ci = 0; ci < report.cases.size(); ++ci) {
      auto& cs = report.cases[ci];
      for (std::size_t e = 0; e < cs.edits.size(); ++e) {
        const ScoreValue& a = cs.edits[e].scores[mod_idx];
        const ScoreValue& p = cs.edits[e].scores[presv_idx];
        if (a.ok() && p.ok()) {
          slots.emplace_back(ci, e);
          mod.push_back(*a.value);
          presv.push_back(*p.value);
        } else {
          cs.edits[e].scores[m] = a.ok() ? p : a;
        }
      }
    }
    if (slots.empty()) continue;
    try {
      auto combined = combine_scores(mod, presv, CombineConfig{*metrics[m].gamma, direction});
      for (std::size_t k = 0; k < slots.size(); ++k) {
        report.cases[slots[k].first].edits[slots[k].second].scores[m] =
            ScoreValue{combined[k], std::nullopt, {}};
      }
    } catch (...) {
      ScoreValue err = capture(std::current_exception());
      for (const auto& [ci, e] : slots) report.cases[ci].edits[e].scores[m] = err;
    }
  }
}

std::ptrdiff_t metric_index(const ScoreReport& report, const MetricId& metric) {
  const std::string name = to_string(metric);
  auto it = std::find(report.metrics.begin(), report.metrics.end(), name);
  if (it == report.metrics.end()) {
    throw Error(ErrorCode::NoEligibleCases, "metric " + name + " not in report");
  }
  return it - report.metrics.begin();
}

const ScoreValue* find_score(const CaseScores& c, EditTag tag, std::ptrdiff_t m) {
  for (const auto& e : c.edits) {
    if (e.tag == tag) return &e.scores[m];
  }
  return nullptr;
}

}  // namespace

ScoreReport score_dataset(const Manifest& manifest, const EmbeddingStore& store,
                          const HarnessConfig& cfg) {
  cfg.validate();
  const std::vector<MetricId> metrics = resolve_metrics(cfg);
  ScoreReport report;
  report.config = to_json(cfg);
  report.provenance = store.provenance();
  for (const auto& m : metrics) report.metrics.push_back(to_string(m));
  report.cases.resize(manifest.cases.size());

  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(manifest.cases.size());
  const int workers = cfg.workers > 0 ? cfg.workers : kernels::max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers != 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const CaseRecord& c = manifest.cases[i];
    try {
      report.cases[i] = score_case(c, metrics, cfg, store, manifest.attribute_sets);
    } catch (...) {
      CaseScores cs;
      cs.case_id = c.case_id;
      cs.kind = c.kind;
      cs.human_vote = c.human_vote;
      ScoreValue err = capture(std::current_exception());
      for (const auto& e : c.edited) {
        cs.edits.push_back(EditScores{e.image_id, e.tag, std::vector<ScoreValue>(metrics.size(), err)});
      }
      report.cases[i] = std::move(cs);
    }
  }

  fill_combined(report, metrics, cfg);
  compute_aggregates(report);
  return report;
}

ProtocolStat twoafc_alignment(const ScoreReport& report, const MetricId& metric) {
  const std::ptrdiff_t m = metric_index(report, metric);
  ProtocolStat stat;
  double agree = 0.0;
  for (const auto& c : report.cases) {
    if (c.kind != CaseKind::two_afc || !c.human_vote) continue;
    const ScoreValue* a = find_score(c, EditTag::candidate_a, m);
    const ScoreValue* b = find_score(c, EditTag::candidate_b, m);
    if (!a || !b || !a->ok() || !b->ok()) {
      ++stat.excluded;
      continue;
    }
    ++stat.eligible;
    if (*a->value == *b->value) {
      agree += 0.5;
    } else {
      const EditTag pick = *a->value > *b->value ? EditTag::candidate_a : EditTag::candidate_b;
      if (pick == *c.human_vote) agree += 1.0;
    }
  }
  if (stat.eligible == 0) {
    throw Error(ErrorCode::NoEligibleCases, "no scored 2afc cases for " + to_string(metric));
  }
  stat.value = agree / static_cast<double>(stat.eligible);
  return stat;
}

ProtocolStat ground_truth_accuracy(const ScoreReport& report, const MetricId& metric) {
  const std::ptrdiff_t m = metric_index(report, metric);
  ProtocolStat stat;
  std::size_t correct = 0;
  for (const auto& c : report.cases) {
    if (c.kind != CaseKind::triplet) continue;
    const ScoreValue* gt = find_score(c, EditTag::ground_truth, m);
    const ScoreValue* op = find_score(c, EditTag::over_preserved, m);
    const ScoreValue* om = find_score(c, EditTag::over_modified, m);
    if (!gt || !op || !om || !gt->ok() || !op->ok() || !om->ok()) {
      ++stat.excluded;
      continue;
    }
    ++stat.eligible;
    if (*gt->value > *op->value && *gt->value > *om->value) ++correct;
  }
  if (stat.eligible == 0) {
    throw Error(ErrorCode::NoEligibleCases, "no scored triplet cases for " + to_string(metric));
  }
  stat.value = static_cast<double>(correct) / static_cast<double>(stat.eligible);
  return stat;
}

void compute_aggregates(ScoreReport& report) {
  report.aggregates.clear();
  for (const auto& name : report.metrics) {
    const MetricId id = parse_metric(name);
    MetricAggregate agg;
    try {
      auto s = twoafc_alignment(report, id);
      agg.s_align = s.value;
      agg.s_align_cases = s.eligible;
      agg.s_align_excluded = s.excluded;
    } catch (const Error&) {
      for (const auto& c : report.cases) agg.s_align_excluded += c.kind == CaseKind::two_afc;
    }
    try {
      auto s = ground_truth_accuracy(report, id);
      agg.acc_both = s.value;
      agg.acc_both_cases = s.eligible;
      agg.acc_both_excluded = s.excluded;
    } catch (const Error&) {
      for (const auto& c : report.cases) agg.acc_both_excluded += c.kind == CaseKind::triplet;
    }
    report.aggregates.emplace(name, agg);
  }
  double sum = 0.0;
  report.fitted_cases = 0;
  for (const auto& c : report.cases) {
    if (c.misclassification) {
      sum += *c.misclassification;
      ++report.fitted_cases;
    }
  }
  report.misclassification_mean =
      report.fitted_cases ? std::optional<double>(sum / static_cast<double>(report.fitted_cases))
                          : std::nullopt;
}

std::vector<AblationCell> ablation_run(const Manifest& manifest, const EmbeddingStore& store,
                                       const HarnessConfig& base, std::span<const Fitter> fitters,
                                       const std::vector<bool>& weightings) {
  if (manifest.cases.empty()) throw Error(ErrorCode::EmptySet, "dataset has no cases");
  std::vector<AblationCell> cells;
  for (Fitter f : fitters) {
    for (bool w : weightings) {
      AblationCell cell;
      cell.fitter = f;
      cell.weighting = w;
      cell.label = std::string(to_string(f)) + (w ? "+weighted" : "+unweighted");
      HarnessConfig cfg = base;
      cfg.fitter = f;
      cfg.weighting = w;
      try {
        cell.report = score_dataset(manifest, store, cfg);
        cell.report->label = cell.label;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

}  // namespace augclip
