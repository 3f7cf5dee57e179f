#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "json.hpp"

#include "augclip/error.hpp"
#include "augclip/harness.hpp"
#include "augclip/manifest.hpp"
#include "augclip/report.hpp"
#include "augclip/synthetic.hpp"
#include "support/test_util.hpp"

using namespace augclip;
using testutil::TempDir;

namespace {

// Hand-built dataset in 4-D. Source attributes span e1, e2 and target
// attributes span e3, e4, so every fitter places the boundary on
// x1 + x2 = x3 + x4 and the ideal for i_src = (e1 + e2)/sqrt 2 points
// along (1, 1, 1, 1).
struct World {
  Manifest manifest;
  EmbeddingStore store{"toy"};

  void put(const std::string& id, Vector v, EmbeddingKind kind = EmbeddingKind::image) {
    store.insert(id, kind, std::move(v));
  }

  void attributes(const std::string& id, Role role, const std::vector<Vector>& vs,
                  Origin origin = Origin::generated) {
    AttributeSet s;
    s.role = role;
    s.origin = origin;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::string d = id + " attribute " + std::to_string(i);
      s.descriptions.push_back(d);
      if (!store.contains(d)) put(d, vs[i], EmbeddingKind::text);
    }
    manifest.attribute_sets[id] = s;
  }

  CaseRecord& add_case(const std::string& id, std::vector<EditedImage> edits,
                       std::optional<EditTag> vote = std::nullopt) {
    CaseRecord c;
    c.case_id = id;
    c.kind = vote ? CaseKind::two_afc : CaseKind::triplet;
    c.source_image_id = "src";
    c.source_text_id = "t_src";
    c.target_text_id = "t_trg";
    c.edited = std::move(edits);
    c.human_vote = vote;
    c.source_attributes_id = "S";
    c.target_attributes_id = "T";
    manifest.cases.push_back(std::move(c));
    return manifest.cases.back();
  }
};

World toy_world() {
  World w;
  w.manifest.name = "toy";
  w.put("src", {1, 1, 0, 0});
  w.put("t_src", {1, 0, 0.2, 0}, EmbeddingKind::text);
  w.put("t_trg", {0, 0.2, 1, 0}, EmbeddingKind::text);
  w.put("ideal", {1, 1, 1, 1});
  w.put("kept", {1, 1, 0, 0});
  w.put("far", {0, 0, 1, 1});
  w.put("half", {1, 1, 0.3, 0.3});
  w.attributes("S", Role::source, {{1, 0, 0, 0}, {0, 1, 0, 0}});
  w.attributes("T", Role::target, {{0, 0, 1, 0}, {0, 0, 0, 1}});
  w.add_case("t1", {{"ideal", EditTag::ground_truth},
                    {"half", EditTag::over_preserved},
                    {"far", EditTag::over_modified}});
  w.add_case("p1", {{"ideal", EditTag::candidate_a}, {"half", EditTag::candidate_b}},
             EditTag::candidate_a);
  w.add_case("p2", {{"far", EditTag::candidate_a}, {"half", EditTag::candidate_b}},
             EditTag::candidate_a);
  return w;
}

std::size_t metric_slot(const ScoreReport& r, const std::string& name) {
  auto it = std::find(r.metrics.begin(), r.metrics.end(), name);
  EXPECT_NE(it, r.metrics.end()) << name;
  return static_cast<std::size_t>(it - r.metrics.begin());
}

const ScoreValue& score(const ScoreReport& r, const std::string& case_id, EditTag tag,
                        const std::string& metric) {
  const std::size_t m = metric_slot(r, metric);
  for (const auto& c : r.cases) {
    if (c.case_id != case_id) continue;
    for (const auto& e : c.edits) {
      if (e.tag == tag) return e.scores[m];
    }
  }
  throw std::runtime_error("no such score");
}

// Report with one metric and 2AFC cases given as (a, b, vote).
ScoreReport afc_report(const std::vector<std::tuple<std::optional<double>, double, EditTag>>& cs) {
  ScoreReport r;
  r.metrics = {"clipscore"};
  int k = 0;
  for (const auto& [a, b, vote] : cs) {
    CaseScores c;
    c.case_id = "c" + std::to_string(k++);
    c.kind = CaseKind::two_afc;
    c.human_vote = vote;
    ScoreValue sa = a ? ScoreValue{*a, std::nullopt, {}}
                      : ScoreValue{std::nullopt, ErrorCode::DegenerateDirection, "x"};
    c.edits.push_back({"a", EditTag::candidate_a, {sa}});
    c.edits.push_back({"b", EditTag::candidate_b, {ScoreValue{b, std::nullopt, {}}}});
    r.cases.push_back(c);
  }
  return r;
}

ScoreReport triplet_report(const std::vector<std::array<double, 3>>& cs) {
  ScoreReport r;
  r.metrics = {"augclip"};
  int k = 0;
  for (const auto& s : cs) {
    CaseScores c;
    c.case_id = "t" + std::to_string(k++);
    c.kind = CaseKind::triplet;
    c.edits.push_back({"g", EditTag::ground_truth, {ScoreValue{s[0], std::nullopt, {}}}});
    c.edits.push_back({"p", EditTag::over_preserved, {ScoreValue{s[1], std::nullopt, {}}}});
    c.edits.push_back({"m", EditTag::over_modified, {ScoreValue{s[2], std::nullopt, {}}}});
    r.cases.push_back(c);
  }
  return r;
}

ErrorCode manifest_error(const std::filesystem::path& p, const EmbeddingStore* store = nullptr) {
  try {
    if (store) load_manifest(p, *store);
    else load_manifest(p);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "manifest accepted";
  return ErrorCode::InvalidArgument;
}

nlohmann::json manifest_json() {
  return nlohmann::json::parse(R"({
    "schema_version": 1,
    "name": "two",
    "attribute_sets": {
      "S": {"role": "source", "descriptions": ["S attribute 0", "S attribute 1"]},
      "T": {"role": "target", "origin": "manual", "descriptions": ["T attribute 0", "T attribute 1"]}
    },
    "cases": [
      {"case_id": "p1", "source_image": "src", "source_text": "t_src", "target_text": "t_trg",
       "edits": [{"image": "ideal", "tag": "candidate_a"}, {"image": "half", "tag": "candidate_b"}],
       "human_vote": "candidate_a", "votes": {"candidate_a": 3, "candidate_b": 1},
       "source_attributes": "S", "target_attributes": "T"},
      {"case_id": "t1", "source_image": "src", "source_text": "t_src", "target_text": "t_trg",
       "edits": [{"image": "ideal", "tag": "ground_truth"}, {"image": "kept", "tag": "over_preserved"},
                 {"image": "far", "tag": "over_modified"}],
       "source_attributes": "S", "target_attributes": "T"}
    ]
  })");
}

}  // namespace

// ---- manifest ----

TEST(Manifest, LoadsValidFile) {
  TempDir dir;
  testutil::write_file(dir / "m.json", manifest_json().dump());
  const World w = toy_world();
  const Manifest m = load_manifest(dir / "m.json", w.store);
  ASSERT_EQ(m.cases.size(), 2u);
  EXPECT_EQ(m.cases[0].kind, CaseKind::two_afc);
  EXPECT_EQ(m.cases[0].human_vote, EditTag::candidate_a);
  EXPECT_EQ(m.cases[0].vote_counts.at("candidate_a"), 3);
  EXPECT_EQ(m.cases[1].kind, CaseKind::triplet);
  EXPECT_EQ(m.attribute_sets.at("T").origin, Origin::manual);
  EXPECT_EQ(m.base_dir, dir.path());
}

TEST(Manifest, SchemaViolations) {
  TempDir dir;
  auto one_candidate = manifest_json();
  one_candidate["cases"][0]["edits"].erase(1);
  testutil::write_file(dir / "a.json", one_candidate.dump());
  EXPECT_EQ(manifest_error(dir / "a.json"), ErrorCode::SchemaError);

  auto no_vote = manifest_json();
  no_vote["cases"][0].erase("human_vote");
  testutil::write_file(dir / "b.json", no_vote.dump());
  EXPECT_EQ(manifest_error(dir / "b.json"), ErrorCode::SchemaError);

  auto bad_version = manifest_json();
  bad_version["schema_version"] = 7;
  testutil::write_file(dir / "c.json", bad_version.dump());
  EXPECT_EQ(manifest_error(dir / "c.json"), ErrorCode::SchemaError);

  auto dup = manifest_json();
  dup["cases"][1]["case_id"] = "p1";
  testutil::write_file(dir / "d.json", dup.dump());
  EXPECT_EQ(manifest_error(dir / "d.json"), ErrorCode::DuplicateId);

  testutil::write_file(dir / "e.json", "{ not json");
  EXPECT_EQ(manifest_error(dir / "e.json"), ErrorCode::ParseError);
  EXPECT_EQ(manifest_error(dir / "missing.json"), ErrorCode::IoError);
}

TEST(Manifest, DanglingReference) {
  TempDir dir;
  auto j = manifest_json();
  j["cases"][1]["edits"][2]["image"] = "ghost";
  testutil::write_file(dir / "m.json", j.dump());
  const World w = toy_world();
  try {
    load_manifest(dir / "m.json", w.store);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DanglingReference);
    EXPECT_NE(std::string(e.what()).find("t1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(Manifest, WriteReadRoundTrip) {
  TempDir dir;
  World w = toy_world();
  w.manifest.payloads["src"] = Payload{EmbeddingKind::image, (dir / "img" / "src.png").string()};
  w.manifest.payloads["t_src"] = Payload{EmbeddingKind::text, "a man"};
  write_manifest(w.manifest, dir / "m.json");
  const Manifest back = load_manifest(dir / "m.json", w.store);
  ASSERT_EQ(back.cases.size(), w.manifest.cases.size());
  EXPECT_EQ(back.payloads.at("src").ref, (dir / "img" / "src.png").string());
  EXPECT_EQ(back.payloads.at("t_src").ref, "a man");
  EXPECT_EQ(back.attribute_sets.at("S").descriptions, w.manifest.attribute_sets.at("S").descriptions);
  EXPECT_EQ(nlohmann::json::parse(testutil::read_file(dir / "m.json"))["payloads"]["src"]["path"],
            "img/src.png");
}

TEST(Manifest, DescriptionsFile) {
  TempDir dir;
  const World w = toy_world();
  write_descriptions(w.manifest.attribute_sets, dir / "d.json");
  auto j = manifest_json();
  j.erase("attribute_sets");
  j["descriptions_file"] = "d.json";
  testutil::write_file(dir / "m.json", j.dump());
  const Manifest m = load_manifest(dir / "m.json", w.store);
  EXPECT_EQ(m.attribute_sets.size(), 2u);
  EXPECT_EQ(load_descriptions(dir / "d.json").at("T").descriptions,
            w.manifest.attribute_sets.at("T").descriptions);
}

// ---- protocol statistics ----

TEST(TwoAfc, Examples) {
  using T = EditTag;
  const auto all = afc_report({{0.9, 0.1, T::candidate_a},
                               {0.2, 0.3, T::candidate_b},
                               {0.5, 0.4, T::candidate_a},
                               {-0.1, 0.0, T::candidate_b}});
  EXPECT_EQ(twoafc_alignment(all, MetricId::clipscore()).value, 1.0);
  const auto half = afc_report({{0.9, 0.1, T::candidate_a}, {0.9, 0.1, T::candidate_b}});
  EXPECT_EQ(twoafc_alignment(half, MetricId::clipscore()).value, 0.5);
  const auto tie = afc_report({{0.4, 0.4, T::candidate_a}, {0.9, 0.1, T::candidate_a}});
  EXPECT_EQ(twoafc_alignment(tie, MetricId::clipscore()).value, 0.75);
}

TEST(TwoAfc, ErrorsExcludedAndCounted) {
  using T = EditTag;
  const auto r = afc_report({{std::nullopt, 0.1, T::candidate_a}, {0.9, 0.1, T::candidate_a}});
  const auto s = twoafc_alignment(r, MetricId::clipscore());
  EXPECT_EQ(s.value, 1.0);
  EXPECT_EQ(s.eligible, 1u);
  EXPECT_EQ(s.excluded, 1u);
  const auto none = afc_report({{std::nullopt, 0.1, T::candidate_a}});
  try {
    twoafc_alignment(none, MetricId::clipscore());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoEligibleCases);
  }
  EXPECT_THROW(twoafc_alignment(r, MetricId::augclip()), Error);
}

TEST(GroundTruth, Examples) {
  EXPECT_EQ(ground_truth_accuracy(triplet_report({{0.9, 0.1, 0.2}, {0.5, 0.4, 0.3}, {0.3, 0.2, 0.1}}),
                                  MetricId::augclip())
                .value,
            1.0);
  EXPECT_EQ(ground_truth_accuracy(triplet_report({{0.9, 0.1, 0.9}, {0.5, 0.4, 0.3}}),
                                  MetricId::augclip())
                .value,
            0.5);
  try {
    ground_truth_accuracy(afc_report({{0.1, 0.2, EditTag::candidate_a}}), MetricId::clipscore());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoEligibleCases);
  }
}

// ---- scoring ----

TEST(ScoreCase, IdealEditScoresOne) {
  const World w = toy_world();
  const auto metrics = resolve_metrics(HarnessConfig{});
  const auto cs = score_case(w.manifest.cases[0], metrics, HarnessConfig{}, w.store,
                             w.manifest.attribute_sets);
  const std::size_t aug = std::find(metrics.begin(), metrics.end(), MetricId::augclip()) - metrics.begin();
  EXPECT_NEAR(*cs.edits[0].scores[aug].value, 1.0, 1e-9);
  EXPECT_LT(*cs.edits[1].scores[aug].value, *cs.edits[0].scores[aug].value);
  EXPECT_EQ(cs.misclassification, 0.0);
  ASSERT_TRUE(cs.alpha_min.has_value());
  EXPECT_GT(*cs.alpha_min, 0.0);
}

TEST(ScoreCase, UneditedImageIsolatesClipscoreError) {
  World w = toy_world();
  w.add_case("same", {{"src", EditTag::candidate_a}, {"ideal", EditTag::candidate_b}},
             EditTag::candidate_b);
  HarnessConfig cfg;
  const ScoreReport r = score_dataset(w.manifest, w.store, cfg);
  const auto& clip = score(r, "same", EditTag::candidate_a, "clipscore");
  EXPECT_FALSE(clip.ok());
  EXPECT_EQ(clip.error, ErrorCode::DegenerateDirection);
  const auto& aug = score(r, "same", EditTag::candidate_a, "augclip");
  ASSERT_TRUE(aug.ok());
  EXPECT_NEAR(*aug.value, std::sqrt(0.5), 1e-9);
  EXPECT_EQ(r.aggregates.at("clipscore").s_align_excluded, 1u);
}

TEST(ScoreCase, ManualSetsScoreLikeGenerated) {
  World a = toy_world();
  World b = toy_world();
  for (auto& [id, set] : b.manifest.attribute_sets) set.origin = Origin::manual;
  HarnessConfig cfg;
  cfg.metrics = {MetricId::augclip(), MetricId::clipscore_aug(AugSide::src_trg, true)};
  const auto ra = score_dataset(a.manifest, a.store, cfg);
  const auto rb = score_dataset(b.manifest, b.store, cfg);
  EXPECT_EQ(ra.cases, rb.cases);
}

TEST(ScoreDataset, CorruptCaseOnlyChangesItsRows) {
  World clean = toy_world();
  World broken = toy_world();
  broken.manifest.cases[1].edited[1].image_id = "ghost";
  HarnessConfig cfg;
  cfg.metrics = {MetricId::augclip(), MetricId::clipscore(), MetricId::preservation_embedding()};
  const auto a = score_dataset(clean.manifest, clean.store, cfg);
  const auto b = score_dataset(broken.manifest, broken.store, cfg);
  ASSERT_EQ(a.cases.size(), b.cases.size());
  for (std::size_t i = 0; i < a.cases.size(); ++i) {
    if (i == 1) {
      EXPECT_EQ(a.cases[i].edits[0], b.cases[i].edits[0]);
      for (const auto& s : b.cases[i].edits[1].scores) EXPECT_EQ(s.error, ErrorCode::MissingId);
    } else {
      EXPECT_EQ(a.cases[i], b.cases[i]);
    }
  }
}

TEST(ScoreDataset, MissingAttributeSetIsRecorded) {
  World w = toy_world();
  w.manifest.cases[0].target_attributes_id = "nowhere";
  const auto r = score_dataset(w.manifest, w.store, HarnessConfig{});
  EXPECT_EQ(score(r, "t1", EditTag::ground_truth, "augclip").error, ErrorCode::DanglingReference);
  EXPECT_TRUE(score(r, "t1", EditTag::ground_truth, "clipscore").ok());
}

TEST(ScoreDataset, WorkerCountDoesNotChangeReport) {
  SyntheticConfig s;
  s.dim = 48;
  s.triplets = 12;
  s.two_afc = 12;
  const auto data = make_synthetic_dataset(s);
  HarnessConfig cfg;
  cfg.metrics.push_back(MetricId::combined(0.5));
  cfg.metrics.push_back(MetricId::clipscore_aug(AugSide::src, true));
  cfg.workers = 1;
  const auto serial = score_dataset(data.manifest, data.store, cfg);
  cfg.workers = 4;
  const auto parallel = score_dataset(data.manifest, data.store, cfg);
  EXPECT_EQ(serial, parallel);
  EXPECT_EQ(report_to_json(serial).dump(), report_to_json(parallel).dump());
}

TEST(ScoreDataset, MetricSelection) {
  const World w = toy_world();
  HarnessConfig cfg;
  cfg.metrics = {MetricId::clipscore()};
  const auto r = score_dataset(w.manifest, w.store, cfg);
  EXPECT_EQ(r.metrics, (std::vector<std::string>{"clipscore"}));
  EXPECT_FALSE(r.misclassification_mean.has_value());
  cfg.metrics = {MetricId::combined(0.25)};
  EXPECT_EQ(resolve_metrics(cfg),
            (std::vector<MetricId>{MetricId::combined(0.25), MetricId::clipscore(),
                                   MetricId::preservation_embedding()}));
}

TEST(ScoreDataset, CombinedScoresScaled) {
  const World w = toy_world();
  HarnessConfig cfg;
  cfg.metrics = {MetricId::combined(1.0)};
  const auto r = score_dataset(w.manifest, w.store, cfg);
  std::vector<double> clip, comb;
  for (const auto& c : r.cases) {
    for (const auto& e : c.edits) {
      clip.push_back(*e.scores[1].value);
      comb.push_back(*e.scores[0].value);
    }
  }
  EXPECT_EQ(comb, minmax_scale(clip));
}

TEST(ScoreDataset, ExternalPreservation) {
  TempDir dir;
  testutil::write_file(dir / "x.tsv", "direction\tlower_better\nt1\t0.5\np1/ideal\t0.1\n");
  const World w = toy_world();
  HarnessConfig cfg;
  cfg.metrics = {MetricId::preservation_external()};
  cfg.external = load_external_scores(dir / "x.tsv");
  const auto r = score_dataset(w.manifest, w.store, cfg);
  EXPECT_EQ(score(r, "t1", EditTag::over_modified, "preservation_external").value, 0.5);
  EXPECT_EQ(score(r, "p1", EditTag::candidate_a, "preservation_external").value, 0.1);
  EXPECT_EQ(score(r, "p1", EditTag::candidate_b, "preservation_external").error, ErrorCode::MissingId);
}

TEST(ScoreDataset, Aggregates) {
  const World w = toy_world();
  const auto r = score_dataset(w.manifest, w.store, HarnessConfig{});
  const auto& aug = r.aggregates.at("augclip");
  EXPECT_EQ(aug.acc_both, 1.0);
  EXPECT_EQ(aug.acc_both_cases, 1u);
  EXPECT_EQ(aug.s_align_cases, 2u);
  EXPECT_EQ(r.misclassification_mean, 0.0);
  EXPECT_EQ(r.fitted_cases, 3u);
  EXPECT_EQ(r.provenance, "toy");
}

// ---- ablation ----

TEST(Ablation, GridCardinalityAndLabels) {
  const World w = toy_world();
  const Fitter fitters[] = {Fitter::svm, Fitter::lda, Fitter::logistic};
  const auto cells = ablation_run(w.manifest, w.store, HarnessConfig{}, fitters, {true, false});
  ASSERT_EQ(cells.size(), 6u);
  EXPECT_EQ(cells[0].label, "svm+weighted");
  EXPECT_EQ(cells[5].label, "logistic+unweighted");
  for (const auto& c : cells) {
    ASSERT_TRUE(c.report.has_value()) << c.error;
    ASSERT_EQ(c.report->cases.size(), w.manifest.cases.size());
    for (std::size_t i = 0; i < w.manifest.cases.size(); ++i) {
      EXPECT_EQ(c.report->cases[i].case_id, w.manifest.cases[i].case_id);
    }
  }
}

TEST(Ablation, EqualRawWeightsMatchUnweighted) {
  // The toy world is symmetric, so all importance weights are equal.
  const World w = toy_world();
  const Fitter fitters[] = {Fitter::svm, Fitter::lda, Fitter::logistic};
  HarnessConfig cfg;
  cfg.metrics = {MetricId::augclip()};
  const auto cells = ablation_run(w.manifest, w.store, cfg, fitters, {true, false});
  for (std::size_t f = 0; f < 3; ++f) {
    const auto& on = *cells[2 * f].report;
    const auto& off = *cells[2 * f + 1].report;
    for (std::size_t i = 0; i < on.cases.size(); ++i) {
      for (std::size_t e = 0; e < on.cases[i].edits.size(); ++e) {
        EXPECT_NEAR(*on.cases[i].edits[e].scores[0].value, *off.cases[i].edits[e].scores[0].value,
                    1e-7)
            << cells[2 * f].label;
      }
    }
  }
}

TEST(Ablation, SeparableSyntheticHasNoMisclassification) {
  SyntheticConfig s;
  s.dim = 64;
  s.triplets = 6;
  const auto data = make_synthetic_dataset(s);
  const Fitter fitters[] = {Fitter::svm, Fitter::lda, Fitter::logistic};
  const auto cells = ablation_run(data.manifest, data.store, HarnessConfig{}, fitters, {true, false});
  for (const auto& c : cells) {
    ASSERT_TRUE(c.report.has_value()) << c.error;
    EXPECT_EQ(c.report->misclassification_mean, 0.0) << c.label;
  }
}

TEST(Ablation, EmptyDataset) {
  const World w = toy_world();
  Manifest empty = w.manifest;
  empty.cases.clear();
  const Fitter fitters[] = {Fitter::svm};
  EXPECT_THROW(ablation_run(empty, w.store, HarnessConfig{}, fitters, {true}), Error);
}

// ---- reports ----

TEST(Report, StructuredRoundTrip) {
  TempDir dir;
  World w = toy_world();
  w.add_case("same", {{"src", EditTag::candidate_a}, {"ideal", EditTag::candidate_b}},
             EditTag::candidate_b);
  HarnessConfig cfg;
  cfg.metrics.push_back(MetricId::combined(0.5));
  auto r = score_dataset(w.manifest, w.store, cfg);
  r.label = "toy run";
  write_report(r, dir / "r.json", ReportFormat::structured);
  EXPECT_EQ(read_report(dir / "r.json"), r);
}

TEST(Report, TabularRowCount) {
  TempDir dir;
  const World w = toy_world();
  const auto r = score_dataset(w.manifest, w.store, HarnessConfig{});
  write_report(r, dir / "r.tsv", ReportFormat::tabular);
  const std::string text = testutil::read_file(dir / "r.tsv");
  const auto rows = std::count(text.begin(), text.end(), '\n');
  EXPECT_EQ(static_cast<std::size_t>(rows), 1 + r.cases.size() * r.metrics.size());
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "case_id\tkind\tmetric\tcandidate_a\tcandidate_b\tground_truth\tover_preserved\tover_modified");
}

TEST(Report, MissingDirectory) {
  TempDir dir;
  const World w = toy_world();
  const auto r = score_dataset(w.manifest, w.store, HarnessConfig{});
  try {
    write_report(r, dir / "nope" / "r.json", ReportFormat::structured);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Report, AblationRoundTrip) {
  TempDir dir;
  const World w = toy_world();
  const Fitter fitters[] = {Fitter::svm, Fitter::lda};
  auto cells = ablation_run(w.manifest, w.store, HarnessConfig{}, fitters, {true, false});
  cells[1].report.reset();
  cells[1].error = "DegenerateData: synthetic failure";
  write_ablation(cells, dir / "a.json", ReportFormat::structured);
  EXPECT_EQ(read_ablation(dir / "a.json"), cells);
  EXPECT_NE(format_ablation_table(cells).find("svm+unweighted"), std::string::npos);
}

// ---- synthetic data ----

TEST(Synthetic, WrittenDatasetLoads) {
  TempDir dir;
  SyntheticConfig s;
  s.dim = 16;
  s.triplets = 3;
  s.two_afc = 2;
  const auto data = make_synthetic_dataset(s);
  write_dataset(data, dir.path());
  const auto store = load_store(dir / "store.tsv");
  const auto m = load_manifest(dir / "manifest.json", store);
  EXPECT_EQ(m.cases.size(), 5u);
  EXPECT_EQ(store.size(), data.store.size());
  EXPECT_EQ(make_synthetic_dataset(s).manifest.cases.size(), 5u);
}

TEST(Synthetic, OverModifiedConstruction) {
  SyntheticConfig s;
  s.dim = 128;
  s.triplets = 10;
  const auto data = make_synthetic_dataset(s);
  for (const auto& c : data.manifest.cases) {
    const auto& src = data.store.resolve(c.source_image_id);
    for (const auto& e : c.edited) {
      if (e.tag == EditTag::over_modified) EXPECT_LT(cosine(data.store.resolve(e.image_id), src), 0.2);
    }
  }
}

TEST(Synthetic, RotationLeavesAugclipUnchanged) {
  SyntheticConfig s;
  s.dim = 32;
  s.triplets = 5;
  const auto data = make_synthetic_dataset(s);
  std::mt19937_64 rng(61);
  const auto rotated = rotate_store(data.store, random_orthogonal(32, rng));
  HarnessConfig cfg;
  cfg.metrics = {MetricId::augclip()};
  const auto a = score_dataset(data.manifest, data.store, cfg);
  const auto b = score_dataset(data.manifest, rotated, cfg);
  for (std::size_t i = 0; i < a.cases.size(); ++i) {
    for (std::size_t e = 0; e < a.cases[i].edits.size(); ++e) {
      EXPECT_NEAR(*a.cases[i].edits[e].scores[0].value, *b.cases[i].edits[e].scores[0].value, 1e-6);
    }
  }
}
