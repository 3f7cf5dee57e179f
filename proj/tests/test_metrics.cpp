#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "augclip/error.hpp"
#include "augclip/metrics.hpp"
#include "augclip/synthetic.hpp"
#include "augclip/weighting.hpp"
#include "support/test_util.hpp"

using namespace augclip;

namespace {

Embedding e(Vector v) { return Embedding(std::move(v)); }

AttributeSet set_of(Role role, std::vector<Vector> vs) {
  std::vector<Embedding> es;
  for (auto& v : vs) es.emplace_back(std::move(v));
  return AttributeSet::from_embeddings(role, std::move(es), role == Role::source ? "s" : "t");
}

ErrorCode error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& err) {
    return err.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::InvalidArgument;
}

std::vector<std::size_t> ranking(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  return idx;
}

}  // namespace

TEST(ClipScore, IdenticalDirections) {
  const Vector src{0.1, 0.7, -0.2, 0.4}, ts{0.3, 0.1, 0.5, -0.2}, tt{-0.4, 0.2, 0.6, 0.1};
  const Vector edit = add(src, subtract(tt, ts));
  EXPECT_NEAR(clipscore(edit, src, tt, ts), 1.0, 1e-15);
}

TEST(ClipScore, UneditedImageDegenerate) {
  const Vector src{0.1, 0.7, -0.2, 0.4};
  try {
    clipscore(src, src, Vector{1, 0, 0, 0}, Vector{0, 1, 0, 0});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DegenerateDirection);
    EXPECT_NE(std::string(err.what()).find("image"), std::string::npos);
  }
}

TEST(ClipScore, OrthogonalDirections) {
  // dI = (1, 0, 0, 0), dT = (0, 1, 0, 0)
  EXPECT_DOUBLE_EQ(clipscore(Vector{1, 0, 0, 1}, Vector{0, 0, 0, 1}, Vector{0, 1, 1, 0},
                             Vector{0, 0, 1, 0}),
                   0.0);
}

TEST(ClipScore, JointScaleInvariant) {
  std::mt19937_64 rng(51);
  for (int k = 0; k < 50; ++k) {
    const auto a = random_unit(8, rng), b = random_unit(8, rng), c = random_unit(8, rng),
               d = random_unit(8, rng);
    EXPECT_NEAR(clipscore(scale(a, 3.0), scale(b, 3.0), scale(c, 3.0), scale(d, 3.0)),
                clipscore(a, b, c, d), 1e-12);
  }
}

TEST(ClipScoreAug, SingletonSetsReproducePlain) {
  std::mt19937_64 rng(52);
  for (int k = 0; k < 50; ++k) {
    const Embedding ie(random_unit(16, rng)), is(random_unit(16, rng)), tt(random_unit(16, rng)),
        ts(random_unit(16, rng));
    const auto s = AttributeSet::from_embeddings(Role::source, {ts}, "s");
    const auto t = AttributeSet::from_embeddings(Role::target, {tt}, "t");
    const auto w = compute_weights(s, t);
    const double plain = clipscore(ie, is, tt, ts);
    for (const auto& m : clipscore_aug_variants()) {
      EXPECT_NEAR(clipscore_augmented(ie, is, tt, ts, s, t, w, *m.variant), plain, 1e-12)
          << to_string(m);
    }
  }
}

TEST(ClipScoreAug, HandComposedFixture) {
  const Embedding ie(Vector{0.5, 0.5, 0.5, 0.5}), is(Vector{1, 0, 0, 0});
  const Embedding tt(Vector{0, 0, 0, 1}), ts(Vector{0, 0, 1, 0});
  const auto s = set_of(Role::source, {{1, 0, 0, 0}, {0, 1, 0, 0}});
  const auto t = set_of(Role::target, {{0, 0, 1, 0}, {0, 0, 0, 1}});
  // src_trg unweighted: mean(S) = (.5,.5,0,0), mean(T) = (0,0,.5,.5)
  // dI = (-.5,.5,.5,.5), dT = (-.5,-.5,.5,.5): dot = .5, norms 1 and 1.
  const double got = clipscore_augmented(ie, is, tt, ts, s, t, uniform_weights(2, 2),
                                         AugVariant{AugSide::src_trg, false});
  EXPECT_NEAR(got, 0.5, 1e-15);
  // trg only: dT = (0,0,-.5,.5) against dI: dot = 0.
  EXPECT_NEAR(clipscore_augmented(ie, is, tt, ts, s, t, uniform_weights(2, 2),
                                  AugVariant{AugSide::trg, false}),
              0.0, 1e-15);
}

TEST(ClipScoreAug, EqualWeightsMatchUnweighted) {
  std::mt19937_64 rng(53);
  const Embedding ie(random_unit(8, rng)), is(random_unit(8, rng)), tt(random_unit(8, rng)),
      ts(random_unit(8, rng));
  std::vector<Embedding> ss, ts_set;
  for (int k = 0; k < 4; ++k) ss.emplace_back(random_unit(8, rng));
  for (int k = 0; k < 3; ++k) ts_set.emplace_back(random_unit(8, rng));
  const auto s = AttributeSet::from_embeddings(Role::source, ss, "s");
  const auto t = AttributeSet::from_embeddings(Role::target, ts_set, "t");
  WeightVector w = uniform_weights(4, 3);
  for (auto& x : w.source) x = 0.37;
  for (auto& x : w.target) x = 2.5;
  for (AugSide side : {AugSide::src, AugSide::trg, AugSide::src_trg}) {
    EXPECT_NEAR(clipscore_augmented(ie, is, tt, ts, s, t, w, {side, true}),
                clipscore_augmented(ie, is, tt, ts, s, t, w, {side, false}), 1e-12);
  }
}

TEST(ClipScoreAug, EmptySet) {
  AttributeSet empty;
  const auto t = set_of(Role::target, {{0, 1}});
  const Embedding a(Vector{1, 0}), b(Vector{0, 1});
  EXPECT_EQ(error_of([&] {
              clipscore_augmented(a, b, a, b, empty, t, uniform_weights(0, 1), {AugSide::src, false});
            }),
            ErrorCode::EmptySet);
}

TEST(Preservation, Values) {
  EXPECT_NEAR(preservation_embedding(e({0.3, 0.4}), e({0.3, 0.4})), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(preservation_embedding(e({1, 0}), e({0, 1})), 0.0);
  EXPECT_DOUBLE_EQ(preservation_embedding(e({1, 0}), e({-1, 0})), -1.0);
}

TEST(Combine, Endpoints) {
  const std::vector<double> mod{0.2, 0.9, 0.4, -0.1}, pres{5.0, 1.0, 3.0, 2.0};
  const auto at_one = combine_scores(mod, pres, {.gamma = 1.0});
  const auto at_zero = combine_scores(mod, pres, {.gamma = 0.0});
  EXPECT_EQ(at_one, minmax_scale(mod));
  EXPECT_EQ(at_zero, minmax_scale(pres));
  EXPECT_EQ(ranking(at_one), ranking(mod));
  EXPECT_EQ(ranking(at_zero), ranking(pres));
}

TEST(Combine, Midpoint) {
  const std::vector<double> a{0.0, 1.0}, b{1.0, 0.0};
  EXPECT_EQ(combine_scores(a, b, {.gamma = 0.5}), (std::vector<double>{0.5, 0.5}));
}

TEST(Combine, LowerBetterPreservationNegated) {
  const std::vector<double> mod{0.0, 1.0}, dist{0.1, 0.9};
  const auto r = combine_scores(mod, dist, {.gamma = 0.0,
                                            .preservation_direction =
                                                PreservationDirection::lower_better});
  EXPECT_EQ(r, (std::vector<double>{1.0, 0.0}));
}

TEST(Combine, Errors) {
  const std::vector<double> flat{0.3, 0.3}, ok{0.0, 1.0};
  EXPECT_EQ(error_of([&] { combine_scores(flat, ok, {}); }), ErrorCode::ConstantScores);
  EXPECT_EQ(error_of([&] { combine_scores(ok, std::vector<double>{1.0}, {}); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(error_of([&] { combine_scores(ok, ok, {.gamma = 1.5}); }), ErrorCode::InvalidArgument);
}

TEST(MetricNames, RoundTrip) {
  std::vector<MetricId> all{MetricId::clipscore(), MetricId::augclip(),
                            MetricId::preservation_embedding(), MetricId::preservation_external(),
                            MetricId::combined(0.25)};
  for (const auto& m : clipscore_aug_variants()) all.push_back(m);
  EXPECT_EQ(clipscore_aug_variants().size(), 6u);
  for (const auto& m : all) EXPECT_EQ(parse_metric(to_string(m)), m) << to_string(m);
  EXPECT_EQ(to_string(MetricId::clipscore_aug(AugSide::src, true)), "clipscore_aug:src:weighted");
  EXPECT_THROW(parse_metric("lpips"), Error);
  EXPECT_THROW(parse_metric("combined:2"), Error);
}

TEST(ExternalScores, LoadAndLookup) {
  testutil::TempDir dir;
  testutil::write_file(dir / "lpips.tsv",
                       "direction\tlower_better\n# per-edit entries override per-case ones\n"
                       "c1\t0.25\nc1/img_b\t0.5\n");
  const auto s = load_external_scores(dir / "lpips.tsv");
  EXPECT_EQ(s.direction, PreservationDirection::lower_better);
  EXPECT_EQ(s.lookup("c1", "img_a"), 0.25);
  EXPECT_EQ(s.lookup("c1", "img_b"), 0.5);
  EXPECT_FALSE(s.lookup("c2", "img_a").has_value());

  testutil::write_file(dir / "bad.tsv", "c1\t0.25\n");
  EXPECT_EQ(error_of([&] { load_external_scores(dir / "bad.tsv"); }), ErrorCode::ParseError);
  testutil::write_file(dir / "dup.tsv", "direction\thigher_better\nc1\t1\nc1\t2\n");
  EXPECT_EQ(error_of([&] { load_external_scores(dir / "dup.tsv"); }), ErrorCode::DuplicateId);
}
