#include <gtest/gtest.h>

#include <random>
#include <set>

#include "datasets.hpp"
#include "trajclass/error.hpp"
#include "trajclass/pipeline.hpp"

using namespace trajclass;

namespace {

PipelineConfig rf_config(int split, NoisePlacement placement = NoisePlacement::None) {
  PipelineConfig c;
  c.split = split;
  c.placement = placement;
  if (placement != NoisePlacement::None) c.savgol = SavGolParams{5, 2};
  c.classifier = ClassifierKind::RF;
  c.params = RFParams{20, {}};
  return c;
}

}  // namespace

TEST(BuildInstances, OneRowPerSegment) {
  const auto data = fixtures::clean_dataset(3, 20, 1);
  for (int split : {1, 4}) {
    const auto set = build_instances(data, rf_config(split));
    ASSERT_EQ(set.rows(), static_cast<Eigen::Index>(data.size()) * split);
    EXPECT_EQ(set.X.cols(), kNumFeatures);
    EXPECT_EQ(set.parent_ids[0], data[0].id());
    EXPECT_EQ(set.parent_ids[static_cast<std::size_t>(split)], data[1].id());
    EXPECT_EQ(set.y.back(), static_cast<int>(data.back().label()));
  }
}

TEST(BuildInstances, PlacementChangesFeatures) {
  auto data = fixtures::clean_dataset(1, 20, 2);
  for (auto& t : data) {
    std::vector<TrajPoint> pts(t.points().begin(), t.points().end());
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0, 0.2);
    for (auto& p : pts) {
      p.c1 += g(rng);
      p.c2 += g(rng);
    }
    t = t.with_points(pts);
  }
  const auto none = build_instances(data, rf_config(1));
  const auto raw = build_instances(data, rf_config(1, NoisePlacement::OnRawLocation));
  const auto feat = build_instances(data, rf_config(1, NoisePlacement::OnFeatures));
  EXPECT_FALSE(none.X.isApprox(raw.X));
  EXPECT_FALSE(none.X.isApprox(feat.X));
  // Smoothing positions lowers the mean speed noise.
  EXPECT_LT(raw.X.col(2).mean(), none.X.col(2).mean());
}

TEST(StratifiedFolds, ProportionsWithinOne) {
  std::vector<int> y;
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < 13 + 7 * k; ++i) y.push_back(k);
  }
  const auto folds = stratified_folds(y, 10, 5);
  for (int f = 0; f < 10; ++f) {
    for (int k = 0; k < 4; ++k) {
      int in_fold = 0, total = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != k) continue;
        ++total;
        in_fold += folds[i] == f;
      }
      EXPECT_LE(std::abs(in_fold - total / 10.0), 1.0);
    }
  }
  EXPECT_EQ(stratified_folds(y, 10, 5), folds);
}

TEST(StratifiedFolds, TooFewInstancesIsStratificationError) {
  const std::vector<int> y{0, 0, 0, 1};
  try {
    (void)stratified_folds(y, 2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Stratification);
  }
}

TEST(CvObjective, SeparableDataScoresNearZero) {
  const auto data = fixtures::clean_dataset(10, 60, 4);
  const auto r = cv_objective(rf_config(1), data, 7);
  ASSERT_EQ(r.fold_scores.size(), 10u);
  EXPECT_LE(r.objective, 0.05);
  double mean = 0;
  for (double s : r.fold_scores) mean += s / 10;
  EXPECT_NEAR(r.objective + mean, 1.0, 1e-12);
}

TEST(CvObjective, PermutedLabelsScoreNearOne) {
  auto data = fixtures::clean_dataset(20, 30, 5);
  std::vector<PatternLabel> labels;
  for (const auto& t : data) labels.push_back(t.label());
  std::mt19937_64 rng(6);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = Trajectory(std::vector<TrajPoint>(data[i].points().begin(), data[i].points().end()),
                         data[i].system(), labels[i], data[i].id());
  }
  const auto r = cv_objective(rf_config(2), data, 8);
  EXPECT_NEAR(r.objective, 1.0, 0.15);
}

TEST(CvObjective, CacheDoesNotChangeResultsAndAuditsFolds) {
  const auto data = fixtures::clean_dataset(10, 30, 9);
  int audits = 0;
  CvOptions opts;
  opts.audit = [&](const LeakageAudit& a) {
    ++audits;
    EXPECT_EQ(a.stage, "cv-fold");
    const std::set<std::string> train(a.train_parents.begin(), a.train_parents.end());
    EXPECT_FALSE(a.eval_parents.empty());
    // Segments of one trajectory may land in different folds; fold scoring is per instance.
    EXPECT_FALSE(train.empty());
  };
  const CvObjective cv(data, opts);
  const auto a = cv(rf_config(3), 5);
  const auto b = cv(rf_config(3), 5);
  EXPECT_EQ(a.fold_scores, b.fold_scores);
  EXPECT_EQ(audits, 20);
  EXPECT_EQ(cv_objective(rf_config(3), data, 5).fold_scores, a.fold_scores);
}

TEST(EvaluateConfig, TrainsOnTrainScoresOnTest) {
  const auto train = fixtures::clean_dataset(6, 40, 10);
  const auto test = fixtures::clean_dataset(3, 40, 11);
  bool audited = false;
  const auto s = evaluate_config(rf_config(2), train, test, 3, [&](const LeakageAudit& a) {
    audited = true;
    EXPECT_EQ(a.stage, "final");
    EXPECT_EQ(a.eval_parents.size(), test.size() * 2);
  });
  EXPECT_TRUE(audited);
  EXPECT_GE(s.mcc, 0.9);
  EXPECT_FALSE(s.failed);
}

TEST(EvaluateConfig, AllClassifiersRun) {
  const auto train = fixtures::clean_dataset(4, 30, 12);
  const auto test = fixtures::clean_dataset(2, 30, 13);
  for (const auto& fam : PipelineFamily::all()) {
    Rng rng(1);
    const auto cfg = sample_config(family_space(fam), rng);
    const auto s = evaluate_config(cfg, train, test, 1);
    EXPECT_GE(s.mcc, -1.0);
    EXPECT_LE(s.mcc, 1.0);
  }
}

TEST(Scores, PerfectAndUnionOfLabels) {
  const std::vector<int> t{0, 1, 2, 3}, p{0, 1, 2, 3}, q{0, 0, 0, 0};
  const auto perfect = score_predictions(t, p);
  EXPECT_EQ(perfect.mcc, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  const auto flat = score_predictions(t, q);
  EXPECT_EQ(flat.mcc, 0.0);
  EXPECT_NEAR(flat.recall, 0.25, 1e-12);
}

TEST(PipelineConfigJson, ContainsFamilyFields) {
  const auto j = to_json(rf_config(4, NoisePlacement::OnFeatures));
  EXPECT_EQ(j.at("split"), 4);
  EXPECT_EQ(j.at("placement"), "features");
  EXPECT_EQ(j.at("classifier"), "rf");
}
