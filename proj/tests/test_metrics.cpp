#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "trajclass/error.hpp"
#include "trajclass/metrics.hpp"

using namespace trajclass;

namespace {

ConfusionMatrix matrix(std::initializer_list<std::initializer_list<long long>> rows) {
  ConfusionMatrix cm;
  const auto k = static_cast<Eigen::Index>(rows.size());
  cm.counts.resize(k, k);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (long long v : r) cm.counts(i, j++) = v;
    cm.classes.push_back(static_cast<int>(i));
    ++i;
  }
  return cm;
}

ConfusionMatrix random_matrix(std::mt19937_64& rng, int k, int max_total) {
  ConfusionMatrix cm;
  cm.counts = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, k);
  for (int c = 0; c < k; ++c) cm.classes.push_back(c);
  const int s = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_total));
  for (int n = 0; n < s; ++n) {
    // Bias toward the diagonal so correlations cover the whole range.
    const int i = static_cast<int>(rng() % static_cast<unsigned>(k));
    const int j = rng() % 3 == 0 ? i : static_cast<int>(rng() % static_cast<unsigned>(k));
    ++cm.counts(i, j);
  }
  return cm;
}

}  // namespace

TEST(Confusion, Examples) {
  const std::vector<int> classes{0, 1};
  const std::vector<int> t{0, 0, 1, 1, 1}, p{0, 1, 1, 1, 0};
  const auto cm = confusion(t, p, classes);
  EXPECT_EQ(cm.counts(0, 0), 1);
  EXPECT_EQ(cm.counts(0, 1), 1);
  EXPECT_EQ(cm.counts(1, 0), 1);
  EXPECT_EQ(cm.counts(1, 1), 2);
  const auto empty = confusion(std::vector<int>{}, std::vector<int>{}, classes);
  EXPECT_EQ(empty.total(), 0);
  const std::vector<int> perfect{0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  const auto diag = confusion(perfect, perfect, classes);
  EXPECT_EQ(diag.counts(0, 0), 5);
  EXPECT_EQ(diag.counts(1, 1), 5);
  EXPECT_EQ(diag.correct(), 10);
}

TEST(Confusion, UnknownLabelIsLabelError) {
  const std::vector<int> classes{0, 1}, t{0, 2}, p{0, 1};
  try {
    (void)confusion(t, p, classes);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Label);
  }
}

TEST(MacroScores, Examples) {
  const auto perfect = macro_prf(matrix({{5, 0}, {0, 5}}));
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  const auto m = macro_prf(matrix({{2, 1}, {1, 2}}));
  EXPECT_NEAR(m.precision, 2.0 / 3, 1e-12);
  EXPECT_NEAR(m.recall, 2.0 / 3, 1e-12);
  EXPECT_NEAR(m.f1, 2.0 / 3, 1e-12);
  // Class 1 never predicted: its precision counts as 0.
  const auto never = macro_prf(matrix({{3, 0}, {2, 0}}));
  EXPECT_NEAR(never.precision, 0.5 * (3.0 / 5), 1e-12);
  EXPECT_NEAR(never.recall, 0.5, 1e-12);
}

TEST(Mcc, Examples) {
  EXPECT_DOUBLE_EQ(mcc_multiclass(matrix({{5, 0}, {0, 5}})), 1.0);
  EXPECT_EQ(mcc_multiclass(matrix({{5, 0}, {5, 0}})), 0.0);
  EXPECT_NEAR(mcc_multiclass(matrix({{2, 1}, {1, 2}})), 1.0 / 3, 1e-12);
  EXPECT_EQ(mcc_multiclass(matrix({{0, 0}, {0, 0}})), 0.0);
}

TEST(Mcc, MatchesOraclesOnRandomMatrices) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 2 + trial % 3;
    const auto cm = random_matrix(rng, k, 50);
    const double m = mcc_multiclass(cm);
    EXPECT_NEAR(m, oracle::mcc_from_instances(cm), 1e-12);
    EXPECT_NEAR(m, oracle::mcc_covariance(cm), 1e-12);
    EXPECT_GE(m, -1.0 - 1e-12);
    EXPECT_LE(m, 1.0 + 1e-12);
    if (k == 2) {
      EXPECT_NEAR(m, oracle::binary_mcc(cm.counts(0, 0), cm.counts(0, 1), cm.counts(1, 0), cm.counts(1, 1)), 1e-12);
    }
  }
}

TEST(Mcc, LargeCountsDoNotOverflow) {
  const auto cm = matrix({{4000000000LL, 10}, {20, 3000000000LL}});
  EXPECT_NEAR(mcc_multiclass(cm), oracle::binary_mcc(4000000000LL, 10, 20, 3000000000LL), 1e-12);
}

TEST(Metrics, InvariantUnderClassPermutation) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cm = random_matrix(rng, 4, 40);
    std::vector<int> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    ConfusionMatrix p = cm;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) p.counts(perm[i], perm[j]) = cm.counts(i, j);
    }
    EXPECT_NEAR(mcc_multiclass(p), mcc_multiclass(cm), 1e-12);
    const auto a = macro_prf(cm), b = macro_prf(p);
    EXPECT_NEAR(a.precision, b.precision, 1e-12);
    EXPECT_NEAR(a.recall, b.recall, 1e-12);
    EXPECT_NEAR(a.f1, b.f1, 1e-12);
  }
}
