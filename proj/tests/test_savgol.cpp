#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "trajclass/error.hpp"
#include "trajclass/generator.hpp"
#include "trajclass/savgol.hpp"

using namespace trajclass;

namespace {

// Weights from the normal equations on integer abscissae, solved by Gaussian
// elimination in long double: w_i = sum_j A_ij c_j with (A^T A) c = a(offset).
std::vector<long double> normal_equation_weights(int window, int order, int offset) {
  const int half = (window - 1) / 2;
  const int m = order + 1;
  std::vector<std::vector<long double>> ata(static_cast<std::size_t>(m), std::vector<long double>(static_cast<std::size_t>(m + 1), 0));
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      for (int i = -half; i <= half; ++i) ata[r][c] += std::pow(static_cast<long double>(i), r + c);
    }
    ata[r][m] = std::pow(static_cast<long double>(offset), r);
  }
  for (int col = 0; col < m; ++col) {
    int pivot = col;
    for (int r = col + 1; r < m; ++r) {
      if (std::abs(ata[r][col]) > std::abs(ata[pivot][col])) pivot = r;
    }
    std::swap(ata[col], ata[pivot]);
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const long double f = ata[r][col] / ata[col][col];
      for (int c = col; c <= m; ++c) ata[r][c] -= f * ata[col][c];
    }
  }
  std::vector<long double> coef(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) coef[r] = ata[r][m] / ata[r][r];
  std::vector<long double> w(static_cast<std::size_t>(window), 0);
  for (int i = -half; i <= half; ++i) {
    for (int j = 0; j < m; ++j) w[i + half] += coef[j] * std::pow(static_cast<long double>(i), j);
  }
  return w;
}

Eigen::VectorXd polynomial_samples(const std::vector<double>& coef, int n, double x0, double h) {
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const double x = x0 + h * i;
    double y = 0;
    for (auto it = coef.rbegin(); it != coef.rend(); ++it) y = y * x + *it;
    out[i] = y;
  }
  return out;
}

}  // namespace

TEST(SavGolWeights, FiveTwoCentral) {
  const auto w = savgol_weights(5, 2, 0);
  const double expected[] = {-3, 12, 17, 12, -3};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(w[i], expected[i] / 35.0, 1e-12);
}

TEST(SavGolWeights, ThreeOneIsMovingAverage) {
  const auto w = savgol_weights(3, 1, 0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(w[i], 1.0 / 3.0, 1e-12);
}

TEST(SavGolWeights, WindowOneIsIdentity) {
  const auto w = savgol_weights(1, 0, 0);
  ASSERT_EQ(w.size(), 1);
  EXPECT_NEAR(w[0], 1.0, 1e-15);
  const auto p = SavGolParams::repaired(1, 7);
  EXPECT_EQ(p.polyorder, 0);
}

TEST(SavGolWeights, MatchNormalEquationOracle) {
  for (int window = 1; window <= 29; window += 2) {
    for (int order = 0; order < std::min(window, 11); ++order) {
      const int half = (window - 1) / 2;
      for (int offset = -half; offset <= half; offset += std::max(1, half / 2)) {
        const auto w = savgol_weights(window, order, offset);
        const auto oracle = normal_equation_weights(window, order, offset);
        for (int i = 0; i < window; ++i) {
          ASSERT_NEAR(w[i], static_cast<double>(oracle[static_cast<std::size_t>(i)]), 1e-8)
              << window << "/" << order << "@" << offset;
        }
      }
      EXPECT_NEAR(savgol_weights(window, order, 0).sum(), 1.0, 1e-12);
    }
  }
}

TEST(SavGolWeights, InvalidOrderIsParameterError) {
  try {
    (void)savgol_weights(3, 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parameter);
  }
  EXPECT_THROW((SavGolParams{4, 1}.validate()), Error);
  EXPECT_EQ(SavGolParams::repaired(3, 7), (SavGolParams{3, 2}));
}

TEST(SavGolWeights, CachedMatchesDirect) {
  const auto& cached = cached_savgol_weights(9, 3, -2);
  EXPECT_TRUE(cached.isApprox(savgol_weights(9, 3, -2), 1e-15));
  EXPECT_EQ(&cached, &cached_savgol_weights(9, 3, -2));
}

TEST(SavGolFilter, WindowOneIsIdentityAndConstantReproduced) {
  Eigen::VectorXd x(6);
  x << 1, -4, 2.5, 8, 0, 3;
  EXPECT_EQ(savgol_filter(x, {1, 0}), x);
  const Eigen::VectorXd five = Eigen::VectorXd::Constant(5, 5.0);
  EXPECT_TRUE(savgol_filter(five, {3, 1}).isApprox(five, 1e-12));
}

TEST(SavGolFilter, QuadraticReproducedExactly) {
  const auto q = polynomial_samples({1, -3, 2}, 30, 0, 0.5);
  const auto out = savgol_filter(q, {7, 2});
  EXPECT_LT((out - q).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SavGolFilter, PolynomialReproductionRandomCases) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> coef(-2, 2), start(-3, 3), step(0.05, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    const int window = 1 + 2 * static_cast<int>(rng() % 10);
    const int order = static_cast<int>(rng() % static_cast<unsigned>(std::min(window, 6)));
    const int n = window + static_cast<int>(rng() % 30);
    std::vector<double> c(static_cast<std::size_t>(order + 1));
    for (auto& v : c) v = coef(rng);
    const auto y = polynomial_samples(c, n, start(rng), step(rng));
    const auto out = savgol_filter(y, {window, order});
    ASSERT_EQ(out.size(), y.size());
    EXPECT_LT((out - y).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, y.cwiseAbs().maxCoeff()))
        << "window " << window << " order " << order;
  }
}

TEST(SavGolFilter, LinearityRandomCases) {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int window = 1 + 2 * static_cast<int>(rng() % 14);
    const int order = static_cast<int>(rng() % static_cast<unsigned>(std::min(window, 11)));
    const int n = 1 + static_cast<int>(rng() % 60);
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = g(rng);
    }
    const double a = g(rng), b = g(rng);
    const SavGolParams p = SavGolParams::repaired(window, order);
    const Eigen::VectorXd lhs = savgol_filter(a * x + b * y, p);
    const Eigen::VectorXd rhs = a * savgol_filter(x, p) + b * savgol_filter(y, p);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SavGolFilter, ShortSeriesShrinksWindow) {
  Eigen::VectorXd x(4);
  x << 1, 2, 4, 8;
  // Window shrinks to 3 and order to 2: an exact fit through every 3-window.
  const auto out = savgol_filter(x, {29, 10});
  EXPECT_LT((out - x).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::VectorXd one(1);
  one << 3.0;
  EXPECT_EQ(savgol_filter(one, {5, 2})[0], 3.0);
}

TEST(SavGolFilter, NonFiniteIsFilterError) {
  Eigen::VectorXd x(3);
  x << 1, INFINITY, 2;
  try {
    (void)savgol_filter(x, {3, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Filter);
  }
}

TEST(Placement, NoneAndIdentityWindow) {
  const auto t = generate_pattern(PatternLabel::Circling, 30, 1.4, 10, {0.2, 2, 0}, 1);
  EXPECT_EQ(apply_placement(t, NoisePlacement::None, {9, 2}), t);
  EXPECT_EQ(apply_placement(t, NoisePlacement::OnRawLocation, {1, 0}), t);
}

TEST(Placement, RawFilteringKeepsTimestampsAndSmoothsLine) {
  double raw_sum = 0, filtered_sum = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = generate_pattern(PatternLabel::Straight, 60, 1.4, 10, {0.3, 5, 0}, seed);
    const auto f = apply_placement(t, NoisePlacement::OnRawLocation, {9, 2});
    ASSERT_EQ(f.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      ASSERT_EQ(f.points()[i].t, t.points()[i].t);
      raw_sum += std::abs(t.points()[i].c2 - 5.0);
      filtered_sum += std::abs(f.points()[i].c2 - 5.0);
    }
  }
  EXPECT_LT(filtered_sum, raw_sum);
}

TEST(Placement, FeatureStreamsFilteredIndependently) {
  FeatureStreams s;
  s.v = Eigen::VectorXd::LinSpaced(10, 0, 9);
  s.dv = Eigen::VectorXd::Constant(10, 2.0);
  s.da = Eigen::VectorXd::LinSpaced(10, 0, 1).array().square();
  const auto out = apply_placement(s, NoisePlacement::OnFeatures, {5, 2});
  EXPECT_TRUE(out.v.isApprox(s.v, 1e-12));
  EXPECT_TRUE(out.dv.isApprox(s.dv, 1e-12));
  EXPECT_TRUE(out.da.isApprox(s.da, 1e-12));
}

TEST(Placement, KindMismatchIsUsageError) {
  const auto t = generate_pattern(PatternLabel::Circling, 30, 1.4, 10, {0, 1, 0}, 1);
  FeatureStreams s;
  s.v = s.dv = s.da = Eigen::VectorXd::Zero(3);
  for (auto f : {std::function<void()>([&] { (void)apply_placement(t, NoisePlacement::OnFeatures, {3, 1}); }),
                 std::function<void()>([&] { (void)apply_placement(s, NoisePlacement::OnRawLocation, {3, 1}); })}) {
    try {
      f();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Usage);
    }
  }
  const PlacementInput in = t;
  EXPECT_EQ(std::get<Trajectory>(apply_placement(in, NoisePlacement::None, {3, 1})), t);
}
