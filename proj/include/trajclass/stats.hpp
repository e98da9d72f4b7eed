#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace trajclass {

enum class TestMethod { Exact, NormalApproximation, CriticalValue };

std::string_view to_string(TestMethod method) noexcept;

struct TestResult {
  double statistic{0};
  double p_value{1};
  TestMethod method{TestMethod::Exact};
  std::size_t n{0};   // effective size of the (first) sample
  std::size_t n2{0};  // second sample, two-sample tests only
  // +1 when the second sample tends larger, -1 when the first does, 0 otherwise.
  int direction{0};
};

double normal_cdf(double z) noexcept;

// Average ranks (1-based) with ties sharing their mid-rank.
std::vector<double> midranks(std::span<const double> values);

/// Two-sided paired test on a - b. Zero differences are dropped; W is the
/// smaller signed-rank sum. Exact null distribution for up to 12 tie-free
/// differences, otherwise normal approximation with tie and continuity
/// corrections.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

/// Two-sided rank-sum test; U is the smaller of U_a and U_b. Exact for
/// n_a + n_b <= 12 without ties, otherwise corrected normal approximation.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kExactTestLimit = 12;

inline constexpr std::array<double, 5> kAndersonCritical{0.576, 0.656, 0.787, 0.918, 1.092};
inline constexpr std::array<double, 5> kAndersonSignificance{0.15, 0.10, 0.05, 0.025, 0.01};

struct AndersonDarlingResult {
  double a2{0};         // raw statistic
  double statistic{0};  // A*^2 = A^2 (1 + 4/n - 25/n^2)
  double p_lower{0};    // p lies in (p_lower, p_upper]
  double p_upper{1};
  std::size_t n{0};

  [[nodiscard]] bool normal_at(double alpha) const;
  [[nodiscard]] TestResult as_test() const;
};

/// Normality test with mean and variance estimated from the sample.
AndersonDarlingResult anderson_darling_normality(std::span<const double> x);

}  // namespace trajclass
