#include "trajclass/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trajclass/error.hpp"

namespace trajclass {

std::string_view to_string(TestMethod method) noexcept {
  switch (method) {
    case TestMethod::Exact: return "exact";
    case TestMethod::NormalApproximation: return "normal-approximation";
    case TestMethod::CriticalValue: return "critical-value";
  }
  return "unknown";
}

double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> midranks(std::span<const double> values) {
  const auto n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

namespace {

// Sum of (t^3 - t) over tie groups.
double tie_term(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double term = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    term += t * t * t - t;
    i = j + 1;
  }
  return term;
}

double two_sided_normal(double statistic, double mean, double var) {
  if (!(var > 0)) throw Error(ErrorKind::DegenerateSample, "zero variance under the null");
  const double z = std::max(0.0, std::abs(statistic - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
}

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

}  // namespace

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::Argument, "paired samples differ in length");
  if (a.empty()) throw Error(ErrorKind::Argument, "empty sample");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0) diffs.push_back(d);
  }
  if (diffs.empty()) throw Error(ErrorKind::DegenerateSample, "all paired differences are zero");

  std::vector<double> mags(diffs.size());
  std::transform(diffs.begin(), diffs.end(), mags.begin(), [](double d) { return std::abs(d); });
  const auto ranks = midranks(mags);
  double w_plus = 0, w_minus = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0 ? w_plus : w_minus) += ranks[i];

  TestResult r;
  r.statistic = std::min(w_plus, w_minus);
  r.n = diffs.size();
  r.direction = sign_of(w_minus - w_plus);
  const double ties = tie_term(mags);
  const auto n = static_cast<double>(r.n);

  if (r.n <= kExactTestLimit && ties == 0) {
    // Count sign assignments by their positive rank sum.
    const int max_sum = static_cast<int>(r.n * (r.n + 1) / 2);
    std::vector<double> count(static_cast<std::size_t>(max_sum) + 1, 0.0);
    count[0] = 1;
    for (int rank = 1; rank <= static_cast<int>(r.n); ++rank) {
      for (int s = max_sum; s >= rank; --s) {
        count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - rank)];
      }
    }
    const auto w = static_cast<int>(std::lround(r.statistic));
    double tail = 0;
    for (int s = 0; s <= w; ++s) tail += count[static_cast<std::size_t>(s)];
    r.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(r.n)));
    r.method = TestMethod::Exact;
    return r;
  }
  const double mean = n * (n + 1) / 4.0;
  const double var = n * (n + 1) * (2 * n + 1) / 24.0 - ties / 48.0;
  r.p_value = two_sided_normal(w_plus, mean, var);
  r.method = TestMethod::NormalApproximation;
  return r;
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::Argument, "empty sample");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  const double u_a = rank_sum_a - na * (na + 1) / 2.0;
  const double u_b = na * nb - u_a;

  TestResult r;
  r.statistic = std::min(u_a, u_b);
  r.n = a.size();
  r.n2 = b.size();
  r.direction = sign_of(u_b - u_a);
  const double ties = tie_term(pooled);
  const std::size_t total = a.size() + b.size();

  if (total <= kExactTestLimit && ties == 0) {
    // count[k][s]: subsets of size k drawn from ranks 1..total with rank sum s.
    const int max_sum = static_cast<int>(total * (total + 1) / 2);
    const auto k_max = a.size();
    std::vector<std::vector<double>> count(k_max + 1,
                                           std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
    count[0][0] = 1;
    for (int rank = 1; rank <= static_cast<int>(total); ++rank) {
      for (std::size_t k = std::min<std::size_t>(k_max, static_cast<std::size_t>(rank)); k >= 1; --k) {
        for (int s = max_sum; s >= rank; --s) {
          count[k][static_cast<std::size_t>(s)] += count[k - 1][static_cast<std::size_t>(s - rank)];
        }
      }
    }
    const double offset = na * (na + 1) / 2.0;
    const auto u_min = static_cast<int>(std::lround(r.statistic));
    double tail = 0, all = 0;
    for (int s = 0; s <= max_sum; ++s) {
      const double c = count[k_max][static_cast<std::size_t>(s)];
      all += c;
      if (s - offset <= u_min) tail += c;
    }
    r.p_value = std::min(1.0, 2.0 * tail / all);
    r.method = TestMethod::Exact;
    return r;
  }
  const double n = na + nb;
  const double var = na * nb / 12.0 * ((n + 1) - ties / (n * (n - 1)));
  r.p_value = two_sided_normal(u_a, na * nb / 2.0, var);
  r.method = TestMethod::NormalApproximation;
  return r;
}

bool AndersonDarlingResult::normal_at(double alpha) const {
  // Normality is retained when p exceeds alpha, i.e. the bracket lies above it.
  return p_lower >= alpha;
}

TestResult AndersonDarlingResult::as_test() const {
  TestResult r;
  r.statistic = statistic;
  r.p_value = p_upper;
  r.method = TestMethod::CriticalValue;
  r.n = n;
  return r;
}

AndersonDarlingResult anderson_darling_normality(std::span<const double> x) {
  if (x.size() < 8) {
    throw Error(ErrorKind::SampleSize, "Anderson-Darling needs n >= 8, got " + std::to_string(x.size()));
  }
  const auto n = static_cast<double>(x.size());
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0;
  for (double v : sorted) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  if (!(sd > 0)) throw Error(ErrorKind::DegenerateSample, "sample has zero variance");

  // log Phi(z) and log(1 - Phi(z)) = log Phi(-z), both from erfc to keep the tails.
  auto log_cdf = [](double z) { return std::log(std::max(normal_cdf(z), 1e-300)); };
  double s = 0;
  const std::size_t m = sorted.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double zi = (sorted[i] - mean) / sd;
    const double zj = (sorted[m - 1 - i] - mean) / sd;
    s += (2.0 * static_cast<double>(i) + 1.0) * (log_cdf(zi) + log_cdf(-zj));
  }
  AndersonDarlingResult r;
  r.n = m;
  r.a2 = -n - s / n;
  r.statistic = r.a2 * (1.0 + 4.0 / n - 25.0 / (n * n));
  r.p_lower = kAndersonSignificance.front();
  r.p_upper = 1.0;
  for (std::size_t k = 0; k < kAndersonCritical.size(); ++k) {
    if (r.statistic >= kAndersonCritical[k]) {
      r.p_upper = kAndersonSignificance[k];
      r.p_lower = k + 1 < kAndersonSignificance.size() ? kAndersonSignificance[k + 1] : 0.0;
    }
  }
  return r;
}

}  // namespace trajclass
