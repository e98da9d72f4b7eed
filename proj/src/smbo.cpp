#include "trajclass/smbo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "trajclass/error.hpp"
#include "trajclass/stats.hpp"

namespace trajclass {

void Budget::validate() const {
  if (!max_evals && !wallclock_seconds) {
    throw Error(ErrorKind::Argument, "budget needs max_evals or wallclock_seconds");
  }
  if (max_evals && *max_evals < 1) throw Error(ErrorKind::Argument, "max_evals must be >= 1");
  if (wallclock_seconds && !(*wallclock_seconds > 0)) {
    throw Error(ErrorKind::Argument, "wallclock budget must be > 0");
  }
}

namespace {

constexpr int kSurrogateMaxDepth = 20;
constexpr int kSurrogateMinSplit = 3;

class RegressionTreeBuilder {
 public:
  RegressionTreeBuilder(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                        int max_features, Rng& rng)
      : X_(X), y_(y), max_features_(max_features), rng_(rng),
        features_(X.empty() ? 0 : X.front().size()) {
    std::iota(features_.begin(), features_.end(), 0);
  }

  template <typename Node>
  void build(std::vector<int> samples, std::vector<Node>& nodes) {
    samples_ = std::move(samples);
    grow(0, samples_.size(), 0, nodes);
  }

 private:
  template <typename Node>
  int grow(std::size_t begin, std::size_t end, int depth, std::vector<Node>& nodes) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    double sum = 0;
    for (std::size_t i = begin; i < end; ++i) sum += y_[static_cast<std::size_t>(samples_[i])];
    const auto n = static_cast<double>(end - begin);
    nodes[static_cast<std::size_t>(id)].value = sum / n;
    if (depth >= kSurrogateMaxDepth || end - begin < static_cast<std::size_t>(kSurrogateMinSplit)) {
      return id;
    }

    std::shuffle(features_.begin(), features_.end(), rng_);
    int best_feature = -1;
    double best_threshold = 0;
    double best_sse = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> column(end - begin);
    for (int fi = 0; fi < max_features_; ++fi) {
      const auto f = features_[static_cast<std::size_t>(fi)];
      for (std::size_t i = begin; i < end; ++i) {
        const auto s = static_cast<std::size_t>(samples_[i]);
        column[i - begin] = {X_[s][f], y_[s]};
      }
      std::sort(column.begin(), column.end());
      double left_sum = 0, left_sq = 0, total_sq = 0;
      for (const auto& c : column) total_sq += c.second * c.second;
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        left_sum += column[k].second;
        left_sq += column[k].second * column[k].second;
        if (!(column[k].first < column[k + 1].first)) continue;
        const auto nl = static_cast<double>(k + 1);
        const double nr = n - nl;
        const double right_sum = sum - left_sum;
        const double sse = (left_sq - left_sum * left_sum / nl) +
                           ((total_sq - left_sq) - right_sum * right_sum / nr);
        if (sse < best_sse) {
          best_sse = sse;
          best_feature = static_cast<int>(f);
          best_threshold = column[k].first + (column[k + 1].first - column[k].first) / 2;
        }
      }
    }
    if (best_feature < 0) return id;
    auto mid = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                              samples_.begin() + static_cast<std::ptrdiff_t>(end), [&](int s) {
                                return X_[static_cast<std::size_t>(s)][static_cast<std::size_t>(best_feature)] <= best_threshold;
                              });
    const auto cut = static_cast<std::size_t>(mid - samples_.begin());
    const int left = grow(begin, cut, depth + 1, nodes);
    const int right = grow(cut, end, depth + 1, nodes);
    auto& node = nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const std::vector<std::vector<double>>& X_;
  const std::vector<double>& y_;
  int max_features_;
  Rng& rng_;
  std::vector<std::size_t> features_;
  std::vector<int> samples_;
};

}  // namespace

ForestSurrogate ForestSurrogate::fit(const std::vector<std::vector<double>>& X,
                                     const std::vector<double>& y, int n_trees,
                                     std::uint64_t seed) {
  if (X.empty() || X.size() != y.size()) throw Error(ErrorKind::Shape, "surrogate needs data");
  const auto d = static_cast<int>(X.front().size());
  const int max_features = std::max(1, static_cast<int>(std::ceil(d * 5.0 / 6.0)));
  ForestSurrogate forest;
  const auto n = static_cast<int>(X.size());
  for (int t = 0; t < n_trees; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<int> samples(static_cast<std::size_t>(n));
    for (auto& s : samples) s = pick(rng);
    std::vector<Node> nodes;
    RegressionTreeBuilder(X, y, std::min(max_features, d), rng).build(std::move(samples), nodes);
    forest.trees_.push_back(std::move(nodes));
  }
  return forest;
}

ForestSurrogate::Prediction ForestSurrogate::predict(const std::vector<double>& x) const {
  double sum = 0, sq = 0;
  for (const auto& tree : trees_) {
    int at = 0;
    while (tree[static_cast<std::size_t>(at)].feature >= 0) {
      const auto& node = tree[static_cast<std::size_t>(at)];
      at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    const double v = tree[static_cast<std::size_t>(at)].value;
    sum += v;
    sq += v * v;
  }
  const auto k = static_cast<double>(trees_.size());
  const double mean = sum / k;
  return {mean, std::sqrt(std::max(0.0, sq / k - mean * mean))};
}

double expected_improvement(double best, double mean, double stddev) {
  const double gain = best - mean;
  if (!(stddev > 1e-12)) return std::max(0.0, gain);
  const double z = gain / stddev;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return gain * normal_cdf(z) + stddev * pdf;
}

SmboResult smbo_optimize(const ConfigurationSpace& space, const Objective& objective,
                         const Budget& budget, std::uint64_t seed, const SmboOptions& options) {
  budget.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  Rng rng(derive_seed(seed, {1}));
  const std::uint64_t objective_seed = derive_seed(seed, {2});

  int n_initial = options.min_initial;
  if (budget.max_evals) {
    n_initial = std::max(n_initial, static_cast<int>(std::ceil(options.initial_fraction * *budget.max_evals)));
  }

  SmboResult result;
  std::vector<std::vector<double>> encoded;
  std::vector<double> objectives;
  std::set<Configuration> seen;

  auto done = [&] {
    const auto k = static_cast<int>(result.history.size());
    if (budget.max_evals && k >= *budget.max_evals) return true;
    if (budget.wallclock_seconds && k >= 1) {
      return std::chrono::duration<double>(Clock::now() - start).count() >= *budget.wallclock_seconds;
    }
    return false;
  };

  auto run_trial = [&](const Configuration& config) {
    const auto t0 = Clock::now();
    TrialRecord record;
    try {
      record = objective(config, objective_seed);
    } catch (const std::exception& e) {
      record = TrialRecord{};
      record.objective = 1.0;
      record.failed = true;
      record.error = e.what();
    }
    record.config = config;
    record.seed = objective_seed;
    record.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
    encoded.push_back(space.encode(config));
    objectives.push_back(record.objective);
    seen.insert(config);
    if (result.history.empty() || record.objective < result.incumbent_objective) {
      result.incumbent = config;
      result.incumbent_objective = record.objective;
    }
    result.history.push_back(std::move(record));
  };

  constexpr double kLocalScales[] = {0.2, 0.1, 0.05, 0.02};
  while (!done()) {
    const int k = static_cast<int>(result.history.size());
    const bool model_step = options.use_surrogate && k >= n_initial &&
                            (options.interleave_every <= 0 ||
                             (k - n_initial + 1) % options.interleave_every != 0);
    if (!model_step) {
      run_trial(space.sample(rng));
      continue;
    }
    const auto surrogate = ForestSurrogate::fit(encoded, objectives, options.n_trees,
                                                derive_seed(seed, {3, static_cast<std::uint64_t>(k)}));
    std::vector<Configuration> candidates;
    candidates.reserve(static_cast<std::size_t>(options.random_candidates + options.local_candidates));
    for (int i = 0; i < options.random_candidates; ++i) candidates.push_back(space.sample(rng));
    for (int i = 0; i < options.local_candidates; ++i) {
      candidates.push_back(space.neighbor(result.incumbent, rng, kLocalScales[i % 4]));
    }
    const Configuration* best = nullptr;
    const Configuration* best_any = nullptr;
    double best_ei = -1, best_any_ei = -1;
    for (const auto& c : candidates) {
      const auto pred = surrogate.predict(space.encode(c));
      const double ei = expected_improvement(result.incumbent_objective, pred.mean, pred.stddev);
      if (ei > best_any_ei) {
        best_any_ei = ei;
        best_any = &c;
      }
      if (ei > best_ei && !seen.contains(c)) {
        best_ei = ei;
        best = &c;
      }
    }
    run_trial(best != nullptr ? *best : *best_any);
  }
  return result;
}

SmboResult random_search(const ConfigurationSpace& space, const Objective& objective,
                         const Budget& budget, std::uint64_t seed) {
  SmboOptions options;
  options.use_surrogate = false;
  return smbo_optimize(space, objective, budget, seed, options);
}

std::string history_to_csv(const ConfigurationSpace& space, const std::vector<TrialRecord>& history) {
  // Wall time is left out so reruns with an evaluation budget are byte-identical.
  std::string out = "trial,objective,failed,seed,fold_scores";
  for (const auto& p : space.parameters()) out += "," + p.name;
  out += '\n';
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& r = history[i];
    out += std::to_string(i) + ',' + format_double(r.objective) + ',' + (r.failed ? "1" : "0") + ',' + std::to_string(r.seed) + ',';
    for (std::size_t f = 0; f < r.fold_scores.size(); ++f) {
      if (f > 0) out += ';';
      out += format_double(r.fold_scores[f]);
    }
    for (const auto& p : space.parameters()) {
      out += ',';
      if (auto it = r.config.find(p.name); it != r.config.end()) out += format_value(it->second);
    }
    out += '\n';
  }
  return out;
}

}  // namespace trajclass
