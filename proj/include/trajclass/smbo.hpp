#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trajclass/config_space.hpp"
#include "trajclass/pipeline.hpp"

namespace trajclass {

struct Budget {
  std::optional<int> max_evals;
  std::optional<double> wallclock_seconds;

  static Budget evals(int n) { return {n, std::nullopt}; }
  static Budget wallclock(double seconds) { return {std::nullopt, seconds}; }
  void validate() const;
};

/// Scores one configuration. Only `objective` and `fold_scores` of the
/// returned record are used; the optimizer fills in the rest. Exceptions are
/// recorded as failed trials with objective 1.0.
using Objective = std::function<TrialRecord(const Configuration&, std::uint64_t seed)>;

struct SmboOptions {
  bool use_surrogate{true};
  int n_trees{10};
  int random_candidates{500};
  int local_candidates{100};
  // Every n-th model-based proposal is replaced by a uniformly random one.
  int interleave_every{4};
  int min_initial{5};
  double initial_fraction{0.1};
};

struct SmboResult {
  Configuration incumbent;
  double incumbent_objective{1.0};
  std::vector<TrialRecord> history;
};

/// Random-forest regression surrogate over encoded configurations; the
/// spread of per-tree predictions gives the uncertainty for expected improvement.
class ForestSurrogate {
 public:
  struct Prediction {
    double mean{0};
    double stddev{0};
  };

  static ForestSurrogate fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                             int n_trees, std::uint64_t seed);
  [[nodiscard]] Prediction predict(const std::vector<double>& x) const;

 private:
  struct Node {
    int feature{-1};
    double threshold{0};
    int left{-1};
    int right{-1};
    double value{0};
  };
  std::vector<std::vector<Node>> trees_;
};

double expected_improvement(double best, double mean, double stddev);

SmboResult smbo_optimize(const ConfigurationSpace& space, const Objective& objective,
                         const Budget& budget, std::uint64_t seed, const SmboOptions& options = {});

// Same loop with the surrogate disabled.
SmboResult random_search(const ConfigurationSpace& space, const Objective& objective,
                         const Budget& budget, std::uint64_t seed);

// One trial per row: trial, objective, failed, seed, fold scores, then every parameter.
std::string history_to_csv(const ConfigurationSpace& space, const std::vector<TrialRecord>& history);

}  // namespace trajclass
