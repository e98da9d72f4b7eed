#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajclass/pipeline.hpp"
#include "trajclass/smbo.hpp"
#include "trajclass/stats.hpp"
#include "trajclass/trajectory.hpp"

namespace trajclass {

struct TrainTestSplit {
  std::vector<Trajectory> train;
  std::vector<Trajectory> test;
};

inline constexpr double kTrainFraction = 0.67;

/// Stratified at trajectory level: per class round(fraction * count)
/// trajectories go to training, clamped so both sides keep one.
TrainTestSplit train_test_split(std::span<const Trajectory> dataset, double fraction,
                                std::uint64_t seed);

inline constexpr std::array<std::string_view, 4> kMetricNames{"precision", "recall", "f1", "mcc"};

double metric_value(const ScoreTuple& score, std::size_t metric);

using Optimizer = std::function<SmboResult(const ConfigurationSpace&, const Objective&,
                                           const Budget&, std::uint64_t seed)>;

struct ProtocolOptions {
  int reps{50};
  int runs_per_rep{15};
  int sample_k{5};
  Budget budget{Budget::evals(60)};
  int jobs{0};  // 0 = one worker per available processor
  SmboOptions smbo{};
  CvOptions cv{};
  Optimizer optimizer;  // defaults to smbo_optimize with `smbo`

  void validate() const;
};

struct BootstrapResult {
  std::vector<ScoreTuple> scores;        // one per repetition, in order
  std::vector<Configuration> selected;   // configuration retrained per repetition
  std::vector<double> selected_objective;
};

/// Repeats: optimise `runs_per_rep` times, keep the best of `sample_k`
/// randomly drawn incumbents, retrain it on all of `train` and score it on
/// `test`. Failures become a zero score tuple flagged as failed.
BootstrapResult bootstrap_family(const PipelineFamily& family, std::span<const Trajectory> train,
                                 std::span<const Trajectory> test, const ProtocolOptions& options,
                                 std::uint64_t master_seed);

struct CalibrationRow {
  double wallclock{0};
  double mean_mcc{0};
};

struct CalibrationResult {
  std::vector<CalibrationRow> rows;
  double chosen{0};
};

// Test MCC of one optimisation run under `budget`.
using BudgetScorer = std::function<double(const Budget& budget, std::uint64_t seed)>;

inline constexpr double kPlateauTolerance = 0.01;

CalibrationResult wallclock_calibration(const BudgetScorer& scorer, double step, int runs,
                                        double max_time, std::uint64_t seed);

CalibrationResult wallclock_calibration(const PipelineFamily& family,
                                        std::span<const Trajectory> train,
                                        std::span<const Trajectory> test, double step, int runs,
                                        double max_time, const ProtocolOptions& options,
                                        std::uint64_t seed);

nlohmann::json to_json(const CalibrationResult& result);

struct MetricComparison {
  std::string metric;
  std::optional<AndersonDarlingResult> normality_a;  // empty when degenerate or too small
  std::optional<AndersonDarlingResult> normality_b;
  bool degenerate_a{false};
  bool degenerate_b{false};
  std::optional<TestResult> mann_whitney;  // empty when every value is tied
  bool significant{false};                 // at the requested alpha
  bool significant_99{false};
};

struct TechnologyComparison {
  double alpha{0.05};
  std::vector<MetricComparison> metrics;
};

TechnologyComparison compare_technologies(std::span<const ScoreTuple> a,
                                          std::span<const ScoreTuple> b, double alpha = 0.05);

nlohmann::json to_json(const TechnologyComparison& comparison);
std::string comparison_summary(const TechnologyComparison& comparison, std::string_view label_a,
                               std::string_view label_b);

struct FamilyReport {
  PipelineFamily family;
  std::vector<ScoreTuple> scores;
  std::vector<Configuration> selected;
};

struct EvaluationReport {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<FamilyReport> families;

  [[nodiscard]] const FamilyReport& family(std::string_view name) const;
};

struct MeanStd {
  double mean{0};
  double std{0};  // population
};

MeanStd summarize(std::span<const ScoreTuple> scores, std::size_t metric);

/// Scores, mean/std per metric, normality per metric and pairwise Wilcoxon
/// p-values between families (null when all differences are zero).
nlohmann::json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& doc);
EvaluationReport parse_report(std::string_view text);

// Rows = classifier x placement, columns = metric "mean±std".
std::string report_table(const EvaluationReport& report);

}  // namespace trajclass
