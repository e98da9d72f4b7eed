#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajclass/config_space.hpp"
#include "trajclass/features.hpp"
#include "trajclass/learners.hpp"
#include "trajclass/savgol.hpp"
#include "trajclass/trajectory.hpp"

namespace trajclass {

enum class ClassifierKind { DT, RF, SVM };

std::string_view to_string(ClassifierKind kind) noexcept;
ClassifierKind parse_classifier(std::string_view text);

/// One noise placement combined with one classifier; the remaining
/// hyperparameters are left to the optimizer.
struct PipelineFamily {
  NoisePlacement placement{NoisePlacement::None};
  ClassifierKind classifier{ClassifierKind::RF};

  // e.g. "rf+raw-noise", "svm+no-noise", "dt+feature-noise".
  [[nodiscard]] std::string name() const;
  static PipelineFamily parse(std::string_view name);
  static std::vector<PipelineFamily> all();

  friend bool operator==(const PipelineFamily&, const PipelineFamily&) = default;
};

/// Concrete assignment of every active pipeline hyperparameter.
struct PipelineConfig {
  int split{1};
  NoisePlacement placement{NoisePlacement::None};
  std::optional<SavGolParams> savgol;  // present iff placement != None, already repaired
  ClassifierKind classifier{ClassifierKind::RF};
  std::variant<DTParams, RFParams, SVMParams> params{RFParams{}};

  // Repairs polyorder >= window_length; throws ValidationError on bad values.
  static PipelineConfig from_configuration(const Configuration& config);
  [[nodiscard]] Configuration to_configuration() const;
  [[nodiscard]] PipelineFamily family() const { return {placement, classifier}; }

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Hyperparameter space of the whole framework: split, noise placement,
/// Savitzky-Golay window/order, classifier and each classifier's parameters.
ConfigurationSpace pipeline_space();

// Same space with placement and classifier pinned to the family.
ConfigurationSpace family_space(const PipelineFamily& family);

PipelineConfig sample_config(const ConfigurationSpace& space, Rng& rng);

/// Segments every trajectory into `config.split` instances and extracts
/// their feature vectors, applying the configured noise placement.
InstanceSet build_instances(std::span<const Trajectory> trajectories, const PipelineConfig& config,
                            const FeatureOptions& options = {});

TrainedModel train_classifier(const PipelineConfig& config, const Eigen::MatrixXd& X,
                              std::span<const int> y, std::uint64_t seed);

struct ScoreTuple {
  double precision{0};
  double recall{0};
  double f1{0};
  double mcc{0};
  bool failed{false};
  std::string error;

  friend bool operator==(const ScoreTuple&, const ScoreTuple&) = default;
};

ScoreTuple score_predictions(std::span<const int> y_true, std::span<const int> y_pred);

// Parent ids seen while training and while scoring, for leakage audits.
struct LeakageAudit {
  std::string stage;  // "cv-fold" or "final"
  std::vector<std::string> train_parents;
  std::vector<std::string> eval_parents;
};
using AuditHook = std::function<void(const LeakageAudit&)>;

/// Trains on all of `train` and scores on `test` (scaler fitted on train).
ScoreTuple evaluate_config(const PipelineConfig& config, std::span<const Trajectory> train,
                           std::span<const Trajectory> test, std::uint64_t seed,
                           const AuditHook& audit = {});

// Fold index per instance; round-robin within each shuffled class.
std::vector<int> stratified_folds(std::span<const int> y, int folds, std::uint64_t seed);

struct TrialRecord {
  Configuration config;
  double objective{1.0};  // 1 - mean fold MCC
  double wall_time{0};
  std::vector<double> fold_scores;
  std::uint64_t seed{0};
  bool failed{false};
  std::string error;
};

struct CvOptions {
  int folds{10};
  FeatureOptions features{};
  AuditHook audit;
};

/// Stratified k-fold objective over a fixed training set. Feature matrices
/// are memoized per (split, placement, window, order), so repeated
/// evaluations only pay for scaling and training. Thread-safe.
class CvObjective {
 public:
  CvObjective(std::vector<Trajectory> train, CvOptions options = {});

  [[nodiscard]] TrialRecord operator()(const PipelineConfig& config, std::uint64_t seed) const;
  [[nodiscard]] std::span<const Trajectory> train() const noexcept { return train_; }

 private:
  std::shared_ptr<const InstanceSet> instances(const PipelineConfig& config) const;

  std::vector<Trajectory> train_;
  CvOptions options_;
  mutable std::mutex mutex_;
  mutable std::map<std::tuple<int, int, int, int>, std::shared_ptr<const InstanceSet>> cache_;
};

TrialRecord cv_objective(const PipelineConfig& config, std::span<const Trajectory> train,
                         std::uint64_t seed, const CvOptions& options = {});

nlohmann::json to_json(const PipelineConfig& config);

}  // namespace trajclass
