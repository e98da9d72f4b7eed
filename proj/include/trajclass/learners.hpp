#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace trajclass {

enum class Criterion { Gini, Entropy };
enum class KernelType { Linear, Poly, Rbf, Sigmoid };

std::string_view to_string(Criterion criterion) noexcept;
std::string_view to_string(KernelType kernel) noexcept;
Criterion parse_criterion(std::string_view text);
KernelType parse_kernel(std::string_view text);

struct DTParams {
  int max_depth{50};
  int min_samples_leaf{1};
  int min_samples_split{2};
  Criterion criterion{Criterion::Gini};

  void validate() const;
  friend bool operator==(const DTParams&, const DTParams&) = default;
};

struct RFParams {
  int n_estimators{100};
  DTParams tree{};

  void validate() const;
  friend bool operator==(const RFParams&, const RFParams&) = default;
};

struct SVMParams {
  double C{1.0};
  KernelType kernel{KernelType::Rbf};

  void validate() const;
  friend bool operator==(const SVMParams&, const SVMParams&) = default;
};

// Impurity of a node from its class counts; entropy in bits.
double impurity(std::span<const int> class_counts, Criterion criterion);

/// Binary CART tree over class indices. Samples with x[feature] <= threshold go left.
class DecisionTree {
 public:
  struct Node {
    int feature{-1};  // -1 marks a leaf
    double threshold{0};
    int left{-1};
    int right{-1};
    int value{0};  // majority class index
  };

  DecisionTree() = default;
  explicit DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  [[nodiscard]] int predict_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] int depth() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&);

 private:
  std::vector<Node> nodes_;
};

bool operator==(const DecisionTree::Node& a, const DecisionTree::Node& b);

class RandomForest {
 public:
  RandomForest() = default;
  explicit RandomForest(std::vector<DecisionTree> trees) : trees_(std::move(trees)) {}

  // Majority vote; ties go to the lowest class index.
  [[nodiscard]] int predict_index(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                                  int n_classes) const;
  [[nodiscard]] const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
};

struct KernelSpec {
  KernelType type{KernelType::Rbf};
  double gamma{1.0};
  int degree{3};
  double coef0{0.0};

  [[nodiscard]] double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                                  const Eigen::Ref<const Eigen::RowVectorXd>& b) const;
};

// Gram matrix K(A_i, B_j).
Eigen::MatrixXd kernel_matrix(const KernelSpec& kernel, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B);

/// One soft-margin machine separating class `positive` (+1) from `negative` (-1).
struct BinarySvm {
  int positive{0};
  int negative{1};
  double C{1.0};
  Eigen::MatrixXd support;       // support vectors, one per row
  Eigen::VectorXd dual_coef;     // alpha_i * y_i
  double rho{0};                 // decision = sum coef_i K(sv_i, x) - rho
  long iterations{0};
};

class SvmModel {
 public:
  SvmModel() = default;
  SvmModel(KernelSpec kernel, std::vector<BinarySvm> machines)
      : kernel_(kernel), machines_(std::move(machines)) {}

  // One-vs-one vote; ties go to the lowest class index.
  [[nodiscard]] int predict_index(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                                  int n_classes) const;
  [[nodiscard]] double decision(const BinarySvm& machine,
                                const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }
  [[nodiscard]] const std::vector<BinarySvm>& machines() const noexcept { return machines_; }

 private:
  KernelSpec kernel_;
  std::vector<BinarySvm> machines_;
};

/// Immutable fitted classifier over integer labels.
class TrainedModel {
 public:
  using Impl = std::variant<DecisionTree, RandomForest, SvmModel>;

  TrainedModel(Impl impl, std::vector<int> classes, int n_features);

  [[nodiscard]] std::vector<int> predict(const Eigen::MatrixXd& X) const;
  [[nodiscard]] const std::vector<int>& classes() const noexcept { return classes_; }
  [[nodiscard]] int n_features() const noexcept { return n_features_; }
  [[nodiscard]] const Impl& impl() const noexcept { return impl_; }

  [[nodiscard]] nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& doc);

 private:
  Impl impl_;
  std::vector<int> classes_;
  int n_features_;
};

inline constexpr int kModelFormatVersion = 1;

TrainedModel dt_train(const Eigen::MatrixXd& X, std::span<const int> y, const DTParams& params,
                      std::uint64_t seed = 0);

// Test hooks; the defaults are the standard forest.
struct RFOptions {
  bool bootstrap{true};
  bool feature_subsampling{true};
};

TrainedModel rf_train(const Eigen::MatrixXd& X, std::span<const int> y, const RFParams& params,
                      std::uint64_t seed, const RFOptions& options = {});

struct SvmTrace {
  int positive{0};
  int negative{1};
  std::vector<double> dual_objective;  // after every SMO step
};

struct SvmOptions {
  double tolerance{1e-3};
  long max_iterations{0};  // 0: max(100000, 100 n)
  std::optional<double> gamma;  // default 1 / (d * var(X))
  int degree{3};
  double coef0{0.0};
  std::function<void(const SvmTrace&)> trace;  // called once per binary machine
};

TrainedModel svm_train(const Eigen::MatrixXd& X, std::span<const int> y, const SVMParams& params,
                       std::uint64_t seed = 0, const SvmOptions& options = {});

inline std::vector<int> predict(const TrainedModel& model, const Eigen::MatrixXd& X) {
  return model.predict(X);
}

}  // namespace trajclass
