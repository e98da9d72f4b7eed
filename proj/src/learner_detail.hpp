#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "trajclass/learners.hpp"
#include "trajclass/random.hpp"

namespace trajclass::detail {

struct LabelEncoding {
  std::vector<int> classes;  // sorted unique labels
  std::vector<int> index;    // per-row position in `classes`
};

LabelEncoding encode_labels(const Eigen::MatrixXd& X, std::span<const int> y);

// max_features >= X.cols() or rng == nullptr scans every feature at every node.
DecisionTree build_tree(const Eigen::MatrixXd& X, std::span<const int> y_index, int n_classes,
                        const DTParams& params, std::vector<int> samples, int max_features,
                        Rng* rng);

}  // namespace trajclass::detail
