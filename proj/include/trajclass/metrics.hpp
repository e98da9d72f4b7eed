#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace trajclass {

/// Rows are true classes, columns predicted classes, both in `classes` order.
struct ConfusionMatrix {
  Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::vector<int> classes;

  [[nodiscard]] long long total() const { return counts.sum(); }
  [[nodiscard]] long long correct() const { return counts.trace(); }
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          std::span<const int> classes);

struct MacroScores {
  double precision{0};
  double recall{0};
  double f1{0};
};

// Unweighted means over all classes; empty denominators contribute 0.
MacroScores macro_prf(const ConfusionMatrix& cm);

/// Multiclass Matthews correlation,
///   (c*s - sum p_k b_k) / sqrt((s^2 - sum p_k^2)(s^2 - sum b_k^2)),
/// with 0 when either factor under the root vanishes.
double mcc_multiclass(const ConfusionMatrix& cm);

}  // namespace trajclass
