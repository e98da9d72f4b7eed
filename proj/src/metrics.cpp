#include "trajclass/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "trajclass/error.hpp"

namespace trajclass {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred,
                          std::span<const int> classes) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorKind::Shape, "y_true and y_pred differ in length");
  }
  const auto k = static_cast<Eigen::Index>(classes.size());
  ConfusionMatrix cm{Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, k),
                     std::vector<int>(classes.begin(), classes.end())};
  auto index_of = [&](int label) {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) {
      throw Error(ErrorKind::Label, "label " + std::to_string(label) + " not in class list");
    }
    return static_cast<Eigen::Index>(it - classes.begin());
  };
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ++cm.counts(index_of(y_true[i]), index_of(y_pred[i]));
  }
  return cm;
}

MacroScores macro_prf(const ConfusionMatrix& cm) {
  const auto k = cm.counts.rows();
  if (k == 0) return {};
  MacroScores m;
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto tp = static_cast<double>(cm.counts(c, c));
    const auto predicted = static_cast<double>(cm.counts.col(c).sum());
    const auto actual = static_cast<double>(cm.counts.row(c).sum());
    const double p = predicted > 0 ? tp / predicted : 0.0;
    const double r = actual > 0 ? tp / actual : 0.0;
    m.precision += p;
    m.recall += r;
    m.f1 += (p + r) > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  const auto kk = static_cast<double>(k);
  m.precision /= kk;
  m.recall /= kk;
  m.f1 /= kk;
  return m;
}

double mcc_multiclass(const ConfusionMatrix& cm) {
  using Wide = long double;
  const Wide s = static_cast<Wide>(cm.total());
  const Wide c = static_cast<Wide>(cm.correct());
  Wide pb = 0, pp = 0, bb = 0;
  for (Eigen::Index k = 0; k < cm.counts.rows(); ++k) {
    const Wide p = static_cast<Wide>(cm.counts.col(k).sum());
    const Wide b = static_cast<Wide>(cm.counts.row(k).sum());
    pb += p * b;
    pp += p * p;
    bb += b * b;
  }
  const Wide f_pred = s * s - pp;
  const Wide f_true = s * s - bb;
  if (f_pred <= 0 || f_true <= 0) return 0.0;
  const Wide mcc = (c * s - pb) / (std::sqrt(f_pred) * std::sqrt(f_true));
  return static_cast<double>(std::clamp<Wide>(mcc, -1, 1));
}

}  // namespace trajclass
