#include <algorithm>
#include <cmath>
#include <limits>

#include "learner_detail.hpp"
#include "trajclass/error.hpp"
#include "trajclass/learners.hpp"

namespace trajclass {

std::string_view to_string(KernelType kernel) noexcept {
  switch (kernel) {
    case KernelType::Linear: return "linear";
    case KernelType::Poly: return "poly";
    case KernelType::Rbf: return "rbf";
    case KernelType::Sigmoid: return "sigmoid";
  }
  return "unknown";
}

KernelType parse_kernel(std::string_view text) {
  if (text == "linear") return KernelType::Linear;
  if (text == "poly") return KernelType::Poly;
  if (text == "rbf") return KernelType::Rbf;
  if (text == "sigmoid") return KernelType::Sigmoid;
  throw Error(ErrorKind::Argument, "unknown kernel '" + std::string(text) + "'");
}

void SVMParams::validate() const {
  if (!(C > 0) || !std::isfinite(C)) throw Error(ErrorKind::Parameter, "C must be > 0");
}

double KernelSpec::operator()(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                              const Eigen::Ref<const Eigen::RowVectorXd>& b) const {
  switch (type) {
    case KernelType::Linear: return a.dot(b);
    case KernelType::Poly: return std::pow(gamma * a.dot(b) + coef0, degree);
    case KernelType::Rbf: return std::exp(-gamma * (a - b).squaredNorm());
    case KernelType::Sigmoid: return std::tanh(gamma * a.dot(b) + coef0);
  }
  return 0.0;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& kernel, const Eigen::MatrixXd& A,
                              const Eigen::MatrixXd& B) {
  Eigen::MatrixXd dots = A * B.transpose();
  switch (kernel.type) {
    case KernelType::Linear: return dots;
    case KernelType::Poly:
      return (kernel.gamma * dots.array() + kernel.coef0).pow(kernel.degree).matrix();
    case KernelType::Sigmoid: return (kernel.gamma * dots.array() + kernel.coef0).tanh().matrix();
    case KernelType::Rbf: {
      const Eigen::VectorXd na = A.rowwise().squaredNorm();
      const Eigen::RowVectorXd nb = B.rowwise().squaredNorm().transpose();
      Eigen::MatrixXd d2 = (-2.0 * dots).colwise() + na;
      d2.rowwise() += nb;
      return (-kernel.gamma * d2.array().max(0.0)).exp().matrix();
    }
  }
  return dots;
}

double SvmModel::decision(const BinarySvm& machine,
                          const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  double sum = 0;
  for (Eigen::Index i = 0; i < machine.support.rows(); ++i) {
    sum += machine.dual_coef[i] * kernel_(machine.support.row(i), row);
  }
  return sum - machine.rho;
}

int SvmModel::predict_index(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                            int n_classes) const {
  std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
  for (const auto& m : machines_) {
    ++votes[static_cast<std::size_t>(decision(m, row) > 0 ? m.positive : m.negative)];
  }
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

namespace {

constexpr double kTau = 1e-12;

struct SmoResult {
  Eigen::VectorXd alpha;
  double rho{0};
  long iterations{0};
};

// Dual of the soft-margin SVM, min 1/2 a^T Q a - e^T a s.t. y^T a = 0, 0 <= a <= C,
// solved by SMO with second-order working-set selection.
SmoResult solve_smo(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C,
                    double tolerance, long max_iterations, SvmTrace* trace) {
  const Eigen::Index n = y.size();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
  auto q = [&](Eigen::Index i, Eigen::Index j) { return y[i] * y[j] * K(i, j); };
  auto is_up = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0); };
  auto is_low = [&](Eigen::Index t) { return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C); };

  long iter = 0;
  for (;;) {
    double gmax = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (is_up(t) && -y[t] * grad[t] >= gmax) {
        if (-y[t] * grad[t] > gmax || i < 0) {
          gmax = -y[t] * grad[t];
          i = t;
        }
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best_obj = std::numeric_limits<double>::infinity();
    if (i >= 0) {
      for (Eigen::Index t = 0; t < n; ++t) {
        if (!is_low(t)) continue;
        gmax2 = std::max(gmax2, y[t] * grad[t]);
        const double b = gmax + y[t] * grad[t];
        if (b > 0) {
          double a = K(i, i) + K(t, t) - 2.0 * K(i, t);
          if (a <= 0) a = kTau;
          const double obj = -(b * b) / a;
          if (obj < best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < tolerance) break;
    if (++iter > max_iterations) {
      throw ConvergenceError(iter - 1, "SMO did not converge within " +
                                           std::to_string(max_iterations) + " iterations");
    }

    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = K(i, i) + K(j, j) + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (Eigen::Index t = 0; t < n; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;

    if (trace != nullptr) {
      // Dual objective is -(1/2 a^T Q a - e^T a) = -sum a_t (grad_t - 1) / 2.
      trace->dual_objective.push_back(-0.5 * alpha.dot(grad - Eigen::VectorXd::Ones(n)));
    }
  }

  // Bias from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0;
  int n_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : (ub + lb) / 2;
  return {std::move(alpha), rho, iter};
}

}  // namespace

TrainedModel svm_train(const Eigen::MatrixXd& X, std::span<const int> y, const SVMParams& params,
                       std::uint64_t /*seed*/, const SvmOptions& options) {
  params.validate();
  auto enc = detail::encode_labels(X, y);
  const int k = static_cast<int>(enc.classes.size());
  if (k < 2) throw Error(ErrorKind::Training, "SVM needs at least two classes");

  KernelSpec kernel;
  kernel.type = params.kernel;
  kernel.degree = options.degree;
  kernel.coef0 = options.coef0;
  if (options.gamma) {
    kernel.gamma = *options.gamma;
  } else {
    const double mean = X.mean();
    const double var = (X.array() - mean).square().mean();
    kernel.gamma = var > 0 ? 1.0 / (static_cast<double>(X.cols()) * var) : 1.0;
  }

  const Eigen::MatrixXd gram = kernel_matrix(kernel, X, X);
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < enc.index.size(); ++r) {
    members[static_cast<std::size_t>(enc.index[r])].push_back(static_cast<Eigen::Index>(r));
  }

  std::vector<BinarySvm> machines;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      const auto& pa = members[static_cast<std::size_t>(a)];
      const auto& pb = members[static_cast<std::size_t>(b)];
      std::vector<Eigen::Index> rows(pa);
      rows.insert(rows.end(), pb.begin(), pb.end());
      const auto n = static_cast<Eigen::Index>(rows.size());
      Eigen::VectorXd ys(n);
      for (Eigen::Index i = 0; i < n; ++i) ys[i] = i < static_cast<Eigen::Index>(pa.size()) ? 1.0 : -1.0;
      const Eigen::MatrixXd K = gram(rows, rows);
      const long max_iter =
          options.max_iterations > 0 ? options.max_iterations : std::max<long>(100000, 100 * n);

      SvmTrace trace{a, b, {}};
      auto result = solve_smo(K, ys, params.C, options.tolerance, max_iter,
                              options.trace ? &trace : nullptr);
      if (options.trace) options.trace(trace);

      BinarySvm m;
      m.positive = a;
      m.negative = b;
      m.C = params.C;
      m.rho = result.rho;
      m.iterations = result.iterations;
      std::vector<Eigen::Index> sv;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (result.alpha[i] > 0) sv.push_back(i);
      }
      m.support.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
      m.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
      for (std::size_t s = 0; s < sv.size(); ++s) {
        const auto i = sv[s];
        m.support.row(static_cast<Eigen::Index>(s)) = X.row(rows[static_cast<std::size_t>(i)]);
        m.dual_coef[static_cast<Eigen::Index>(s)] = result.alpha[i] * ys[i];
      }
      machines.push_back(std::move(m));
    }
  }
  return TrainedModel(SvmModel(kernel, std::move(machines)), std::move(enc.classes),
                      static_cast<int>(X.cols()));
}

}  // namespace trajclass
