#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "trajclass/error.hpp"
#include "trajclass/features.hpp"
#include "trajclass/trajectory.hpp"

namespace trajclass {

struct SavGolParams {
  int window_length{1};
  int polyorder{0};

  // Clamps polyorder to window_length - 1 so any (window, order) pair is runnable.
  [[nodiscard]] static SavGolParams repaired(int window_length, int polyorder);

  // Odd window >= 1 and 0 <= polyorder < window_length.
  void validate() const;

  friend bool operator==(const SavGolParams&, const SavGolParams&) = default;
};

enum class NoisePlacement { None, OnRawLocation, OnFeatures };

std::string_view to_string(NoisePlacement placement) noexcept;
NoisePlacement parse_noise_placement(std::string_view text);

/// Convolution weights that evaluate, at `offset` samples from the window
/// center, the least-squares polynomial of degree `polyorder` through the
/// window. Abscissae are scaled to [-1, 1] before the QR solve.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> savgol_weights(int window_length, int polyorder,
                                                        int offset) {
  if (window_length < 1 || window_length % 2 == 0) {
    throw Error(ErrorKind::Parameter, "window_length must be odd and >= 1");
  }
  if (polyorder < 0 || polyorder >= window_length) {
    throw Error(ErrorKind::Parameter, "polyorder must lie in [0, window_length)");
  }
  const int half = (window_length - 1) / 2;
  if (offset < -half || offset > half) {
    throw Error(ErrorKind::Parameter, "evaluation offset outside the window");
  }
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int terms = polyorder + 1;
  const Scalar scale = half > 0 ? Scalar(half) : Scalar(1);

  Matrix vandermonde(window_length, terms);
  for (int i = 0; i < window_length; ++i) {
    const Scalar x = Scalar(i - half) / scale;
    Scalar power(1);
    for (int j = 0; j < terms; ++j) {
      vandermonde(i, j) = power;
      power *= x;
    }
  }
  Vector basis(terms);
  const Scalar x0 = Scalar(offset) / scale;
  Scalar power(1);
  for (int j = 0; j < terms; ++j) {
    basis[j] = power;
    power *= x0;
  }
  // Minimum-norm solution of V^T w = e: with V = QR, w = Q R^{-T} e.
  Eigen::HouseholderQR<Matrix> qr(vandermonde);
  const Matrix r = qr.matrixQR().topLeftCorner(terms, terms).template triangularView<Eigen::Upper>();
  const Vector z = r.transpose().template triangularView<Eigen::Lower>().solve(basis);
  const Matrix thin_q = qr.householderQ() * Matrix::Identity(window_length, terms);
  return thin_q * z;
}

// Memoized double-precision weights; safe for concurrent callers.
const Eigen::VectorXd& cached_savgol_weights(int window_length, int polyorder, int offset);

/// Same-length smoothing. Points within half a window of either end use the
/// polynomial of the nearest full window evaluated at their own offset. A
/// series shorter than the window shrinks the window to the largest odd
/// length that fits and clamps the order to match.
Eigen::VectorXd savgol_filter(const Eigen::Ref<const Eigen::VectorXd>& series,
                              const SavGolParams& params);

using PlacementInput = std::variant<Trajectory, FeatureStreams>;

Trajectory apply_placement(const Trajectory& traj, NoisePlacement placement,
                           const SavGolParams& params);
FeatureStreams apply_placement(const FeatureStreams& streams, NoisePlacement placement,
                               const SavGolParams& params);
PlacementInput apply_placement(const PlacementInput& input, NoisePlacement placement,
                               const SavGolParams& params);

}  // namespace trajclass
