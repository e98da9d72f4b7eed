#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "trajclass/trajectory.hpp"

namespace trajclass {

/// Contiguous, non-owning slice of a trajectory. Valid while the parent lives.
struct Segment {
  std::span<const TrajPoint> points;
  CoordinateSystem system{CoordinateSystem::Planar};
  PatternLabel label{PatternLabel::Straight};
  std::string_view parent_id;
  int index{1};  // 1-based
};

/// Splits into exactly `parts` segments; the first size % parts are one point longer.
std::vector<Segment> segment(const Trajectory& traj, int parts);

// Per-record average velocity (m/s), change of velocity and change of angle (rad).
// Record 0 carries zeros in all three streams.
struct FeatureStreams {
  Eigen::VectorXd v;
  Eigen::VectorXd dv;
  Eigen::VectorXd da;

  [[nodiscard]] Eigen::Index size() const noexcept { return v.size(); }
};

struct FeatureOptions {
  // Recover the heading sign from raw coordinate differences for geodetic input.
  bool signed_geodetic_angle{false};
};

/// Geodetic heading between two fixes as atan2 of the haversine lengths of the
/// latitude-only and longitude-only displacements; lies in [0, pi/2] unless signed.
double geodetic_angle(const TrajPoint& from, const TrajPoint& to, bool signed_angle = false);

FeatureStreams point_features(const Segment& seg, const FeatureOptions& options = {});

inline constexpr int kStatsPerStream = 10;
inline constexpr int kNumFeatures = 3 * kStatsPerStream;

using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;

struct FeatureInstance {
  FeatureVector values;
  PatternLabel label{PatternLabel::Straight};
  std::string parent_id;
};

// Column names in vector order: {v,dv,da} x {min,max,mean,median,std,p10,p25,p50,p75,p90}.
const std::array<std::string, kNumFeatures>& feature_names();

/// Linear interpolation between closest ranks of an ascending sample, q in [0, 100].
template <typename Scalar>
Scalar percentile_sorted(std::span<const Scalar> sorted, double q) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q / 100.0;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const Scalar frac = static_cast<Scalar>(h - static_cast<double>(lo));
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// min, max, mean, median, population std, p10, p25, p50, p75, p90.
Eigen::Matrix<double, kStatsPerStream, 1> stream_statistics(const Eigen::VectorXd& stream);

FeatureInstance instance_vector(const FeatureStreams& streams, PatternLabel label = {},
                                std::string parent_id = {});

/// Feature matrix with one row per instance.
struct InstanceSet {
  Eigen::MatrixXd X;
  std::vector<int> y;
  std::vector<std::string> parent_ids;

  [[nodiscard]] Eigen::Index rows() const noexcept { return X.rows(); }
};

InstanceSet stack_instances(const std::vector<FeatureInstance>& instances);

// CSV: 30 named feature columns, then label and parent_id.
std::string to_feature_csv(const InstanceSet& set);

/// Per-column min-max scaling fitted on a training matrix.
class MinMaxScaler {
 public:
  static MinMaxScaler fit(const Eigen::MatrixXd& train);

  // Not clamped: test values outside the training range map outside [0, 1].
  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;

  [[nodiscard]] const Eigen::RowVectorXd& min() const noexcept { return min_; }
  [[nodiscard]] const Eigen::RowVectorXd& max() const noexcept { return max_; }

 private:
  Eigen::RowVectorXd min_;
  Eigen::RowVectorXd max_;
};

inline MinMaxScaler minmax_fit(const Eigen::MatrixXd& train) { return MinMaxScaler::fit(train); }
inline Eigen::MatrixXd minmax_apply(const MinMaxScaler& scaler, const Eigen::MatrixXd& X) {
  return scaler.apply(X);
}

}  // namespace trajclass
