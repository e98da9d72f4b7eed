#include "trajclass/features.hpp"

#include <algorithm>
#include <cmath>

#include "trajclass/error.hpp"
#include "trajclass/geo.hpp"

namespace trajclass {

std::vector<Segment> segment(const Trajectory& traj, int parts) {
  if (parts < 1) throw Error(ErrorKind::Argument, "segment count must be >= 1");
  const auto n = traj.size();
  if (static_cast<std::size_t>(parts) > n) {
    throw Error(ErrorKind::Segmentation, "cannot split " + std::to_string(n) + " points into " +
                                             std::to_string(parts) + " segments");
  }
  const auto m = static_cast<std::size_t>(parts);
  const std::size_t base = n / m;
  const std::size_t longer = n % m;
  std::vector<Segment> out;
  out.reserve(m);
  std::size_t start = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t len = base + (i < longer ? 1 : 0);
    out.push_back({traj.points().subspan(start, len), traj.system(), traj.label(), traj.id(),
                   static_cast<int>(i + 1)});
    start += len;
  }
  return out;
}

double geodetic_angle(const TrajPoint& from, const TrajPoint& to, bool signed_angle) {
  double north = haversine(from.c1, 0.0, to.c1, 0.0);
  double east = haversine(0.0, from.c2, 0.0, to.c2);
  if (signed_angle) {
    if (to.c1 < from.c1) north = -north;
    if (to.c2 < from.c2) east = -east;
  }
  return std::atan2(north, east);
}

FeatureStreams point_features(const Segment& seg, const FeatureOptions& options) {
  const auto n = static_cast<Eigen::Index>(seg.points.size());
  if (n < 2) {
    throw Error(ErrorKind::InsufficientPoints,
                "segment " + std::to_string(seg.index) + " of '" + std::string(seg.parent_id) +
                    "' has " + std::to_string(n) + " point(s), need >= 2");
  }
  FeatureStreams s{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  Eigen::VectorXd angle = Eigen::VectorXd::Zero(n);
  const bool geodetic = seg.system == CoordinateSystem::Geodetic;
  for (Eigen::Index r = 1; r < n; ++r) {
    const auto& p = seg.points[static_cast<std::size_t>(r - 1)];
    const auto& q = seg.points[static_cast<std::size_t>(r)];
    const double dt = q.t - p.t;
    if (!(dt > 0)) {
      throw Error(ErrorKind::DivisionByZero, "non-increasing timestamps at record " +
                                                 std::to_string(r + 1) + " of '" +
                                                 std::string(seg.parent_id) + "'");
    }
    if (geodetic) {
      s.v[r] = haversine(p.c1, p.c2, q.c1, q.c2) / dt;
      angle[r] = geodetic_angle(p, q, options.signed_geodetic_angle);
    } else {
      const double dx = q.c1 - p.c1;
      const double dy = q.c2 - p.c2;
      s.v[r] = std::sqrt(dx * dx + dy * dy) / dt;
      angle[r] = std::atan2(dy, dx);
    }
    s.dv[r] = s.v[r] - s.v[r - 1];
    s.da[r] = angle[r] - angle[r - 1];
  }
  return s;
}

const std::array<std::string, kNumFeatures>& feature_names() {
  static const auto names = [] {
    std::array<std::string, kNumFeatures> out;
    const char* streams[] = {"v", "dv", "da"};
    const char* stats[] = {"min", "max", "mean", "median", "std",
                           "p10", "p25", "p50", "p75", "p90"};
    for (int s = 0; s < 3; ++s) {
      for (int k = 0; k < kStatsPerStream; ++k) {
        out[static_cast<std::size_t>(s * kStatsPerStream + k)] =
            std::string(streams[s]) + "_" + stats[k];
      }
    }
    return out;
  }();
  return names;
}

Eigen::Matrix<double, kStatsPerStream, 1> stream_statistics(const Eigen::VectorXd& stream) {
  if (stream.size() == 0) throw Error(ErrorKind::Feature, "empty feature stream");
  if (!stream.allFinite()) throw Error(ErrorKind::Feature, "non-finite value in feature stream");
  std::vector<double> sorted(stream.data(), stream.data() + stream.size());
  std::sort(sorted.begin(), sorted.end());
  const std::span<const double> view(sorted);
  const double mean = stream.mean();
  const double var = (stream.array() - mean).square().mean();
  Eigen::Matrix<double, kStatsPerStream, 1> out;
  out << sorted.front(), sorted.back(), mean, percentile_sorted(view, 50.0), std::sqrt(var),
      percentile_sorted(view, 10.0), percentile_sorted(view, 25.0),
      percentile_sorted(view, 50.0), percentile_sorted(view, 75.0),
      percentile_sorted(view, 90.0);
  return out;
}

FeatureInstance instance_vector(const FeatureStreams& streams, PatternLabel label,
                                std::string parent_id) {
  FeatureInstance inst;
  inst.values << stream_statistics(streams.v), stream_statistics(streams.dv),
      stream_statistics(streams.da);
  inst.label = label;
  inst.parent_id = std::move(parent_id);
  return inst;
}

InstanceSet stack_instances(const std::vector<FeatureInstance>& instances) {
  InstanceSet set;
  set.X.resize(static_cast<Eigen::Index>(instances.size()), kNumFeatures);
  set.y.reserve(instances.size());
  set.parent_ids.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    set.X.row(static_cast<Eigen::Index>(i)) = instances[i].values.transpose();
    set.y.push_back(static_cast<int>(instances[i].label));
    set.parent_ids.push_back(instances[i].parent_id);
  }
  return set;
}

std::string to_feature_csv(const InstanceSet& set) {
  std::string out;
  for (const auto& name : feature_names()) {
    out += name;
    out += ',';
  }
  out += "label,parent_id\n";
  for (Eigen::Index i = 0; i < set.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < set.X.cols(); ++j) {
      out += format_double(set.X(i, j));
      out += ',';
    }
    out += to_string(static_cast<PatternLabel>(set.y[static_cast<std::size_t>(i)]));
    out += ',';
    out += set.parent_ids[static_cast<std::size_t>(i)];
    out += '\n';
  }
  return out;
}

MinMaxScaler MinMaxScaler::fit(const Eigen::MatrixXd& train) {
  if (train.rows() == 0) throw Error(ErrorKind::Shape, "cannot fit scaler on an empty matrix");
  MinMaxScaler s;
  s.min_ = train.colwise().minCoeff();
  s.max_ = train.colwise().maxCoeff();
  return s;
}

Eigen::MatrixXd MinMaxScaler::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != min_.size()) {
    throw Error(ErrorKind::Shape, "scaler fitted on " + std::to_string(min_.size()) +
                                      " columns, got " + std::to_string(X.cols()));
  }
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double range = max_[j] - min_[j];
    if (range > 0) {
      out.col(j) = (X.col(j).array() - min_[j]) / range;
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

}  // namespace trajclass
