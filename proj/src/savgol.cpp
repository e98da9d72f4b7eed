#include "trajclass/savgol.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <tuple>

namespace trajclass {

SavGolParams SavGolParams::repaired(int window_length, int polyorder) {
  return {window_length, std::min(polyorder, window_length - 1)};
}

void SavGolParams::validate() const {
  if (window_length < 1 || window_length % 2 == 0) {
    throw Error(ErrorKind::Parameter,
                "window_length must be odd and >= 1, got " + std::to_string(window_length));
  }
  if (polyorder < 0 || polyorder >= window_length) {
    throw Error(ErrorKind::Parameter, "polyorder " + std::to_string(polyorder) +
                                          " must lie in [0, " + std::to_string(window_length) +
                                          ")");
  }
}

std::string_view to_string(NoisePlacement placement) noexcept {
  switch (placement) {
    case NoisePlacement::None: return "none";
    case NoisePlacement::OnRawLocation: return "raw";
    case NoisePlacement::OnFeatures: return "features";
  }
  return "unknown";
}

NoisePlacement parse_noise_placement(std::string_view text) {
  if (text == "none") return NoisePlacement::None;
  if (text == "raw") return NoisePlacement::OnRawLocation;
  if (text == "features") return NoisePlacement::OnFeatures;
  throw Error(ErrorKind::Argument, "unknown noise placement '" + std::string(text) + "'");
}

const Eigen::VectorXd& cached_savgol_weights(int window_length, int polyorder, int offset) {
  using Key = std::tuple<int, int, int>;
  static std::shared_mutex mutex;
  static std::map<Key, std::unique_ptr<const Eigen::VectorXd>> cache;
  const Key key{window_length, polyorder, offset};
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return *it->second;
  }
  auto weights = std::make_unique<const Eigen::VectorXd>(
      savgol_weights<double>(window_length, polyorder, offset));
  std::unique_lock lock(mutex);
  auto [it, inserted] = cache.try_emplace(key, std::move(weights));
  return *it->second;
}

Eigen::VectorXd savgol_filter(const Eigen::Ref<const Eigen::VectorXd>& series,
                              const SavGolParams& params) {
  params.validate();
  const Eigen::Index n = series.size();
  if (n < 1) throw Error(ErrorKind::Filter, "cannot filter an empty series");
  if (!series.allFinite()) throw Error(ErrorKind::Filter, "non-finite value in series");

  int window = params.window_length;
  int order = params.polyorder;
  if (window > n) {
    window = static_cast<int>(n % 2 == 1 ? n : n - 1);
    order = std::min(order, window - 1);
  }
  if (window == 1) return series;

  const int half = (window - 1) / 2;
  Eigen::VectorXd out(n);
  const auto& center = cached_savgol_weights(window, order, 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i < half) {
      const auto& w = cached_savgol_weights(window, order, static_cast<int>(i) - half);
      out[i] = w.dot(series.head(window));
    } else if (i >= n - half) {
      const auto offset = static_cast<int>(i - (n - 1 - half));
      const auto& w = cached_savgol_weights(window, order, offset);
      out[i] = w.dot(series.tail(window));
    } else {
      out[i] = center.dot(series.segment(i - half, window));
    }
  }
  return out;
}

Trajectory apply_placement(const Trajectory& traj, NoisePlacement placement,
                           const SavGolParams& params) {
  if (placement == NoisePlacement::None) return traj;
  if (placement != NoisePlacement::OnRawLocation) {
    throw Error(ErrorKind::Usage, "feature-stream placement applied to a trajectory");
  }
  const auto n = static_cast<Eigen::Index>(traj.size());
  Eigen::VectorXd c1(n), c2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c1[i] = traj.points()[static_cast<std::size_t>(i)].c1;
    c2[i] = traj.points()[static_cast<std::size_t>(i)].c2;
  }
  const Eigen::VectorXd f1 = savgol_filter(c1, params);
  const Eigen::VectorXd f2 = savgol_filter(c2, params);
  std::vector<TrajPoint> points(traj.points().begin(), traj.points().end());
  for (Eigen::Index i = 0; i < n; ++i) {
    points[static_cast<std::size_t>(i)].c1 = f1[i];
    points[static_cast<std::size_t>(i)].c2 = f2[i];
  }
  return traj.with_points(std::move(points));
}

FeatureStreams apply_placement(const FeatureStreams& streams, NoisePlacement placement,
                               const SavGolParams& params) {
  if (placement == NoisePlacement::None) return streams;
  if (placement != NoisePlacement::OnFeatures) {
    throw Error(ErrorKind::Usage, "raw-location placement applied to feature streams");
  }
  return {savgol_filter(streams.v, params), savgol_filter(streams.dv, params),
          savgol_filter(streams.da, params)};
}

PlacementInput apply_placement(const PlacementInput& input, NoisePlacement placement,
                               const SavGolParams& params) {
  return std::visit(
      [&](const auto& value) -> PlacementInput { return apply_placement(value, placement, params); },
      input);
}

}  // namespace trajclass
