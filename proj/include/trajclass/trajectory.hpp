#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trajclass {

enum class CoordinateSystem { Geodetic, Planar };
enum class PatternLabel { Straight = 0, Circling = 1, SShape = 2, UShape = 3 };

inline constexpr int kNumPatterns = 4;

std::string_view to_string(CoordinateSystem system) noexcept;
std::string_view to_string(PatternLabel label) noexcept;
CoordinateSystem parse_coordinate_system(std::string_view text);
PatternLabel parse_pattern_label(std::string_view text);

/// One timestamped fix. For geodetic points c1/c2 are latitude/longitude in
/// degrees, for planar points x/y in meters.
struct TrajPoint {
  double c1{0};
  double c2{0};
  double t{0};

  friend bool operator==(const TrajPoint&, const TrajPoint&) = default;
};

/// Immutable, validated point sequence of one moving object.
///
/// Construction checks: at least two points, finite strictly increasing
/// timestamps, and lat/lon ranges for geodetic data.
class Trajectory {
 public:
  Trajectory(std::vector<TrajPoint> points, CoordinateSystem system, PatternLabel label,
             std::string id);

  [[nodiscard]] std::span<const TrajPoint> points() const noexcept { return points_; }
  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] CoordinateSystem system() const noexcept { return system_; }
  [[nodiscard]] PatternLabel label() const noexcept { return label_; }
  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] double duration() const noexcept { return points_.back().t - points_.front().t; }

  // Same metadata, new points (re-validated).
  [[nodiscard]] Trajectory with_points(std::vector<TrajPoint> points) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<TrajPoint> points_;
  CoordinateSystem system_;
  PatternLabel label_;
  std::string id_;
};

// CSV with a header row: "lat,lon,t" for geodetic, "x,y,t" for planar.
Trajectory parse_trajectory_csv(std::string_view bytes, CoordinateSystem system,
                                PatternLabel label = PatternLabel::Straight,
                                std::string id = {});
std::string to_csv(const Trajectory& traj);

// Shortest round-trip decimal representation.
std::string format_double(double value);

struct NoiseModel {
  double position_sigma{0};  // meters
  double sample_rate{1};     // Hz
  double dropout_prob{0};

  void validate() const;
};

enum class TechPreset { GnssLike, UwbLike };

std::string_view to_string(TechPreset preset) noexcept;
TechPreset parse_tech_preset(std::string_view text);

NoiseModel noise_preset(TechPreset preset) noexcept;
CoordinateSystem preset_system(TechPreset preset) noexcept;

}  // namespace trajclass
