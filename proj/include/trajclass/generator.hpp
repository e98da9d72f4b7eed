#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "trajclass/geo.hpp"
#include "trajclass/trajectory.hpp"

namespace trajclass {

// Sizes of the ideal pattern paths, meters. Defaults fit a 10 m x 10 m arena.
struct PatternGeometry {
  double straight_length{8.0};
  double circle_radius{4.0};
  double s_leg_length{6.0};
  double s_radius{2.0};
  double u_leg_length{6.0};
  double u_radius{3.0};
};

/// Ideal, noise-free path of a pattern, parameterized by arc length.
///
/// Closed paths (Circling) repeat; open paths are walked back and forth.
class PatternPath {
 public:
  struct Line {
    Eigen::Vector2d from;
    Eigen::Vector2d to;
  };
  struct Arc {
    Eigen::Vector2d center;
    double radius;
    double start_angle;
    double sweep;  // signed, radians
  };
  using Piece = std::variant<Line, Arc>;

  PatternPath(std::vector<Piece> pieces, bool closed);

  static PatternPath make(PatternLabel kind, const PatternGeometry& geometry);

  [[nodiscard]] double length() const noexcept { return total_; }
  [[nodiscard]] bool closed() const noexcept { return closed_; }
  [[nodiscard]] const std::vector<Piece>& pieces() const noexcept { return pieces_; }

  // Width/height of the bounding box.
  [[nodiscard]] Eigen::Vector2d footprint() const;

  // Position after walking `s` meters from the start (wraps or reflects).
  [[nodiscard]] Eigen::Vector2d at(double s) const;

  [[nodiscard]] double distance_to(const Eigen::Vector2d& p) const;

  // Moves every piece by `offset`.
  [[nodiscard]] PatternPath translated(const Eigen::Vector2d& offset) const;

 private:
  std::vector<Piece> pieces_;
  std::vector<double> cumulative_;
  double total_{0};
  bool closed_;
};

struct PatternOptions {
  CoordinateSystem system{CoordinateSystem::Planar};
  LocalTangent reference{};
  PatternGeometry geometry{};
  // Randomize start position along the path and walking direction.
  bool random_start{true};
};

/// Synthesizes one labeled trajectory; planar coordinates lie in [0, arena]^2
/// with the pattern centered in the arena.
Trajectory generate_pattern(PatternLabel kind, double duration, double speed, double arena,
                            const NoiseModel& noise, std::uint64_t seed,
                            const PatternOptions& options = {});

// Centered ideal path for a pattern in arena coordinates.
PatternPath arena_path(PatternLabel kind, double arena, const PatternGeometry& geometry = {});

struct DatasetSpec {
  std::array<int, kNumPatterns> counts{19, 25, 30, 30};
  double duration{300.0};
  double speed{1.4};
  // Relative per-trajectory speed jitter, uniform in [-j, j].
  double speed_jitter{0.15};
  double arena{10.0};
  PatternGeometry geometry{};
  LocalTangent reference{};
};

std::vector<Trajectory> generate_dataset(const DatasetSpec& spec, TechPreset preset,
                                         std::uint64_t seed);

// Number of scheduled samples for a duration at a rate.
std::size_t scheduled_samples(double duration, double rate) noexcept;

}  // namespace trajclass
