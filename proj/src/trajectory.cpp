#include "trajclass/trajectory.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "trajclass/error.hpp"

namespace trajclass {

std::string_view to_string(CoordinateSystem system) noexcept {
  return system == CoordinateSystem::Geodetic ? "geodetic" : "planar";
}

std::string_view to_string(PatternLabel label) noexcept {
  switch (label) {
    case PatternLabel::Straight: return "straight";
    case PatternLabel::Circling: return "circling";
    case PatternLabel::SShape: return "s-shape";
    case PatternLabel::UShape: return "u-shape";
  }
  return "unknown";
}

CoordinateSystem parse_coordinate_system(std::string_view text) {
  if (text == "geodetic") return CoordinateSystem::Geodetic;
  if (text == "planar") return CoordinateSystem::Planar;
  throw Error(ErrorKind::Argument, "unknown coordinate system '" + std::string(text) + "'");
}

PatternLabel parse_pattern_label(std::string_view text) {
  for (int k = 0; k < kNumPatterns; ++k) {
    auto label = static_cast<PatternLabel>(k);
    if (text == to_string(label)) return label;
  }
  throw Error(ErrorKind::Label, "unknown pattern label '" + std::string(text) + "'");
}

Trajectory::Trajectory(std::vector<TrajPoint> points, CoordinateSystem system,
                       PatternLabel label, std::string id)
    : points_(std::move(points)), system_(system), label_(label), id_(std::move(id)) {
  if (points_.size() < 2) {
    throw Error(ErrorKind::Size, "trajectory needs at least 2 points, got " +
                                     std::to_string(points_.size()));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.t) || !std::isfinite(p.c1) || !std::isfinite(p.c2)) {
      throw Error(ErrorKind::Argument, "non-finite value at point " + std::to_string(i));
    }
    if (system_ == CoordinateSystem::Geodetic && (std::abs(p.c1) > 90 || std::abs(p.c2) > 180)) {
      throw Error(ErrorKind::Argument, "lat/lon out of range at point " + std::to_string(i));
    }
    if (i > 0 && !(p.t > points_[i - 1].t)) {
      throw Error(ErrorKind::Ordering,
                  "timestamps not strictly increasing at point " + std::to_string(i));
    }
  }
}

Trajectory Trajectory::with_points(std::vector<TrajPoint> points) const {
  return Trajectory(std::move(points), system_, label_, id_);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Trajectory parse_trajectory_csv(std::string_view bytes, CoordinateSystem system,
                                PatternLabel label, std::string id) {
  const std::array<std::string_view, 3> names =
      system == CoordinateSystem::Geodetic ? std::array<std::string_view, 3>{"lat", "lon", "t"}
                                           : std::array<std::string_view, 3>{"x", "y", "t"};
  std::array<int, 3> column{-1, -1, -1};
  std::size_t n_columns = 0;
  std::vector<TrajPoint> points;
  std::size_t line_no = 0;
  bool have_header = false;

  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) eol = bytes.size();
    auto line = trim(bytes.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_fields(line);

    if (!have_header) {
      n_columns = fields.size();
      for (std::size_t j = 0; j < fields.size(); ++j) {
        for (std::size_t k = 0; k < names.size(); ++k) {
          if (fields[j] == names[k]) column[k] = static_cast<int>(j);
        }
      }
      for (std::size_t k = 0; k < names.size(); ++k) {
        if (column[k] < 0) {
          throw ParseError(line_no, "header lacks column '" + std::string(names[k]) + "'");
        }
      }
      have_header = true;
      continue;
    }

    if (fields.size() != n_columns) {
      throw ParseError(line_no, "expected " + std::to_string(n_columns) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    std::array<double, 3> v{};
    for (std::size_t k = 0; k < 3; ++k) {
      auto f = fields[static_cast<std::size_t>(column[k])];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v[k]);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v[k])) {
        throw ParseError(line_no, "non-numeric field '" + std::string(f) + "'");
      }
    }
    points.push_back({v[0], v[1], v[2]});
  }
  if (!have_header) throw ParseError(1, "missing header row");
  if (points.size() < 2) {
    throw Error(ErrorKind::Size,
                "trajectory needs at least 2 rows, got " + std::to_string(points.size()));
  }
  return Trajectory(std::move(points), system, label, std::move(id));
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string to_csv(const Trajectory& traj) {
  std::string out = traj.system() == CoordinateSystem::Geodetic ? "lat,lon,t\n" : "x,y,t\n";
  out.reserve(traj.size() * 48);
  for (const auto& p : traj.points()) {
    out += format_double(p.c1);
    out += ',';
    out += format_double(p.c2);
    out += ',';
    out += format_double(p.t);
    out += '\n';
  }
  return out;
}

void NoiseModel::validate() const {
  if (!(position_sigma >= 0)) throw Error(ErrorKind::Argument, "position_sigma must be >= 0");
  if (!(sample_rate > 0)) throw Error(ErrorKind::Argument, "sample_rate must be > 0");
  if (!(dropout_prob >= 0 && dropout_prob < 1)) {
    throw Error(ErrorKind::Argument, "dropout_prob must lie in [0, 1)");
  }
}

std::string_view to_string(TechPreset preset) noexcept {
  return preset == TechPreset::GnssLike ? "gnss-like" : "uwb-like";
}

TechPreset parse_tech_preset(std::string_view text) {
  if (text == "gnss-like") return TechPreset::GnssLike;
  if (text == "uwb-like") return TechPreset::UwbLike;
  throw Error(ErrorKind::Argument, "unknown technology preset '" + std::string(text) + "'");
}

NoiseModel noise_preset(TechPreset preset) noexcept {
  if (preset == TechPreset::GnssLike) return {2.5, 1.0, 0.0};
  return {0.125, 5.91, 0.0};
}

CoordinateSystem preset_system(TechPreset preset) noexcept {
  return preset == TechPreset::GnssLike ? CoordinateSystem::Geodetic : CoordinateSystem::Planar;
}

}  // namespace trajclass
