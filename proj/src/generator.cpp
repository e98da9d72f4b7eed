#include "trajclass/generator.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <cmath>
#include <numbers>

#include "trajclass/error.hpp"
#include "trajclass/random.hpp"

namespace trajclass {

namespace {

constexpr double kPi = std::numbers::pi;

double piece_length(const PatternPath::Piece& piece) {
  if (const auto* line = std::get_if<PatternPath::Line>(&piece)) {
    return (line->to - line->from).norm();
  }
  const auto& arc = std::get<PatternPath::Arc>(piece);
  return arc.radius * std::abs(arc.sweep);
}

Eigen::Vector2d piece_at(const PatternPath::Piece& piece, double u) {
  if (const auto* line = std::get_if<PatternPath::Line>(&piece)) {
    const double len = (line->to - line->from).norm();
    const double f = len > 0 ? u / len : 0.0;
    return line->from + f * (line->to - line->from);
  }
  const auto& arc = std::get<PatternPath::Arc>(piece);
  const double theta = arc.start_angle + std::copysign(u / arc.radius, arc.sweep);
  return arc.center + arc.radius * Eigen::Vector2d(std::cos(theta), std::sin(theta));
}

double piece_distance(const PatternPath::Piece& piece, const Eigen::Vector2d& p) {
  if (const auto* line = std::get_if<PatternPath::Line>(&piece)) {
    const Eigen::Vector2d d = line->to - line->from;
    const double len2 = d.squaredNorm();
    double f = len2 > 0 ? (p - line->from).dot(d) / len2 : 0.0;
    f = std::clamp(f, 0.0, 1.0);
    return (p - (line->from + f * d)).norm();
  }
  const auto& arc = std::get<PatternPath::Arc>(piece);
  const Eigen::Vector2d rel = p - arc.center;
  // Angle of p measured from the arc start in the sweep direction, in [0, 2pi).
  double phi = std::atan2(rel.y(), rel.x()) - arc.start_angle;
  if (arc.sweep < 0) phi = -phi;
  phi = std::fmod(phi, 2 * kPi);
  if (phi < 0) phi += 2 * kPi;
  if (phi <= std::abs(arc.sweep)) return std::abs(rel.norm() - arc.radius);
  const Eigen::Vector2d a = piece_at(piece, 0.0);
  const Eigen::Vector2d b = piece_at(piece, piece_length(piece));
  return std::min((p - a).norm(), (p - b).norm());
}

void extend_bounds(const PatternPath::Piece& piece, Eigen::Vector2d& lo, Eigen::Vector2d& hi) {
  auto add = [&](const Eigen::Vector2d& q) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  };
  add(piece_at(piece, 0.0));
  add(piece_at(piece, piece_length(piece)));
  if (const auto* arc = std::get_if<PatternPath::Arc>(&piece)) {
    // Axis-extreme directions swept by the arc.
    for (int k = 0; k < 4; ++k) {
      const double axis = k * kPi / 2;
      double phi = (axis - arc->start_angle) * (arc->sweep < 0 ? -1.0 : 1.0);
      phi = std::fmod(phi, 2 * kPi);
      if (phi < 0) phi += 2 * kPi;
      if (phi <= std::abs(arc->sweep)) {
        add(arc->center + arc->radius * Eigen::Vector2d(std::cos(axis), std::sin(axis)));
      }
    }
  }
}

}  // namespace

PatternPath::PatternPath(std::vector<Piece> pieces, bool closed)
    : pieces_(std::move(pieces)), closed_(closed) {
  if (pieces_.empty()) throw Error(ErrorKind::Geometry, "pattern path has no pieces");
  cumulative_.reserve(pieces_.size());
  for (const auto& piece : pieces_) {
    cumulative_.push_back(total_);
    total_ += piece_length(piece);
  }
  if (!(total_ > 0)) throw Error(ErrorKind::Geometry, "pattern path has zero length");
}

PatternPath PatternPath::make(PatternLabel kind, const PatternGeometry& g) {
  using V = Eigen::Vector2d;
  switch (kind) {
    case PatternLabel::Straight:
      return PatternPath({Line{V(0, 0), V(g.straight_length, 0)}}, false);
    case PatternLabel::Circling: {
      const double r = g.circle_radius;
      return PatternPath({Arc{V(r, r), r, -kPi / 2, 2 * kPi}}, true);
    }
    case PatternLabel::SShape: {
      // Top leg leftwards, turn left, middle leg rightwards, turn right, bottom leg leftwards.
      const double r = g.s_radius;
      const double l = g.s_leg_length;
      return PatternPath({Line{V(r + l, 4 * r), V(r, 4 * r)},
                          Arc{V(r, 3 * r), r, kPi / 2, kPi},
                          Line{V(r, 2 * r), V(r + l, 2 * r)},
                          Arc{V(r + l, r), r, kPi / 2, -kPi},
                          Line{V(r + l, 0), V(r, 0)}},
                         false);
    }
    case PatternLabel::UShape: {
      const double r = g.u_radius;
      const double l = g.u_leg_length;
      return PatternPath({Line{V(0, r + l), V(0, r)},
                          Arc{V(r, r), r, kPi, kPi},
                          Line{V(2 * r, r), V(2 * r, r + l)}},
                         false);
    }
  }
  throw Error(ErrorKind::Argument, "unknown pattern kind");
}

Eigen::Vector2d PatternPath::footprint() const {
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const auto& piece : pieces_) extend_bounds(piece, lo, hi);
  return hi - lo;
}

Eigen::Vector2d PatternPath::at(double s) const {
  double u;
  if (closed_) {
    u = std::fmod(s, total_);
    if (u < 0) u += total_;
  } else {
    u = std::fmod(s, 2 * total_);
    if (u < 0) u += 2 * total_;
    if (u > total_) u = 2 * total_ - u;
  }
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - cumulative_.begin()) - 1));
  return piece_at(pieces_[idx], std::min(u - cumulative_[idx], piece_length(pieces_[idx])));
}

double PatternPath::distance_to(const Eigen::Vector2d& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& piece : pieces_) best = std::min(best, piece_distance(piece, p));
  return best;
}

PatternPath PatternPath::translated(const Eigen::Vector2d& offset) const {
  std::vector<Piece> moved;
  moved.reserve(pieces_.size());
  for (const auto& piece : pieces_) {
    if (const auto* line = std::get_if<Line>(&piece)) {
      moved.emplace_back(Line{line->from + offset, line->to + offset});
    } else {
      auto arc = std::get<Arc>(piece);
      arc.center += offset;
      moved.emplace_back(arc);
    }
  }
  return PatternPath(std::move(moved), closed_);
}

PatternPath arena_path(PatternLabel kind, double arena, const PatternGeometry& geometry) {
  auto path = PatternPath::make(kind, geometry);
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const auto& piece : path.pieces()) extend_bounds(piece, lo, hi);
  const Eigen::Vector2d fp = hi - lo;
  if (fp.maxCoeff() > arena + 1e-12) {
    throw Error(ErrorKind::Geometry, "pattern footprint " + format_double(fp.maxCoeff()) +
                                         " m exceeds arena side " + format_double(arena) + " m");
  }
  const Eigen::Vector2d center = Eigen::Vector2d::Constant(arena / 2);
  return path.translated(center - (lo + hi) / 2);
}

std::size_t scheduled_samples(double duration, double rate) noexcept {
  // Guard against 300 * 5.91 evaluating to 1773.0000000000002.
  return static_cast<std::size_t>(std::ceil(duration * rate - 1e-9));
}

Trajectory generate_pattern(PatternLabel kind, double duration, double speed, double arena,
                            const NoiseModel& noise, std::uint64_t seed,
                            const PatternOptions& options) {
  noise.validate();
  if (!(duration > 0)) throw Error(ErrorKind::Argument, "duration must be > 0");
  if (!(speed > 0)) throw Error(ErrorKind::Argument, "speed must be > 0");
  const auto path = arena_path(kind, arena, options.geometry);

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double period = path.closed() ? path.length() : 2 * path.length();
  double start = 0.0;
  double direction = 1.0;
  if (options.random_start) {
    start = unit(rng) * period;
    direction = unit(rng) < 0.5 ? 1.0 : -1.0;
  }

  const std::size_t n = scheduled_samples(duration, noise.sample_rate);
  const Eigen::Vector2d center = Eigen::Vector2d::Constant(arena / 2);
  std::vector<TrajPoint> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / noise.sample_rate;
    if (noise.dropout_prob > 0 && unit(rng) < noise.dropout_prob) continue;
    Eigen::Vector2d p = path.at(start + direction * speed * t);
    if (noise.position_sigma > 0) {
      p.x() += noise.position_sigma * gauss(rng);
      p.y() += noise.position_sigma * gauss(rng);
    }
    if (options.system == CoordinateSystem::Geodetic) {
      const Eigen::Vector2d local = p - center;
      points.push_back({options.reference.lat_of(local.y()), options.reference.lon_of(local.x()), t});
    } else {
      points.push_back({p.x(), p.y(), t});
    }
  }
  return Trajectory(std::move(points), options.system, kind, std::string(to_string(kind)));
}

std::vector<Trajectory> generate_dataset(const DatasetSpec& spec, TechPreset preset,
                                         std::uint64_t seed) {
  for (int c : spec.counts) {
    if (c < 0) throw Error(ErrorKind::Argument, "pattern counts must be >= 0");
  }
  const NoiseModel noise = noise_preset(preset);
  PatternOptions options;
  options.system = preset_system(preset);
  options.reference = spec.reference;
  options.geometry = spec.geometry;

  std::vector<Trajectory> out;
  for (int k = 0; k < kNumPatterns; ++k) {
    const auto label = static_cast<PatternLabel>(k);
    for (int i = 0; i < spec.counts[static_cast<std::size_t>(k)]; ++i) {
      const auto traj_seed = derive_seed(seed, {static_cast<std::uint64_t>(k),
                                                static_cast<std::uint64_t>(i)});
      Rng rng(derive_seed(traj_seed, {0}));
      std::uniform_real_distribution<double> jitter(-spec.speed_jitter, spec.speed_jitter);
      const double speed = spec.speed * (1.0 + jitter(rng));
      auto traj = generate_pattern(label, spec.duration, speed, spec.arena, noise,
                                   derive_seed(traj_seed, {1}), options);
      char id[32];
      std::snprintf(id, sizeof id, "%s-%03d", std::string(to_string(label)).c_str(), i);
      out.emplace_back(Trajectory(std::vector<TrajPoint>(traj.points().begin(), traj.points().end()),
                                  traj.system(), label, id));
    }
  }
  return out;
}

}  // namespace trajclass
