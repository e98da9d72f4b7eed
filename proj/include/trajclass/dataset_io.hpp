#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajclass/trajectory.hpp"

namespace trajclass {

struct ManifestEntry {
  std::string id;
  PatternLabel label{PatternLabel::Straight};
  CoordinateSystem system{CoordinateSystem::Planar};
  std::string path;  // relative to the manifest's directory

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<ManifestEntry> entries;
};

nlohmann::json to_json(const Manifest& manifest);
// Throws ValidationError with a JSON pointer on schema problems.
Manifest manifest_from_json(const nlohmann::json& doc);

/// Writes `trajectories/<id>.csv` for each trajectory and `manifest.json`
/// under `dir`, which must already exist.
Manifest write_dataset(const std::filesystem::path& dir, std::span<const Trajectory> trajectories,
                       const nlohmann::json& meta = nlohmann::json::object());

// Loads every trajectory listed in a manifest file. Missing files are Io errors.
std::vector<Trajectory> read_dataset(const std::filesystem::path& manifest_path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace trajclass
