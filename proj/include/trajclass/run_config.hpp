#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajclass/generator.hpp"
#include "trajclass/pipeline.hpp"
#include "trajclass/protocol.hpp"
#include "trajclass/smbo.hpp"

namespace trajclass {

struct DatasetSource {
  std::optional<std::string> manifest;  // takes precedence over the generator fields
  TechPreset preset{TechPreset::GnssLike};
  DatasetSpec spec{};
};

struct FeatureSettings {
  int split{1};
  NoisePlacement placement{NoisePlacement::None};
  int window_length{5};
  int polyorder{2};
  bool signed_geodetic_angle{false};
};

struct CalibrationSettings {
  double step{25};
  int runs{15};
  double max_time{600};
};

struct CompareSettings {
  std::optional<std::string> report_a;
  std::optional<std::string> report_b;
  std::string family_a{"best"};  // a family name or "best" (highest mean MCC)
  std::string family_b{"best"};
  double alpha{0.05};
  std::string label_a{"a"};
  std::string label_b{"b"};
};

/// Everything a command needs, as one declarative document. Command-line
/// flags are applied on top of it.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  int jobs{0};
  std::string output{"runs"};
  bool force{false};
  DatasetSource dataset{};
  std::vector<PipelineFamily> families = PipelineFamily::all();
  Budget budget{Budget::evals(60)};
  int reps{50};
  int runs_per_rep{15};
  int sample_k{5};
  int folds{10};
  double train_fraction{kTrainFraction};
  CalibrationSettings calibration{};
  FeatureSettings features{};
  CompareSettings compare{};

  // Strict: unknown keys and wrong types raise ValidationError with a JSON pointer.
  static RunConfig from_json(const nlohmann::json& doc);
  [[nodiscard]] nlohmann::json to_json() const;
  // Range checks that apply after flag overrides.
  void validate() const;
};

// Keys accepted by RunConfig::from_json, as JSON pointers (e.g. "/dataset/counts").
const std::vector<std::string>& run_config_keys();

}  // namespace trajclass
