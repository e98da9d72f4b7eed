#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajclass/random.hpp"

namespace trajclass {

using ParamValue = std::variant<std::int64_t, double, std::string>;

// Active parameters only, keyed by name.
using Configuration = std::map<std::string, ParamValue>;

enum class ParamType { UniformInt, UniformFloat, Categorical };

struct Condition {
  std::string parent;
  std::vector<ParamValue> values;  // child is active when parent takes any of these
};

struct ParameterDef {
  std::string name;
  ParamType type{ParamType::UniformInt};
  std::int64_t int_lo{0};
  std::int64_t int_hi{0};
  double float_lo{0};
  double float_hi{0};
  std::vector<ParamValue> choices;
  std::optional<Condition> condition;

  static ParameterDef integer(std::string name, std::int64_t lo, std::int64_t hi);
  static ParameterDef real(std::string name, double lo, double hi);
  static ParameterDef categorical(std::string name, std::vector<ParamValue> choices);
  ParameterDef& when(std::string parent, std::vector<ParamValue> values);
};

/// Typed, conditional hyperparameter space. Parents must be declared before
/// their children.
class ConfigurationSpace {
 public:
  ConfigurationSpace() = default;
  explicit ConfigurationSpace(std::vector<ParameterDef> params);

  void add(ParameterDef param);

  [[nodiscard]] const std::vector<ParameterDef>& parameters() const noexcept { return params_; }
  [[nodiscard]] const ParameterDef& parameter(const std::string& name) const;

  [[nodiscard]] bool is_active(const ParameterDef& param, const Configuration& config) const;

  // Uniform per type; inactive children are omitted.
  [[nodiscard]] Configuration sample(Rng& rng) const;

  /// One-exchange neighbor: changes one active parameter (Gaussian step of
  /// `scale` times the range for numbers, another choice for categoricals)
  /// and resamples children whose activity changed.
  [[nodiscard]] Configuration neighbor(const Configuration& config, Rng& rng, double scale) const;

  // Throws ValidationError naming the offending parameter.
  void validate(const Configuration& config) const;

  /// Numeric encoding for surrogate models: numbers min-max scaled, choices
  /// one-hot, and for conditional parameters an activity flag with inactive
  /// numbers imputed at 0.5.
  [[nodiscard]] std::vector<double> encode(const Configuration& config) const;
  [[nodiscard]] std::size_t encoded_size() const;

  [[nodiscard]] nlohmann::json to_json() const;
  static ConfigurationSpace from_json(const nlohmann::json& doc);

 private:
  void fill_inactive(Configuration& config, Rng& rng) const;
  [[nodiscard]] ParamValue sample_value(const ParameterDef& param, Rng& rng) const;

  std::vector<ParameterDef> params_;
};

std::string format_value(const ParamValue& value);
nlohmann::json value_to_json(const ParamValue& value);
ParamValue value_from_json(const nlohmann::json& j);
nlohmann::json configuration_to_json(const Configuration& config);
Configuration configuration_from_json(const nlohmann::json& j);

}  // namespace trajclass
