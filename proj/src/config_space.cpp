#include "trajclass/config_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "trajclass/error.hpp"
#include "trajclass/trajectory.hpp"

namespace trajclass {

using nlohmann::json;

ParameterDef ParameterDef::integer(std::string name, std::int64_t lo, std::int64_t hi) {
  ParameterDef p;
  p.name = std::move(name);
  p.type = ParamType::UniformInt;
  p.int_lo = lo;
  p.int_hi = hi;
  return p;
}

ParameterDef ParameterDef::real(std::string name, double lo, double hi) {
  ParameterDef p;
  p.name = std::move(name);
  p.type = ParamType::UniformFloat;
  p.float_lo = lo;
  p.float_hi = hi;
  return p;
}

ParameterDef ParameterDef::categorical(std::string name, std::vector<ParamValue> choices) {
  ParameterDef p;
  p.name = std::move(name);
  p.type = ParamType::Categorical;
  p.choices = std::move(choices);
  return p;
}

ParameterDef& ParameterDef::when(std::string parent, std::vector<ParamValue> values) {
  condition = Condition{std::move(parent), std::move(values)};
  return *this;
}

std::string format_value(const ParamValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&value)) return format_double(*d);
  return std::get<std::string>(value);
}

json value_to_json(const ParamValue& value) {
  return std::visit([](const auto& v) { return json(v); }, value);
}

ParamValue value_from_json(const json& j) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(ErrorKind::Parse, "parameter value must be a number or string");
}

json configuration_to_json(const Configuration& config) {
  json out = json::object();
  for (const auto& [name, value] : config) out[name] = value_to_json(value);
  return out;
}

Configuration configuration_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Parse, "configuration must be a JSON object");
  Configuration out;
  for (const auto& [name, value] : j.items()) out.emplace(name, value_from_json(value));
  return out;
}

ConfigurationSpace::ConfigurationSpace(std::vector<ParameterDef> params) {
  for (auto& p : params) add(std::move(p));
}

void ConfigurationSpace::add(ParameterDef param) {
  const std::string where = "/parameters/" + param.name;
  if (param.name.empty()) throw ValidationError("/parameters", "parameter without a name");
  for (const auto& p : params_) {
    if (p.name == param.name) throw ValidationError(where, "duplicate parameter name");
  }
  switch (param.type) {
    case ParamType::UniformInt:
      if (param.int_lo > param.int_hi) throw ValidationError(where, "empty integer range");
      break;
    case ParamType::UniformFloat:
      if (!(param.float_lo <= param.float_hi)) throw ValidationError(where, "empty float range");
      break;
    case ParamType::Categorical:
      if (param.choices.empty()) throw ValidationError(where, "categorical without choices");
      break;
  }
  if (param.condition) {
    auto it = std::find_if(params_.begin(), params_.end(),
                           [&](const ParameterDef& p) { return p.name == param.condition->parent; });
    if (it == params_.end()) {
      throw ValidationError(where, "condition parent '" + param.condition->parent +
                                       "' is not declared before this parameter");
    }
    if (it->type != ParamType::Categorical) {
      throw ValidationError(where, "condition parent must be categorical");
    }
    if (param.condition->values.empty()) throw ValidationError(where, "condition without values");
    for (const auto& v : param.condition->values) {
      if (std::find(it->choices.begin(), it->choices.end(), v) == it->choices.end()) {
        throw ValidationError(where, "condition value '" + format_value(v) +
                                         "' is not a choice of '" + it->name + "'");
      }
    }
  }
  params_.push_back(std::move(param));
}

const ParameterDef& ConfigurationSpace::parameter(const std::string& name) const {
  for (const auto& p : params_) {
    if (p.name == name) return p;
  }
  throw Error(ErrorKind::Lookup, "no parameter named '" + name + "'");
}

bool ConfigurationSpace::is_active(const ParameterDef& param, const Configuration& config) const {
  if (!param.condition) return true;
  auto it = config.find(param.condition->parent);
  if (it == config.end()) return false;
  const auto& values = param.condition->values;
  return std::find(values.begin(), values.end(), it->second) != values.end();
}

ParamValue ConfigurationSpace::sample_value(const ParameterDef& param, Rng& rng) const {
  switch (param.type) {
    case ParamType::UniformInt:
      return std::uniform_int_distribution<std::int64_t>(param.int_lo, param.int_hi)(rng);
    case ParamType::UniformFloat:
      return std::uniform_real_distribution<double>(param.float_lo, param.float_hi)(rng);
    case ParamType::Categorical: {
      std::uniform_int_distribution<std::size_t> pick(0, param.choices.size() - 1);
      return param.choices[pick(rng)];
    }
  }
  return std::int64_t{0};
}

void ConfigurationSpace::fill_inactive(Configuration& config, Rng& rng) const {
  for (const auto& p : params_) {
    const bool active = is_active(p, config);
    const bool present = config.contains(p.name);
    if (active && !present) config.emplace(p.name, sample_value(p, rng));
    if (!active && present) config.erase(p.name);
  }
}

Configuration ConfigurationSpace::sample(Rng& rng) const {
  Configuration config;
  fill_inactive(config, rng);
  return config;
}

Configuration ConfigurationSpace::neighbor(const Configuration& config, Rng& rng,
                                           double scale) const {
  std::vector<const ParameterDef*> movable;
  for (const auto& p : params_) {
    if (!config.contains(p.name)) continue;
    const bool can_move = (p.type == ParamType::UniformInt && p.int_hi > p.int_lo) ||
                          (p.type == ParamType::UniformFloat && p.float_hi > p.float_lo) ||
                          (p.type == ParamType::Categorical && p.choices.size() > 1);
    if (can_move) movable.push_back(&p);
  }
  Configuration out = config;
  if (movable.empty()) return out;
  const auto& p = *movable[std::uniform_int_distribution<std::size_t>(0, movable.size() - 1)(rng)];
  auto& value = out.at(p.name);
  std::normal_distribution<double> gauss(0.0, 1.0);
  switch (p.type) {
    case ParamType::UniformInt: {
      const auto v = std::get<std::int64_t>(value);
      const double range = static_cast<double>(p.int_hi - p.int_lo);
      auto next = static_cast<std::int64_t>(std::llround(static_cast<double>(v) + gauss(rng) * scale * range));
      next = std::clamp(next, p.int_lo, p.int_hi);
      if (next == v) {
        if (v == p.int_hi) {
          next = v - 1;
        } else if (v == p.int_lo) {
          next = v + 1;
        } else {
          next = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? v - 1 : v + 1;
        }
      }
      value = next;
      break;
    }
    case ParamType::UniformFloat: {
      const double v = std::get<double>(value);
      value = std::clamp(v + gauss(rng) * scale * (p.float_hi - p.float_lo), p.float_lo, p.float_hi);
      break;
    }
    case ParamType::Categorical: {
      std::vector<ParamValue> others;
      for (const auto& c : p.choices) {
        if (c != value) others.push_back(c);
      }
      value = others[std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng)];
      break;
    }
  }
  fill_inactive(out, rng);
  return out;
}

void ConfigurationSpace::validate(const Configuration& config) const {
  for (const auto& [name, value] : config) {
    if (std::none_of(params_.begin(), params_.end(),
                     [&](const ParameterDef& p) { return p.name == name; })) {
      throw ValidationError("/" + name, "unknown parameter");
    }
  }
  for (const auto& p : params_) {
    const std::string where = "/" + p.name;
    const bool active = is_active(p, config);
    auto it = config.find(p.name);
    if (!active) {
      if (it != config.end()) throw ValidationError(where, "parameter is inactive under its condition");
      continue;
    }
    if (it == config.end()) throw ValidationError(where, "missing active parameter");
    const auto& v = it->second;
    switch (p.type) {
      case ParamType::UniformInt: {
        const auto* i = std::get_if<std::int64_t>(&v);
        if (i == nullptr) throw ValidationError(where, "expected an integer");
        if (*i < p.int_lo || *i > p.int_hi) throw ValidationError(where, "value out of range");
        break;
      }
      case ParamType::UniformFloat: {
        const auto* d = std::get_if<double>(&v);
        if (d == nullptr) throw ValidationError(where, "expected a float");
        if (!(*d >= p.float_lo && *d <= p.float_hi)) throw ValidationError(where, "value out of range");
        break;
      }
      case ParamType::Categorical:
        if (std::find(p.choices.begin(), p.choices.end(), v) == p.choices.end()) {
          throw ValidationError(where, "'" + format_value(v) + "' is not an allowed choice");
        }
        break;
    }
  }
}

std::size_t ConfigurationSpace::encoded_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    n += p.type == ParamType::Categorical ? p.choices.size() : 1;
    if (p.condition) ++n;
  }
  return n;
}

std::vector<double> ConfigurationSpace::encode(const Configuration& config) const {
  std::vector<double> out;
  out.reserve(encoded_size());
  for (const auto& p : params_) {
    auto it = config.find(p.name);
    const bool active = it != config.end();
    switch (p.type) {
      case ParamType::UniformInt: {
        const double range = static_cast<double>(p.int_hi - p.int_lo);
        out.push_back(!active || range == 0
                          ? 0.5
                          : static_cast<double>(std::get<std::int64_t>(it->second) - p.int_lo) / range);
        break;
      }
      case ParamType::UniformFloat: {
        const double range = p.float_hi - p.float_lo;
        out.push_back(!active || range == 0 ? 0.5 : (std::get<double>(it->second) - p.float_lo) / range);
        break;
      }
      case ParamType::Categorical:
        for (const auto& c : p.choices) out.push_back(active && it->second == c ? 1.0 : 0.0);
        break;
    }
    if (p.condition) out.push_back(active ? 1.0 : 0.0);
  }
  return out;
}

namespace {

std::string_view type_name(ParamType type) {
  switch (type) {
    case ParamType::UniformInt: return "uniform-int";
    case ParamType::UniformFloat: return "uniform-float";
    case ParamType::Categorical: return "categorical";
  }
  return "unknown";
}

}  // namespace

json ConfigurationSpace::to_json() const {
  json params = json::array();
  for (const auto& p : params_) {
    json j{{"name", p.name}, {"type", type_name(p.type)}};
    if (p.type == ParamType::UniformInt) j["range"] = {p.int_lo, p.int_hi};
    if (p.type == ParamType::UniformFloat) j["range"] = {p.float_lo, p.float_hi};
    if (p.type == ParamType::Categorical) {
      j["choices"] = json::array();
      for (const auto& c : p.choices) j["choices"].push_back(value_to_json(c));
    }
    if (p.condition) {
      json values = json::array();
      for (const auto& v : p.condition->values) values.push_back(value_to_json(v));
      j["condition"] = {{"parent", p.condition->parent}, {"values", values}};
    }
    params.push_back(std::move(j));
  }
  return {{"parameters", params}};
}

ConfigurationSpace ConfigurationSpace::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("parameters") || !doc["parameters"].is_array()) {
    throw ValidationError("/parameters", "expected an array of parameter definitions");
  }
  for (const auto& [key, _] : doc.items()) {
    if (key != "parameters") throw ValidationError("/" + key, "unknown key");
  }
  ConfigurationSpace space;
  std::size_t index = 0;
  for (const auto& j : doc["parameters"]) {
    const std::string where = "/parameters/" + std::to_string(index++);
    try {
      const std::set<std::string> known{"name", "type", "range", "choices", "condition"};
      for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw ValidationError(where + "/" + key, "unknown key");
      }
      const auto name = j.at("name").get<std::string>();
      const auto type = j.at("type").get<std::string>();
      ParameterDef p;
      if (type == "uniform-int") {
        const auto range = j.at("range");
        p = ParameterDef::integer(name, range.at(0).get<std::int64_t>(), range.at(1).get<std::int64_t>());
      } else if (type == "uniform-float") {
        const auto range = j.at("range");
        p = ParameterDef::real(name, range.at(0).get<double>(), range.at(1).get<double>());
      } else if (type == "categorical") {
        std::vector<ParamValue> choices;
        for (const auto& c : j.at("choices")) choices.push_back(value_from_json(c));
        p = ParameterDef::categorical(name, std::move(choices));
      } else {
        throw ValidationError(where + "/type", "unknown parameter type '" + type + "'");
      }
      if (j.contains("condition")) {
        const auto& c = j["condition"];
        std::vector<ParamValue> values;
        for (const auto& v : c.at("values")) values.push_back(value_from_json(v));
        p.when(c.at("parent").get<std::string>(), std::move(values));
      }
      space.add(std::move(p));
    } catch (const json::exception& e) {
      throw ValidationError(where, e.what());
    }
  }
  return space;
}

}  // namespace trajclass
