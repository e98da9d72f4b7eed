#include "trajclass/run_config.hpp"

#include <algorithm>
#include <set>

#include "trajclass/error.hpp"

namespace trajclass {

using nlohmann::json;

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys{
      "/seed", "/jobs", "/output", "/force",
      "/dataset", "/dataset/manifest", "/dataset/preset", "/dataset/counts", "/dataset/duration",
      "/dataset/speed", "/dataset/speed_jitter", "/dataset/arena",
      "/families",
      "/budget", "/budget/max_evals", "/budget/wallclock_seconds",
      "/protocol", "/protocol/reps", "/protocol/runs_per_rep", "/protocol/sample_k",
      "/protocol/folds", "/protocol/train_fraction",
      "/calibration", "/calibration/step", "/calibration/runs", "/calibration/max_time",
      "/features", "/features/split", "/features/placement", "/features/window_length",
      "/features/polyorder", "/features/signed_geodetic_angle",
      "/compare", "/compare/report_a", "/compare/report_b", "/compare/family_a",
      "/compare/family_b", "/compare/alpha", "/compare/label_a", "/compare/label_b"};
  return keys;
}

namespace {

class Reader {
 public:
  Reader(const json& doc, std::string at) : doc_(doc), at_(std::move(at)) {
    if (!doc_.is_object()) throw ValidationError(at_.empty() ? "/" : at_, "expected an object");
    const auto& keys = run_config_keys();
    for (const auto& [key, _] : doc_.items()) {
      const auto ptr = at_ + "/" + key;
      if (std::find(keys.begin(), keys.end(), ptr) == keys.end()) throw ValidationError(ptr, "unknown key");
    }
  }

  [[nodiscard]] bool has(const char* key) const { return doc_.contains(key); }
  [[nodiscard]] std::string where(const char* key) const { return at_ + "/" + key; }
  [[nodiscard]] const json& raw(const char* key) const { return doc_.at(key); }

  template <typename T>
  void get(const char* key, T& out) const {
    if (!has(key)) return;
    const auto& v = doc_.at(key);
    const auto ptr = where(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ValidationError(ptr, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ValidationError(ptr, "expected an integer");
      if (std::is_unsigned_v<T> && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
        throw ValidationError(ptr, "expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ValidationError(ptr, "expected a number");
    } else {
      if (!v.is_string()) throw ValidationError(ptr, "expected a string");
    }
    out = v.get<T>();
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) const {
    if (!has(key)) return;
    T value{};
    get(key, value);
    out = value;
  }

  // Parses a string field with `parse`, relocating its errors to the key.
  template <typename T, typename F>
  void parse(const char* key, T& out, F&& parse_fn) const {
    if (!has(key)) return;
    std::string text;
    get(key, text);
    try {
      out = parse_fn(text);
    } catch (const Error& e) {
      throw ValidationError(where(key), e.what());
    }
  }

 private:
  const json& doc_;
  std::string at_;
};

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig c;
  const Reader top(doc, "");
  top.get("seed", c.seed);
  top.get("jobs", c.jobs);
  top.get("output", c.output);
  top.get("force", c.force);

  if (top.has("dataset")) {
    const Reader r(top.raw("dataset"), "/dataset");
    r.get("manifest", c.dataset.manifest);
    r.parse("preset", c.dataset.preset, [](const std::string& s) { return parse_tech_preset(s); });
    if (r.has("counts")) {
      const auto& v = r.raw("counts");
      if (!v.is_array() || v.size() != kNumPatterns) {
        throw ValidationError("/dataset/counts", "expected an array of 4 integers");
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number_integer()) {
          throw ValidationError("/dataset/counts/" + std::to_string(i), "expected an integer");
        }
        c.dataset.spec.counts[i] = v[i].get<int>();
      }
    }
    r.get("duration", c.dataset.spec.duration);
    r.get("speed", c.dataset.spec.speed);
    r.get("speed_jitter", c.dataset.spec.speed_jitter);
    r.get("arena", c.dataset.spec.arena);
  }

  if (top.has("families")) {
    const auto& v = top.raw("families");
    if (v.is_string() && v.get<std::string>() == "all") {
      c.families = PipelineFamily::all();
    } else if (v.is_array()) {
      c.families.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto ptr = "/families/" + std::to_string(i);
        if (!v[i].is_string()) throw ValidationError(ptr, "expected a family name");
        try {
          c.families.push_back(PipelineFamily::parse(v[i].get<std::string>()));
        } catch (const Error& e) {
          throw ValidationError(ptr, e.what());
        }
      }
    } else {
      throw ValidationError("/families", "expected \"all\" or an array of family names");
    }
  }

  if (top.has("budget")) {
    const Reader r(top.raw("budget"), "/budget");
    c.budget = Budget{};
    r.get("max_evals", c.budget.max_evals);
    r.get("wallclock_seconds", c.budget.wallclock_seconds);
  }

  if (top.has("protocol")) {
    const Reader r(top.raw("protocol"), "/protocol");
    r.get("reps", c.reps);
    r.get("runs_per_rep", c.runs_per_rep);
    r.get("sample_k", c.sample_k);
    r.get("folds", c.folds);
    r.get("train_fraction", c.train_fraction);
  }

  if (top.has("calibration")) {
    const Reader r(top.raw("calibration"), "/calibration");
    r.get("step", c.calibration.step);
    r.get("runs", c.calibration.runs);
    r.get("max_time", c.calibration.max_time);
  }

  if (top.has("features")) {
    const Reader r(top.raw("features"), "/features");
    r.get("split", c.features.split);
    r.parse("placement", c.features.placement, [](const std::string& s) { return parse_noise_placement(s); });
    r.get("window_length", c.features.window_length);
    r.get("polyorder", c.features.polyorder);
    r.get("signed_geodetic_angle", c.features.signed_geodetic_angle);
  }

  if (top.has("compare")) {
    const Reader r(top.raw("compare"), "/compare");
    r.get("report_a", c.compare.report_a);
    r.get("report_b", c.compare.report_b);
    r.get("family_a", c.compare.family_a);
    r.get("family_b", c.compare.family_b);
    r.get("alpha", c.compare.alpha);
    r.get("label_a", c.compare.label_a);
    r.get("label_b", c.compare.label_b);
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (jobs < 0) throw ValidationError("/jobs", "must be >= 0");
  if (output.empty()) throw ValidationError("/output", "must not be empty");
  for (std::size_t i = 0; i < dataset.spec.counts.size(); ++i) {
    if (dataset.spec.counts[i] < 0) throw ValidationError("/dataset/counts/" + std::to_string(i), "must be >= 0");
  }
  if (!(dataset.spec.duration > 0)) throw ValidationError("/dataset/duration", "must be > 0");
  if (!(dataset.spec.speed > 0)) throw ValidationError("/dataset/speed", "must be > 0");
  if (!(dataset.spec.speed_jitter >= 0 && dataset.spec.speed_jitter < 1)) {
    throw ValidationError("/dataset/speed_jitter", "must lie in [0, 1)");
  }
  if (!(dataset.spec.arena > 0)) throw ValidationError("/dataset/arena", "must be > 0");
  if (families.empty()) throw ValidationError("/families", "select at least one family");
  if (!budget.max_evals && !budget.wallclock_seconds) {
    throw ValidationError("/budget", "set max_evals or wallclock_seconds");
  }
  if (budget.max_evals && *budget.max_evals < 1) throw ValidationError("/budget/max_evals", "must be >= 1");
  if (budget.wallclock_seconds && !(*budget.wallclock_seconds > 0)) {
    throw ValidationError("/budget/wallclock_seconds", "must be > 0");
  }
  if (reps < 1) throw ValidationError("/protocol/reps", "must be >= 1");
  if (runs_per_rep < 1) throw ValidationError("/protocol/runs_per_rep", "must be >= 1");
  if (sample_k < 1 || sample_k > runs_per_rep) {
    throw ValidationError("/protocol/sample_k", "must lie in [1, runs_per_rep]");
  }
  if (folds < 2) throw ValidationError("/protocol/folds", "must be >= 2");
  if (!(train_fraction > 0 && train_fraction < 1)) {
    throw ValidationError("/protocol/train_fraction", "must lie in (0, 1)");
  }
  if (!(calibration.step > 0)) throw ValidationError("/calibration/step", "must be > 0");
  if (calibration.runs < 1) throw ValidationError("/calibration/runs", "must be >= 1");
  if (!(calibration.max_time >= calibration.step)) {
    throw ValidationError("/calibration/max_time", "must be >= step");
  }
  if (features.split < 1) throw ValidationError("/features/split", "must be >= 1");
  if (features.window_length < 1 || features.window_length % 2 == 0) {
    throw ValidationError("/features/window_length", "must be a positive odd integer");
  }
  if (features.polyorder < 0) throw ValidationError("/features/polyorder", "must be >= 0");
  if (!(compare.alpha > 0 && compare.alpha < 1)) throw ValidationError("/compare/alpha", "must lie in (0, 1)");
}

json RunConfig::to_json() const {
  json j;
  if (seed) j["seed"] = *seed;
  j["jobs"] = jobs;
  j["output"] = output;
  j["force"] = force;
  json ds{{"preset", to_string(dataset.preset)},
          {"counts", dataset.spec.counts},
          {"duration", dataset.spec.duration},
          {"speed", dataset.spec.speed},
          {"speed_jitter", dataset.spec.speed_jitter},
          {"arena", dataset.spec.arena}};
  if (dataset.manifest) ds["manifest"] = *dataset.manifest;
  j["dataset"] = std::move(ds);
  json fams = json::array();
  for (const auto& f : families) fams.push_back(f.name());
  j["families"] = std::move(fams);
  json b = json::object();
  if (budget.max_evals) b["max_evals"] = *budget.max_evals;
  if (budget.wallclock_seconds) b["wallclock_seconds"] = *budget.wallclock_seconds;
  j["budget"] = std::move(b);
  j["protocol"] = {{"reps", reps}, {"runs_per_rep", runs_per_rep}, {"sample_k", sample_k},
                   {"folds", folds}, {"train_fraction", train_fraction}};
  j["calibration"] = {{"step", calibration.step}, {"runs", calibration.runs},
                      {"max_time", calibration.max_time}};
  j["features"] = {{"split", features.split},
                   {"placement", to_string(features.placement)},
                   {"window_length", features.window_length},
                   {"polyorder", features.polyorder},
                   {"signed_geodetic_angle", features.signed_geodetic_angle}};
  json cmp{{"family_a", compare.family_a}, {"family_b", compare.family_b}, {"alpha", compare.alpha},
           {"label_a", compare.label_a}, {"label_b", compare.label_b}};
  if (compare.report_a) cmp["report_a"] = *compare.report_a;
  if (compare.report_b) cmp["report_b"] = *compare.report_b;
  j["compare"] = std::move(cmp);
  return j;
}

}  // namespace trajclass
