// trajclass: generate datasets, optimise and evaluate pipeline families,
// calibrate budgets and compare technologies.
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "trajclass/dataset_io.hpp"
#include "trajclass/error.hpp"
#include "trajclass/generator.hpp"
#include "trajclass/protocol.hpp"
#include "trajclass/random.hpp"
#include "trajclass/run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trajclass;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Seed streams below the run seed.
constexpr std::uint64_t kDatasetStream = 100;
constexpr std::uint64_t kSplitStream = 101;
constexpr std::uint64_t kProtocolStream = 102;
constexpr std::uint64_t kOptimizeStream = 103;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Output directory `<root>/<command>-s<seed>-<hash>`, filled in a hidden
/// staging directory and renamed into place on commit, so a failed run
/// leaves nothing behind.
class RunDir {
 public:
  RunDir(const fs::path& root, const std::string& stamp, bool force)
      : final_(root / stamp), staging_(root / ("." + stamp + ".partial")), force_(force) {
    std::error_code ec;
    if (fs::exists(final_, ec) && !force_) {
      throw Error(ErrorKind::Io, "output directory '" + final_.string() +
                                     "' already exists (use --force to replace it)");
    }
    fs::remove_all(staging_, ec);
    fs::create_directories(staging_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create '" + staging_.string() + "': " + ec.message());
  }
  RunDir(const RunDir&) = delete;
  RunDir& operator=(const RunDir&) = delete;
  ~RunDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }

  [[nodiscard]] fs::path file(const std::string& name) const { return staging_ / name; }
  [[nodiscard]] const fs::path& staging() const { return staging_; }

  fs::path commit() {
    std::error_code ec;
    if (fs::exists(final_, ec)) fs::remove_all(final_, ec);
    fs::rename(staging_, final_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot move results to '" + final_.string() + "': " + ec.message());
    committed_ = true;
    return final_;
  }

 private:
  fs::path final_;
  fs::path staging_;
  bool force_;
  bool committed_{false};
};

// Flags shared by all commands. Set flags override the config file.
struct Flags {
  std::string config_path;
  std::uint64_t seed{0};
  int jobs{0};
  std::string output;
  bool force{false};
  std::string manifest;
  std::string preset;
  std::vector<int> counts;
  double duration{0};
  std::vector<std::string> family;
  std::string families;
  int evals{0};
  double wallclock{0};
  int reps{0};
  int runs_per_rep{0};
  int sample_k{0};
  int folds{0};
  int split{0};
  std::string placement;
  int window{0};
  int order{0};
  bool signed_angle{false};
  double step{0};
  int runs{0};
  double max_time{0};
  std::vector<std::string> reports;
  std::string family_a;
  std::string family_b;
  double alpha{0};
  std::vector<std::string> labels;

  // The same flag may be registered on several subcommands.
  std::map<std::string, std::vector<CLI::Option*>> options;

  CLI::Option* reg(const std::string& name, CLI::Option* opt) {
    options[name].push_back(opt);
    return opt;
  }
  [[nodiscard]] bool set(const std::string& name) const {
    auto it = options.find(name);
    if (it == options.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [](const CLI::Option* o) { return o->count() > 0; });
  }
};

void add_common(CLI::App& cmd, Flags& f) {
  f.reg("config", cmd.add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile));
  f.reg("seed", cmd.add_option("--seed", f.seed, "master seed (default: $TRAJCLASS_SEED, else 0)"));
  f.reg("out", cmd.add_option("--out", f.output, "root directory for run outputs (default: runs)"));
  f.reg("force", cmd.add_flag("--force", f.force, "replace an existing run directory"));
}

void add_dataset(CLI::App& cmd, Flags& f) {
  f.reg("manifest", cmd.add_option("--manifest", f.manifest, "dataset manifest.json"));
  f.reg("preset", cmd.add_option("--preset", f.preset, "technology preset for a generated dataset")
                            ->check(CLI::IsMember({"gnss-like", "uwb-like"})));
  f.reg("counts", cmd.add_option("--counts", f.counts, "trajectories per pattern (4 values)")->expected(4));
  f.reg("duration", cmd.add_option("--duration", f.duration, "seconds per generated trajectory"));
}

void add_jobs(CLI::App& cmd, Flags& f) {
  f.reg("jobs", cmd.add_option("--jobs", f.jobs, "worker threads (0 = one per processor)"));
}

void add_budget(CLI::App& cmd, Flags& f) {
  f.reg("evals", cmd.add_option("--evals", f.evals, "evaluations per optimisation run"));
  f.reg("wallclock", cmd.add_option("--wallclock", f.wallclock, "seconds per optimisation run"));
  f.reg("folds", cmd.add_option("--folds", f.folds, "cross-validation folds"));
}

void add_family(CLI::App& cmd, Flags& f, bool many) {
  auto* family = f.reg("family", cmd.add_option("--family", f.family, "pipeline family, e.g. rf+raw-noise"));
  if (many) {
    f.reg("families", cmd.add_option("--families", f.families, "\"all\" for every family")
                                ->check(CLI::IsMember({"all"})));
  } else {
    family->expected(1);
  }
}

RunConfig effective_config(const Flags& f) {
  RunConfig c;
  if (!f.config_path.empty()) {
    json doc;
    try {
      doc = json::parse(read_file(f.config_path));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Parse, f.config_path + ": " + e.what());
    }
    c = RunConfig::from_json(doc);
  }
  if (f.set("seed")) {
    c.seed = f.seed;
  } else if (!c.seed) {
    if (const char* env = std::getenv("TRAJCLASS_SEED")) {
      try {
        std::size_t used = 0;
        c.seed = std::stoull(env, &used);
        if (used != std::string_view(env).size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ValidationError("/seed", "TRAJCLASS_SEED is not an unsigned integer: '" + std::string(env) + "'");
      }
    } else {
      c.seed = 0;
    }
  }
  if (f.set("jobs")) c.jobs = f.jobs;
  if (f.set("out")) c.output = f.output;
  if (f.set("force")) c.force = f.force;
  if (f.set("manifest")) c.dataset.manifest = f.manifest;
  if (f.set("preset")) c.dataset.preset = parse_tech_preset(f.preset);
  if (f.set("counts")) std::copy(f.counts.begin(), f.counts.end(), c.dataset.spec.counts.begin());
  if (f.set("duration")) c.dataset.spec.duration = f.duration;
  if (f.set("families")) c.families = PipelineFamily::all();
  if (f.set("family")) {
    c.families.clear();
    for (const auto& name : f.family) {
      try {
        c.families.push_back(PipelineFamily::parse(name));
      } catch (const Error& e) {
        throw ValidationError("/families", e.what());
      }
    }
  }
  if (f.set("evals") || f.set("wallclock")) c.budget = Budget{};
  if (f.set("evals")) c.budget.max_evals = f.evals;
  if (f.set("wallclock")) c.budget.wallclock_seconds = f.wallclock;
  if (f.set("reps")) c.reps = f.reps;
  if (f.set("runs-per-rep")) c.runs_per_rep = f.runs_per_rep;
  if (f.set("sample-k")) c.sample_k = f.sample_k;
  if (f.set("folds")) c.folds = f.folds;
  if (f.set("split")) c.features.split = f.split;
  if (f.set("placement")) c.features.placement = parse_noise_placement(f.placement);
  if (f.set("window")) c.features.window_length = f.window;
  if (f.set("order")) c.features.polyorder = f.order;
  if (f.set("signed-angle")) c.features.signed_geodetic_angle = f.signed_angle;
  if (f.set("step")) c.calibration.step = f.step;
  if (f.set("runs")) c.calibration.runs = f.runs;
  if (f.set("max-time")) c.calibration.max_time = f.max_time;
  if (f.set("reports")) {
    c.compare.report_a = f.reports.at(0);
    c.compare.report_b = f.reports.at(1);
  }
  if (f.set("family-a")) c.compare.family_a = f.family_a;
  if (f.set("family-b")) c.compare.family_b = f.family_b;
  if (f.set("alpha")) c.compare.alpha = f.alpha;
  if (f.set("labels")) {
    c.compare.label_a = f.labels.at(0);
    c.compare.label_b = f.labels.at(1);
  }
  c.validate();
  return c;
}

// Everything that influences results; output location and thread count do not.
json result_inputs(const RunConfig& c, const std::string& command) {
  auto j = c.to_json();
  j.erase("output");
  j.erase("force");
  j.erase("jobs");
  j["command"] = command;
  return j;
}

std::string stamp(const RunConfig& c, const std::string& command) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%08llx",
                static_cast<unsigned long long>(fnv1a(result_inputs(c, command).dump()) & 0xffffffffULL));
  return command + "-s" + std::to_string(*c.seed) + "-" + hash;
}

struct LoadedData {
  std::vector<Trajectory> trajectories;
  json source;
};

LoadedData load_dataset(const RunConfig& c) {
  if (c.dataset.manifest) {
    const fs::path path = *c.dataset.manifest;
    if (!fs::exists(path)) throw Error(ErrorKind::Io, "manifest not found: '" + path.string() + "'");
    return {read_dataset(path), {{"manifest", path.filename().string()}}};
  }
  return {generate_dataset(c.dataset.spec, c.dataset.preset, derive_seed(*c.seed, {kDatasetStream})),
          {{"preset", to_string(c.dataset.preset)}}};
}

ProtocolOptions protocol_options(const RunConfig& c) {
  ProtocolOptions o;
  o.reps = c.reps;
  o.runs_per_rep = c.runs_per_rep;
  o.sample_k = c.sample_k;
  o.budget = c.budget;
  o.jobs = c.jobs;
  o.cv.folds = c.folds;
  o.cv.features.signed_geodetic_angle = c.features.signed_geodetic_angle;
  return o;
}

const PipelineFamily& single_family(const RunConfig& c) {
  if (c.families.size() != 1) {
    throw ValidationError("/families", "this command needs exactly one family (use --family)");
  }
  return c.families.front();
}

void print_result(const fs::path& dir) { std::cout << json{{"output", dir.string()}}.dump() << "\n"; }

void write_run_config(const RunDir& dir, const RunConfig& c, const std::string& command) {
  write_file(dir.file("run.json"), result_inputs(c, command).dump(2) + "\n");
}

int cmd_generate(const RunConfig& c) {
  RunDir dir(c.output, stamp(c, "generate"), c.force);
  const auto data = generate_dataset(c.dataset.spec, c.dataset.preset, derive_seed(*c.seed, {kDatasetStream}));
  const auto noise = noise_preset(c.dataset.preset);
  json meta{{"preset", to_string(c.dataset.preset)},
            {"seed", *c.seed},
            {"counts", c.dataset.spec.counts},
            {"duration", c.dataset.spec.duration},
            {"speed", c.dataset.spec.speed},
            {"speed_jitter", c.dataset.spec.speed_jitter},
            {"arena", c.dataset.spec.arena},
            {"position_sigma", noise.position_sigma},
            {"sample_rate", noise.sample_rate}};
  write_dataset(dir.staging(), data, meta);
  write_run_config(dir, c, "generate");
  print_result(dir.commit());
  return 0;
}

PipelineConfig feature_config(const RunConfig& c) {
  PipelineConfig p;
  p.split = c.features.split;
  p.placement = c.features.placement;
  if (p.placement != NoisePlacement::None) {
    if (c.features.polyorder >= c.features.window_length) {
      throw ValidationError("/features/polyorder", "must be smaller than window_length");
    }
    p.savgol = SavGolParams{c.features.window_length, c.features.polyorder};
  }
  return p;
}

int cmd_featurize(const RunConfig& c) {
  const auto config = feature_config(c);
  const auto data = load_dataset(c);
  FeatureOptions opts;
  opts.signed_geodetic_angle = c.features.signed_geodetic_angle;
  const auto set = build_instances(data.trajectories, config, opts);
  RunDir dir(c.output, stamp(c, "featurize"), c.force);
  write_file(dir.file("features.csv"), to_feature_csv(set));
  write_run_config(dir, c, "featurize");
  print_result(dir.commit());
  return 0;
}

int cmd_optimize(const RunConfig& c) {
  const auto family = single_family(c);
  const auto data = load_dataset(c);
  const auto split = train_test_split(data.trajectories, c.train_fraction, derive_seed(*c.seed, {kSplitStream}));
  CvOptions cv_opts;
  cv_opts.folds = c.folds;
  cv_opts.features.signed_geodetic_angle = c.features.signed_geodetic_angle;
  const CvObjective cv(split.train, cv_opts);
  const Objective objective = [&](const Configuration& config, std::uint64_t seed) {
    return cv(PipelineConfig::from_configuration(config), seed);
  };
  const auto space = family_space(family);
  const auto seed = derive_seed(*c.seed, {kOptimizeStream});
  const auto result = smbo_optimize(space, objective, c.budget, seed);
  const auto incumbent = PipelineConfig::from_configuration(result.incumbent);
  const auto test = evaluate_config(incumbent, split.train, split.test, derive_seed(seed, {9}));
  RunDir dir(c.output, stamp(c, "optimize"), c.force);
  write_file(dir.file("history.csv"), history_to_csv(space, result.history));
  json out{{"family", family.name()},
           {"incumbent", configuration_to_json(result.incumbent)},
           {"objective", result.incumbent_objective},
           {"evaluations", result.history.size()},
           {"test", {{"precision", test.precision}, {"recall", test.recall}, {"f1", test.f1}, {"mcc", test.mcc}}}};
  write_file(dir.file("incumbent.json"), out.dump(2) + "\n");
  write_run_config(dir, c, "optimize");
  print_result(dir.commit());
  return 0;
}

int cmd_evaluate(const RunConfig& c) {
  const auto data = load_dataset(c);
  const auto split = train_test_split(data.trajectories, c.train_fraction, derive_seed(*c.seed, {kSplitStream}));
  const auto options = protocol_options(c);
  options.validate();
  EvaluationReport report;
  report.meta = result_inputs(c, "evaluate");
  report.meta["dataset"]["source"] = data.source;
  report.meta["n_train"] = split.train.size();
  report.meta["n_test"] = split.test.size();
  const auto master = derive_seed(*c.seed, {kProtocolStream});
  for (const auto& family : c.families) {
    std::cerr << "evaluating " << family.name() << "\n";
    auto r = bootstrap_family(family, split.train, split.test, options, master);
    report.families.push_back({family, std::move(r.scores), std::move(r.selected)});
  }
  RunDir dir(c.output, stamp(c, "evaluate"), c.force);
  write_file(dir.file("report.json"), to_json(report).dump(2) + "\n");
  write_file(dir.file("table.txt"), report_table(report));
  write_run_config(dir, c, "evaluate");
  std::cerr << report_table(report);
  print_result(dir.commit());
  return 0;
}

int cmd_calibrate(const RunConfig& c) {
  const auto family = single_family(c);
  const auto data = load_dataset(c);
  const auto split = train_test_split(data.trajectories, c.train_fraction, derive_seed(*c.seed, {kSplitStream}));
  const auto result = wallclock_calibration(family, split.train, split.test, c.calibration.step,
                                            c.calibration.runs, c.calibration.max_time,
                                            protocol_options(c), derive_seed(*c.seed, {kProtocolStream}));
  RunDir dir(c.output, stamp(c, "calibrate"), c.force);
  auto j = to_json(result);
  j["family"] = family.name();
  write_file(dir.file("calibration.json"), j.dump(2) + "\n");
  write_run_config(dir, c, "calibrate");
  print_result(dir.commit());
  return 0;
}

const FamilyReport& pick_family(const EvaluationReport& report, const std::string& name) {
  if (name != "best") return report.family(name);
  if (report.families.empty()) throw Error(ErrorKind::Lookup, "report has no families");
  const FamilyReport* best = &report.families.front();
  for (const auto& f : report.families) {
    if (summarize(f.scores, 3).mean > summarize(best->scores, 3).mean) best = &f;
  }
  return *best;
}

EvaluationReport load_report(const std::string& path) {
  if (!fs::exists(path)) throw Error(ErrorKind::Io, "report not found: '" + path + "'");
  try {
    return parse_report(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(e.pointer(), path + ": " + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw Error(ErrorKind::Parse, path + ": " + e.what());
    throw;
  }
}

int cmd_compare(const RunConfig& c) {
  if (!c.compare.report_a || !c.compare.report_b) {
    throw ValidationError("/compare/report_a", "two report paths are required");
  }
  const auto a = load_report(*c.compare.report_a);
  const auto b = load_report(*c.compare.report_b);
  const auto& fa = pick_family(a, c.compare.family_a);
  const auto& fb = pick_family(b, c.compare.family_b);
  const auto cmp = compare_technologies(fa.scores, fb.scores, c.compare.alpha);
  RunDir dir(c.output, stamp(c, "compare"), c.force);
  json out{{"a", {{"label", c.compare.label_a}, {"family", fa.family.name()}}},
           {"b", {{"label", c.compare.label_b}, {"family", fb.family.name()}}},
           {"comparison", to_json(cmp)}};
  write_file(dir.file("comparison.json"), out.dump(2) + "\n");
  const auto summary = comparison_summary(cmp, c.compare.label_a, c.compare.label_b);
  write_file(dir.file("comparison.txt"), summary);
  write_run_config(dir, c, "compare");
  std::cerr << summary;
  print_result(dir.commit());
  return 0;
}

std::string kind_name(const Error& e) { return std::string(to_string(e.kind())); }

int report_error(const std::string& kind, const std::string& message, const std::string& pointer = {}) {
  json err{{"kind", kind}, {"message", message}};
  if (!pointer.empty()) err["pointer"] = pointer;
  std::cerr << json{{"error", err}}.dump() << "\n";
  return kind == "io" || kind == "validation" || kind == "usage" ? kExitUsage : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory pattern classification experiments"};
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("generate", "synthesise a labelled dataset and its manifest");
  add_common(*gen, f);
  f.reg("preset", gen->add_option("--preset", f.preset, "technology preset")
                            ->check(CLI::IsMember({"gnss-like", "uwb-like"})));
  f.reg("counts", gen->add_option("--counts", f.counts, "trajectories per pattern (4 values)")->expected(4));
  f.reg("duration", gen->add_option("--duration", f.duration, "seconds per trajectory"));

  auto* feat = app.add_subcommand("featurize", "write the feature matrix of a dataset as CSV");
  add_common(*feat, f);
  add_dataset(*feat, f);
  f.reg("split", feat->add_option("--split", f.split, "segments per trajectory"));
  f.reg("placement", feat->add_option("--placement", f.placement, "noise removal placement")
                               ->check(CLI::IsMember({"none", "raw", "features"})));
  f.reg("window", feat->add_option("--window", f.window, "Savitzky-Golay window length"));
  f.reg("order", feat->add_option("--order", f.order, "Savitzky-Golay polynomial order"));
  f.reg("signed-angle", feat->add_flag("--signed-angle", f.signed_angle, "signed geodetic heading"));

  auto* opt = app.add_subcommand("optimize", "one SMBO run for a single family");
  add_common(*opt, f);
  add_dataset(*opt, f);
  add_family(*opt, f, false);
  add_budget(*opt, f);

  auto* eval = app.add_subcommand("evaluate", "bootstrapped evaluation of pipeline families");
  add_common(*eval, f);
  add_dataset(*eval, f);
  add_jobs(*eval, f);
  add_family(*eval, f, true);
  add_budget(*eval, f);
  f.reg("reps", eval->add_option("--reps", f.reps, "repetitions"));
  f.reg("runs-per-rep", eval->add_option("--runs-per-rep", f.runs_per_rep, "optimisation runs per repetition"));
  f.reg("sample-k", eval->add_option("--sample-k", f.sample_k, "incumbents sampled per repetition"));

  auto* cal = app.add_subcommand("calibrate", "sweep wallclock budgets for a single family");
  add_common(*cal, f);
  add_dataset(*cal, f);
  add_jobs(*cal, f);
  add_family(*cal, f, false);
  f.reg("folds", cal->add_option("--folds", f.folds, "cross-validation folds"));
  f.reg("step", cal->add_option("--step", f.step, "budget increment, seconds"));
  f.reg("runs", cal->add_option("--runs", f.runs, "optimisation runs per budget"));
  f.reg("max-time", cal->add_option("--max-time", f.max_time, "largest budget, seconds"));

  auto* cmp = app.add_subcommand("compare", "Mann-Whitney comparison of two evaluation reports");
  add_common(*cmp, f);
  f.reg("reports", cmp->add_option("reports", f.reports, "report A and report B")->expected(2));
  f.reg("family-a", cmp->add_option("--family-a", f.family_a, "family in report A, or \"best\""));
  f.reg("family-b", cmp->add_option("--family-b", f.family_b, "family in report B, or \"best\""));
  f.reg("alpha", cmp->add_option("--alpha", f.alpha, "significance level"));
  f.reg("labels", cmp->add_option("--labels", f.labels, "names for A and B")->expected(2));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    const auto config = effective_config(f);
    if (*gen) return cmd_generate(config);
    if (*feat) return cmd_featurize(config);
    if (*opt) return cmd_optimize(config);
    if (*eval) return cmd_evaluate(config);
    if (*cal) return cmd_calibrate(config);
    return cmd_compare(config);
  } catch (const ValidationError& e) {
    return report_error("validation", e.what(), e.pointer());
  } catch (const Error& e) {
    return report_error(kind_name(e), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
}
