#include "trajclass/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <thread>

#include "trajclass/error.hpp"
#include "trajclass/random.hpp"

namespace trajclass {

using nlohmann::json;

TrainTestSplit train_test_split(std::span<const Trajectory> dataset, double fraction,
                                std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::Split, "training fraction must lie strictly between 0 and 1");
  }
  Rng rng(seed);
  std::vector<bool> to_train(dataset.size(), false);
  for (int k = 0; k < kNumPatterns; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (static_cast<int>(dataset[i].label()) == k) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < 2) {
      throw Error(ErrorKind::Split, "class " + std::string(to_string(static_cast<PatternLabel>(k))) +
                                        " has fewer than 2 trajectories");
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto count = static_cast<long>(members.size());
    const long n_train = std::clamp(std::lround(fraction * static_cast<double>(count)), 1L, count - 1);
    for (long i = 0; i < n_train; ++i) to_train[members[static_cast<std::size_t>(i)]] = true;
  }
  TrainTestSplit split;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (to_train[i] ? split.train : split.test).push_back(dataset[i]);
  }
  if (split.train.empty() || split.test.empty()) throw Error(ErrorKind::Split, "empty dataset");
  return split;
}

double metric_value(const ScoreTuple& score, std::size_t metric) {
  switch (metric) {
    case 0: return score.precision;
    case 1: return score.recall;
    case 2: return score.f1;
    case 3: return score.mcc;
    default: throw Error(ErrorKind::Argument, "metric index out of range");
  }
}

void ProtocolOptions::validate() const {
  if (reps < 1) throw Error(ErrorKind::Argument, "reps must be >= 1");
  if (runs_per_rep < 1) throw Error(ErrorKind::Argument, "runs_per_rep must be >= 1");
  if (sample_k < 1 || sample_k > runs_per_rep) {
    throw Error(ErrorKind::Argument, "sample_k must lie in [1, runs_per_rep]");
  }
  if (jobs < 0) throw Error(ErrorKind::Argument, "jobs must be >= 0");
  budget.validate();
}

namespace {

int worker_count(int jobs, int tasks) {
  int n = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, std::max(1, tasks));
}

// Runs task(i) for i in [0, n) on `jobs` workers; results are addressed by index.
template <typename Task>
void parallel_for(int n, int jobs, Task&& task) {
  const int workers = worker_count(jobs, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) task(i);
    });
  }
  for (auto& t : pool) t.join();
}

Optimizer resolve_optimizer(const ProtocolOptions& options) {
  if (options.optimizer) return options.optimizer;
  return [smbo = options.smbo](const ConfigurationSpace& space, const Objective& objective,
                               const Budget& budget, std::uint64_t seed) {
    return smbo_optimize(space, objective, budget, seed, smbo);
  };
}

Objective family_objective(const PipelineFamily& family, const CvObjective& cv) {
  return [family, &cv](const Configuration& c, std::uint64_t seed) {
    const auto config = PipelineConfig::from_configuration(c);
    if (config.family() != family) {
      throw Error(ErrorKind::Usage, "configuration outside family " + family.name());
    }
    return cv(config, seed);
  };
}

ScoreTuple failed_score(const std::string& message) {
  ScoreTuple s;
  s.failed = true;
  s.error = message;
  return s;
}

AuditHook serialized(const AuditHook& hook, std::mutex& mutex) {
  if (!hook) return {};
  return [&hook, &mutex](const LeakageAudit& audit) {
    std::lock_guard lock(mutex);
    hook(audit);
  };
}

}  // namespace

BootstrapResult bootstrap_family(const PipelineFamily& family, std::span<const Trajectory> train,
                                 std::span<const Trajectory> test, const ProtocolOptions& options,
                                 std::uint64_t master_seed) {
  options.validate();
  if (train.empty() || test.empty()) throw Error(ErrorKind::Argument, "empty train or test set");

  std::mutex audit_mutex;
  const AuditHook audit = serialized(options.cv.audit, audit_mutex);
  CvOptions cv_options = options.cv;
  cv_options.audit = audit;
  const CvObjective cv({train.begin(), train.end()}, cv_options);
  const auto space = family_space(family);
  const auto objective = family_objective(family, cv);
  const auto optimize = resolve_optimizer(options);

  const auto reps = static_cast<std::size_t>(options.reps);
  BootstrapResult result;
  result.scores.resize(reps);
  result.selected.resize(reps);
  result.selected_objective.assign(reps, 1.0);

  parallel_for(options.reps, options.jobs, [&](int rep) {
    const auto r = static_cast<std::uint64_t>(rep);
    const auto slot = static_cast<std::size_t>(rep);
    try {
      std::vector<SmboResult> runs;
      runs.reserve(static_cast<std::size_t>(options.runs_per_rep));
      for (int run = 0; run < options.runs_per_rep; ++run) {
        runs.push_back(optimize(space, objective, options.budget,
                                derive_seed(master_seed, {r, 0, static_cast<std::uint64_t>(run)})));
      }
      std::vector<std::size_t> order(runs.size());
      std::iota(order.begin(), order.end(), 0);
      Rng rng(derive_seed(master_seed, {r, 1}));
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(static_cast<std::size_t>(options.sample_k));
      std::sort(order.begin(), order.end());
      std::size_t best = order.front();
      for (auto i : order) {
        if (runs[i].incumbent_objective < runs[best].incumbent_objective) best = i;
      }
      result.selected[slot] = runs[best].incumbent;
      result.selected_objective[slot] = runs[best].incumbent_objective;
      const auto config = PipelineConfig::from_configuration(runs[best].incumbent);
      result.scores[slot] = evaluate_config(config, train, test, derive_seed(master_seed, {r, 2}), audit);
    } catch (const std::exception& e) {
      result.scores[slot] = failed_score(e.what());
    }
  });
  return result;
}

CalibrationResult wallclock_calibration(const BudgetScorer& scorer, double step, int runs,
                                        double max_time, std::uint64_t seed) {
  if (!(step > 0)) throw Error(ErrorKind::Argument, "step must be > 0");
  if (!(max_time >= step)) throw Error(ErrorKind::Argument, "max_time must be >= step");
  if (runs < 1) throw Error(ErrorKind::Argument, "runs must be >= 1");
  const auto rows = static_cast<int>(std::floor(max_time / step + 1e-9));
  CalibrationResult result;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < rows; ++i) {
    const double wallclock = step * (i + 1);
    double sum = 0;
    for (int run = 0; run < runs; ++run) {
      double mcc = 0;
      try {
        mcc = scorer(Budget::wallclock(wallclock),
                     derive_seed(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(run)}));
      } catch (const std::exception&) {
        mcc = 0;
      }
      sum += mcc;
    }
    result.rows.push_back({wallclock, sum / runs});
    best = std::max(best, result.rows.back().mean_mcc);
  }
  for (const auto& row : result.rows) {
    if (row.mean_mcc >= best - kPlateauTolerance) {
      result.chosen = row.wallclock;
      break;
    }
  }
  return result;
}

CalibrationResult wallclock_calibration(const PipelineFamily& family,
                                        std::span<const Trajectory> train,
                                        std::span<const Trajectory> test, double step, int runs,
                                        double max_time, const ProtocolOptions& options,
                                        std::uint64_t seed) {
  const CvObjective cv({train.begin(), train.end()}, options.cv);
  const auto space = family_space(family);
  const auto objective = family_objective(family, cv);
  const auto optimize = resolve_optimizer(options);
  auto scorer = [&](const Budget& budget, std::uint64_t run_seed) {
    const auto found = optimize(space, objective, budget, run_seed);
    const auto config = PipelineConfig::from_configuration(found.incumbent);
    const auto score = evaluate_config(config, train, test, derive_seed(run_seed, {2}));
    return score.mcc;
  };
  return wallclock_calibration(scorer, step, runs, max_time, seed);
}

json to_json(const CalibrationResult& result) {
  json rows = json::array();
  for (const auto& r : result.rows) rows.push_back({{"wallclock", r.wallclock}, {"mean_mcc", r.mean_mcc}});
  return {{"rows", rows}, {"chosen_wallclock", result.chosen}};
}

namespace {

std::vector<double> metric_column(std::span<const ScoreTuple> scores, std::size_t metric) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back(metric_value(s, metric));
  return out;
}

std::optional<AndersonDarlingResult> try_normality(std::span<const double> x, bool& degenerate) {
  try {
    return anderson_darling_normality(x);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::DegenerateSample) degenerate = true;
    else if (e.kind() != ErrorKind::SampleSize) throw;
  }
  return std::nullopt;
}

json normality_json(const std::optional<AndersonDarlingResult>& r, bool degenerate) {
  if (!r) return {{"status", degenerate ? "degenerate" : "too-small"}};
  return {{"status", "ok"},       {"a2", r->a2},           {"statistic", r->statistic},
          {"p_lower", r->p_lower}, {"p_upper", r->p_upper}, {"normal_at_0.05", r->normal_at(0.05)}};
}

json test_json(const TestResult& t) {
  return {{"statistic", t.statistic}, {"p_value", t.p_value}, {"method", to_string(t.method)},
          {"n", t.n}, {"n2", t.n2}, {"direction", t.direction}};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string scientific(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

TechnologyComparison compare_technologies(std::span<const ScoreTuple> a,
                                          std::span<const ScoreTuple> b, double alpha) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::Argument, "comparison needs non-empty samples");
  if (!(alpha > 0 && alpha < 1)) throw Error(ErrorKind::Argument, "alpha must lie in (0, 1)");
  TechnologyComparison out;
  out.alpha = alpha;
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    MetricComparison mc;
    mc.metric = std::string(kMetricNames[m]);
    const auto xa = metric_column(a, m);
    const auto xb = metric_column(b, m);
    mc.normality_a = try_normality(xa, mc.degenerate_a);
    mc.normality_b = try_normality(xb, mc.degenerate_b);
    try {
      mc.mann_whitney = mann_whitney_u(xa, xb);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateSample) throw;
    }
    if (mc.mann_whitney) {
      mc.significant = mc.mann_whitney->p_value < alpha;
      mc.significant_99 = mc.mann_whitney->p_value < 0.01;
    }
    out.metrics.push_back(std::move(mc));
  }
  return out;
}

json to_json(const TechnologyComparison& comparison) {
  json metrics = json::array();
  for (const auto& m : comparison.metrics) {
    metrics.push_back({{"metric", m.metric},
                       {"normality_a", normality_json(m.normality_a, m.degenerate_a)},
                       {"normality_b", normality_json(m.normality_b, m.degenerate_b)},
                       {"mann_whitney", m.mann_whitney ? test_json(*m.mann_whitney) : json(nullptr)},
                       {"significant", m.significant},
                       {"significant_0.01", m.significant_99}});
  }
  return {{"alpha", comparison.alpha}, {"metrics", metrics}};
}

std::string comparison_summary(const TechnologyComparison& comparison, std::string_view label_a,
                               std::string_view label_b) {
  std::string out;
  for (const auto& m : comparison.metrics) {
    out += m.metric + ": ";
    if (!m.mann_whitney) {
      out += "degenerate (all values tied), no test\n";
      continue;
    }
    const auto p = scientific(m.mann_whitney->p_value);
    if (!m.significant) {
      out += "no significant difference (p=" + p + ")\n";
      continue;
    }
    const auto winner = m.mann_whitney->direction > 0 ? label_b : label_a;
    out += std::string(winner) + " higher (p=" + p + ", significant at " +
           (m.significant_99 ? std::string("0.01") : fixed(comparison.alpha, 2)) + ")\n";
  }
  return out;
}

const FamilyReport& EvaluationReport::family(std::string_view name) const {
  for (const auto& f : families) {
    if (f.family.name() == name) return f;
  }
  throw Error(ErrorKind::Lookup, "family " + std::string(name) + " not in report");
}

MeanStd summarize(std::span<const ScoreTuple> scores, std::size_t metric) {
  if (scores.empty()) return {};
  const auto x = metric_column(scores, metric);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(x.size()))};
}

json to_json(const EvaluationReport& report) {
  json families = json::array();
  for (const auto& f : report.families) {
    json scores = json::object(), summary = json::object(), normality = json::object();
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      const std::string key(kMetricNames[m]);
      const auto col = metric_column(f.scores, m);
      scores[key] = col;
      const auto ms = summarize(f.scores, m);
      summary[key] = {{"mean", ms.mean}, {"std", ms.std}};
      bool degenerate = false;
      const auto ad = try_normality(col, degenerate);
      normality[key] = normality_json(ad, degenerate);
    }
    json failed = json::array(), errors = json::array(), selected = json::array();
    for (const auto& s : f.scores) {
      failed.push_back(s.failed);
      errors.push_back(s.error);
    }
    for (const auto& c : f.selected) selected.push_back(configuration_to_json(c));
    families.push_back({{"family", f.family.name()}, {"scores", scores}, {"failed", failed},
                        {"errors", errors}, {"summary", summary}, {"normality", normality},
                        {"selected", selected}});
  }
  json wilcoxon = json::object();
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    json pairs = json::array();
    for (std::size_t i = 0; i < report.families.size(); ++i) {
      for (std::size_t j = i + 1; j < report.families.size(); ++j) {
        const auto& fa = report.families[i];
        const auto& fb = report.families[j];
        json entry = {{"a", fa.family.name()}, {"b", fb.family.name()}};
        const auto xa = metric_column(fa.scores, m);
        const auto xb = metric_column(fb.scores, m);
        entry["test"] = nullptr;
        entry["p_value"] = nullptr;
        if (xa.size() == xb.size() && !xa.empty()) {
          try {
            const auto t = wilcoxon_signed_rank(xa, xb);
            entry["test"] = test_json(t);
            entry["p_value"] = t.p_value;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateSample) throw;
          }
        }
        pairs.push_back(std::move(entry));
      }
    }
    wilcoxon[std::string(kMetricNames[m])] = std::move(pairs);
  }
  return {{"format", "trajclass-report"}, {"version", 1}, {"meta", report.meta},
          {"families", families}, {"wilcoxon", wilcoxon}};
}

namespace {

const json& require(const json& obj, const std::string& key, const std::string& pointer) {
  if (!obj.is_object() || !obj.contains(key)) throw ValidationError(pointer + "/" + key, "missing");
  return obj.at(key);
}

}  // namespace

EvaluationReport report_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("", "report must be an object");
  if (require(doc, "format", "") != "trajclass-report") {
    throw ValidationError("/format", "not a trajclass report");
  }
  EvaluationReport report;
  if (doc.contains("meta")) report.meta = doc.at("meta");
  const auto& families = require(doc, "families", "");
  if (!families.is_array()) throw ValidationError("/families", "must be an array");
  for (std::size_t i = 0; i < families.size(); ++i) {
    const std::string at = "/families/" + std::to_string(i);
    const auto& f = families[i];
    const auto& name = require(f, "family", at);
    if (!name.is_string()) throw ValidationError(at + "/family", "must be a string");
    FamilyReport fr;
    try {
      fr.family = PipelineFamily::parse(name.get<std::string>());
    } catch (const Error& e) {
      throw ValidationError(at + "/family", e.what());
    }
    const auto& scores = require(f, "scores", at);
    std::optional<std::size_t> n;
    std::array<std::vector<double>, 4> cols;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      const std::string key(kMetricNames[m]);
      const auto& col = require(scores, key, at + "/scores");
      const std::string cat = at + "/scores/" + key;
      if (!col.is_array()) throw ValidationError(cat, "must be an array");
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (!col[r].is_number()) throw ValidationError(cat + "/" + std::to_string(r), "must be a number");
        cols[m].push_back(col[r].get<double>());
      }
      if (n && *n != col.size()) throw ValidationError(cat, "length differs from other metrics");
      n = col.size();
    }
    fr.scores.resize(*n);
    for (std::size_t r = 0; r < *n; ++r) {
      fr.scores[r] = {cols[0][r], cols[1][r], cols[2][r], cols[3][r], false, {}};
    }
    if (f.contains("failed")) {
      const auto& failed = f.at("failed");
      if (!failed.is_array() || failed.size() != *n) throw ValidationError(at + "/failed", "bad length");
      for (std::size_t r = 0; r < *n; ++r) fr.scores[r].failed = failed[r].get<bool>();
    }
    if (f.contains("errors")) {
      const auto& errors = f.at("errors");
      if (!errors.is_array() || errors.size() != *n) throw ValidationError(at + "/errors", "bad length");
      for (std::size_t r = 0; r < *n; ++r) fr.scores[r].error = errors[r].get<std::string>();
    }
    if (f.contains("selected")) {
      for (const auto& c : f.at("selected")) fr.selected.push_back(configuration_from_json(c));
    }
    report.families.push_back(std::move(fr));
  }
  return report;
}

EvaluationReport parse_report(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ParseError(line, std::string("malformed report JSON at byte ") + std::to_string(e.byte));
  }
  return report_from_json(doc);
}

std::string report_table(const EvaluationReport& report) {
  std::vector<const FamilyReport*> rows;
  for (const auto& f : report.families) rows.push_back(&f);
  std::stable_sort(rows.begin(), rows.end(), [](const FamilyReport* x, const FamilyReport* y) {
    return std::pair(x->family.classifier, x->family.placement) <
           std::pair(y->family.classifier, y->family.placement);
  });
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  std::string out = pad("classifier", 12) + pad("noise removal", 16);
  for (auto m : kMetricNames) out += pad(std::string(m), 18);
  out += "n\n";
  for (const auto* f : rows) {
    std::string cls(to_string(f->family.classifier));
    std::transform(cls.begin(), cls.end(), cls.begin(), [](unsigned char c) { return std::toupper(c); });
    out += pad(cls, 12) + pad(std::string(to_string(f->family.placement)), 16);
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      const auto ms = summarize(f->scores, m);
      out += pad(fixed(ms.mean, 3) + "±" + fixed(ms.std, 3), 19);
    }
    out += std::to_string(f->scores.size()) + '\n';
  }
  return out;
}

}  // namespace trajclass
