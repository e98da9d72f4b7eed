// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--artifacts DIR] [N ...]
//
// With no numbers every criterion runs. Reports from criteria 7 and 8 are
// written to the artifacts directory.
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "hpo_fixtures.hpp"
#include "oracles.hpp"
#include "trajclass/dataset_io.hpp"
#include "trajclass/error.hpp"
#include "trajclass/features.hpp"
#include "trajclass/generator.hpp"
#include "trajclass/geo.hpp"
#include "trajclass/learners.hpp"
#include "trajclass/metrics.hpp"
#include "trajclass/protocol.hpp"
#include "trajclass/savgol.hpp"
#include "trajclass/smbo.hpp"
#include "trajclass/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trajclass;

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;
constexpr std::uint64_t kMasterSeed = 20240607;

// Desktop-scale limits only mean something on desktop-class hardware.
constexpr unsigned kDesktopThreads = 4;

struct Outcome {
  bool pass{false};
  std::string detail;
  // Seconds; 0 = no limit. `desktop_only` limits are skipped on small machines.
  double limit{0};
  bool desktop_only{false};
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fmt_p(double p) { return fmt("%.3g", p); }

fs::path g_artifacts = "acceptance_artifacts";

// ---------------------------------------------------------------- 1

ConfusionMatrix random_matrix(std::mt19937_64& rng, int k, int max_total) {
  ConfusionMatrix cm;
  cm.counts = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, k);
  cm.classes.resize(static_cast<std::size_t>(k));
  std::iota(cm.classes.begin(), cm.classes.end(), 0);
  const int total = static_cast<int>(rng() % static_cast<unsigned>(max_total + 1));
  // Mix of diagonal-heavy and uniform matrices so both signs of MCC appear.
  const double diag_bias = std::uniform_real_distribution<double>(0, 1)(rng);
  for (int n = 0; n < total; ++n) {
    const int i = static_cast<int>(rng() % static_cast<unsigned>(k));
    const bool on_diag = std::uniform_real_distribution<double>(0, 1)(rng) < diag_bias;
    const int j = on_diag ? i : static_cast<int>(rng() % static_cast<unsigned>(k));
    ++cm.counts(i, j);
  }
  return cm;
}

Outcome criterion_mcc() {
  std::mt19937_64 rng(1);
  double worst = 0, worst_binary = 0;
  int binary = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + trial % 3;
    const auto cm = random_matrix(rng, k, 50);
    const double m = mcc_multiclass(cm);
    worst = std::max(worst, std::abs(m - oracle::mcc_from_instances(cm)));
    if (k == 2) {
      ++binary;
      worst_binary = std::max(worst_binary, std::abs(m - oracle::binary_mcc(cm.counts(0, 0), cm.counts(0, 1),
                                                                            cm.counts(1, 0), cm.counts(1, 1))));
    }
  }
  return {worst <= 1e-12 && worst_binary <= 1e-12,
          "1000 matrices, max |diff| " + fmt("%.2g", worst) + "; " + std::to_string(binary) +
              " binary, max |diff| " + fmt("%.2g", worst_binary),
          5};
}

// ---------------------------------------------------------------- 2

Eigen::VectorXd polynomial_samples(const std::vector<double>& coef, int n, double x0, double h) {
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    const double x = x0 + h * i;
    double y = 0;
    for (auto it = coef.rbegin(); it != coef.rend(); ++it) y = y * x + *it;
    out[i] = y;
  }
  return out;
}

Outcome criterion_savgol() {
  Eigen::VectorXd expected(5);
  expected << -3, 12, 17, 12, -3;
  expected /= 35.0;
  const double weight_err = (savgol_weights<double>(5, 2, 0) - expected).cwiseAbs().maxCoeff();

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> coef(-2, 2), start(-3, 3), step(0.05, 0.3);
  int reproduced = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int window = 1 + 2 * static_cast<int>(rng() % 10);
    const int order = static_cast<int>(rng() % static_cast<unsigned>(std::min(window, 6)));
    const int n = window + static_cast<int>(rng() % 30);
    std::vector<double> c(static_cast<std::size_t>(order + 1));
    for (auto& v : c) v = coef(rng);
    const auto y = polynomial_samples(c, n, start(rng), step(rng));
    const auto out = savgol_filter(y, {window, order});
    reproduced += (out - y).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, y.cwiseAbs().maxCoeff());
  }
  std::normal_distribution<double> g;
  int linear = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int window = 1 + 2 * static_cast<int>(rng() % 14);
    const int order = static_cast<int>(rng() % static_cast<unsigned>(std::min(window, 11)));
    const int n = 1 + static_cast<int>(rng() % 60);
    Eigen::VectorXd x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = g(rng);
      y[i] = g(rng);
    }
    const double a = g(rng), b = g(rng);
    const auto p = SavGolParams::repaired(window, order);
    const Eigen::VectorXd lhs = savgol_filter(a * x + b * y, p);
    const Eigen::VectorXd rhs = a * savgol_filter(x, p) + b * savgol_filter(y, p);
    linear += (lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9;
  }
  return {weight_err <= 1e-12 && reproduced == 100 && linear == 100,
          "5/2 weight error " + fmt("%.2g", weight_err) + ", reproduction " + std::to_string(reproduced) +
              "/100, linearity " + std::to_string(linear) + "/100",
          5};
}

// ---------------------------------------------------------------- 3

double cosine_law_distance(double lat1, double lon1, double lat2, double lon2) {
  const long double p1 = lat1 * kDeg, p2 = lat2 * kDeg, dl = (lon2 - lon1) * kDeg;
  long double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
  c = std::clamp(c, -1.0L, 1.0L);
  return static_cast<double>(kEarthRadiusMeters * std::acos(c));
}

Trajectory planar(std::vector<TrajPoint> pts) {
  return Trajectory(std::move(pts), CoordinateSystem::Planar, PatternLabel::Straight, "p");
}

Outcome criterion_features() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lat0(-60, 60), lon0(-179, 179), off(0, 1);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double la = lat0(rng), lo = lon0(rng);
    const double lb = la + off(rng), lob = lo + off(rng);
    worst = std::max(worst, std::abs(haversine(la, lo, lb, lob) - cosine_law_distance(la, lo, lb, lob)));
  }
  const auto s = point_features(segment(planar({{0, 0, 0}, {3, 4, 1}}), 1).front());
  const bool hand = std::abs(s.v[1] - 5.0) < 1e-12 && std::abs(s.da[1] - 0.92730) < 5e-6;

  int bad_sizes = 0, cases = 0;
  for (int r = 2; r <= 200; ++r) {
    std::vector<TrajPoint> pts;
    for (int i = 0; i < r; ++i) pts.push_back({static_cast<double>(i), 0, static_cast<double>(i)});
    const auto traj = planar(pts);
    for (int m = 1; m <= std::min(10, r); ++m) {
      ++cases;
      const auto segs = segment(traj, m);
      const int base = r / m, extra = r % m;
      bool ok = static_cast<int>(segs.size()) == m;
      for (int i = 0; ok && i < m; ++i) {
        ok = static_cast<int>(segs[static_cast<std::size_t>(i)].points.size()) == base + (i < extra ? 1 : 0);
      }
      bad_sizes += !ok;
    }
  }
  return {worst <= 0.01 && hand && bad_sizes == 0,
          "haversine max |diff| " + fmt("%.2g", worst) + " m; 3-4-5 v=" + fmt("%.5f", s.v[1]) +
              " angle=" + fmt("%.5f", s.da[1]) + "; segmentation " + std::to_string(cases - bad_sizes) + "/" +
              std::to_string(cases),
          5};
}

// ---------------------------------------------------------------- 4

std::vector<double> normal_sample(std::mt19937_64& rng, int n, double shift = 0) {
  std::normal_distribution<double> g(shift, 1);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = g(rng);
  return out;
}

Outcome criterion_stats() {
  // Rank tests only see ranks, so enumerating rank patterns covers every tie-free case.
  double worst_w = 0;
  int w_cases = 0;
  for (int n = 1; n <= 10; ++n) {
    for (std::uint64_t signs = 0; signs < (std::uint64_t{1} << n); ++signs) {
      std::vector<double> a(static_cast<std::size_t>(n), 0.0), b(static_cast<std::size_t>(n));
      for (int r = 0; r < n; ++r) b[static_cast<std::size_t>(r)] = (signs >> r & 1) ? r + 1.0 : -(r + 1.0);
      const auto res = wilcoxon_signed_rank(a, b);
      if (res.method != TestMethod::Exact) return {false, "wilcoxon n=" + std::to_string(n) + " not exact", 60};
      worst_w = std::max(worst_w, std::abs(res.p_value - oracle::wilcoxon_enumeration(a, b)));
      ++w_cases;
    }
  }
  double worst_m = 0;
  int m_cases = 0;
  for (int n = 2; n <= 10; ++n) {
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << n); ++mask) {
      std::vector<double> a, b;
      for (int r = 0; r < n; ++r) ((mask >> r & 1) ? a : b).push_back(r + 1.0);
      const auto res = mann_whitney_u(a, b);
      if (res.method != TestMethod::Exact) return {false, "mann-whitney n=" + std::to_string(n) + " not exact", 60};
      worst_m = std::max(worst_m, std::abs(res.p_value - oracle::mann_whitney_enumeration(a, b)));
      ++m_cases;
    }
  }
  std::mt19937_64 rng(4);
  int w_reject = 0, m_reject = 0;
  const int reps = 1000;
  for (int i = 0; i < reps; ++i) {
    const auto a = normal_sample(rng, 50), b = normal_sample(rng, 50);
    w_reject += wilcoxon_signed_rank(a, b).p_value < 0.05;
    m_reject += mann_whitney_u(a, b).p_value < 0.05;
  }
  const double w_rate = w_reject / static_cast<double>(reps), m_rate = m_reject / static_cast<double>(reps);
  const bool calibrated = std::abs(w_rate - 0.05) <= 0.03 && std::abs(m_rate - 0.05) <= 0.03;
  return {worst_w <= 1e-12 && worst_m <= 1e-12 && calibrated,
          std::to_string(w_cases) + " wilcoxon patterns max |diff| " + fmt("%.2g", worst_w) + ", " +
              std::to_string(m_cases) + " mann-whitney patterns max |diff| " + fmt("%.2g", worst_m) +
              "; type-I wilcoxon " + fmt("%.3f", w_rate) + ", mann-whitney " + fmt("%.3f", m_rate),
          60};
}

// ---------------------------------------------------------------- 5

struct Data {
  Eigen::MatrixXd X;
  std::vector<int> y;
};

Data separable(int n, int dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd w(dims);
  for (int j = 0; j < dims; ++j) w[j] = g(rng);
  w.normalize();
  Data d{Eigen::MatrixXd(n, dims), {}};
  for (int i = 0; i < n;) {
    Eigen::VectorXd x(dims);
    for (int j = 0; j < dims; ++j) x[j] = g(rng);
    const double s = w.dot(x);
    if (std::abs(s) < 0.3) continue;
    d.X.row(i) = x.transpose();
    d.y.push_back(s > 0 ? 1 : 0);
    ++i;
  }
  return d;
}

Data blobs(int per_class, int classes, int dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 0.4);
  Data d{Eigen::MatrixXd(per_class * classes, dims), {}};
  for (int k = 0; k < classes; ++k) {
    for (int i = 0; i < per_class; ++i) {
      for (int j = 0; j < dims; ++j) d.X(k * per_class + i, j) = 2.0 * k + g(rng);
      d.y.push_back(k);
    }
  }
  return d;
}

double accuracy(const TrainedModel& m, const Data& d) {
  const auto pred = m.predict(d.X);
  int ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == d.y[i];
  return ok / static_cast<double>(pred.size());
}

// Largest violation of 0 <= alpha <= C and sum(alpha y) = 0 over all machines.
double dual_violation(const TrainedModel& model, int& machines) {
  double worst = 0;
  for (const auto& m : std::get<SvmModel>(model.impl()).machines()) {
    ++machines;
    double sum = 0;
    for (Eigen::Index i = 0; i < m.dual_coef.size(); ++i) {
      worst = std::max(worst, std::abs(m.dual_coef[i]) - m.C);
      sum += m.dual_coef[i];
    }
    worst = std::max(worst, std::abs(sum) - 1e-6);
  }
  return worst;
}

Outcome criterion_learners() {
  int dt_ok = 0, svm_ok = 0, machines = 0;
  double violation = -1;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = separable(80, 2 + static_cast<int>(seed % 4), 100 + seed);
    dt_ok += accuracy(dt_train(d.X, d.y, {}, seed), d) == 1.0;
    const auto svm = svm_train(d.X, d.y, {100, KernelType::Linear}, seed);
    svm_ok += accuracy(svm, d) == 1.0;
    violation = std::max(violation, dual_violation(svm, machines));
  }
  Data xor4{Eigen::MatrixXd(4, 2), {0, 1, 1, 0}};
  xor4.X << 0, 0, 0, 1, 1, 0, 1, 1;
  SvmOptions opts;
  opts.gamma = 1.0;
  const auto rbf = svm_train(xor4.X, xor4.y, {100, KernelType::Rbf}, 0, opts);
  const bool xor_ok = accuracy(rbf, xor4) == 1.0;
  violation = std::max(violation, dual_violation(rbf, machines));
  for (auto kernel : {KernelType::Linear, KernelType::Poly, KernelType::Rbf, KernelType::Sigmoid}) {
    const auto d = blobs(15, 4, 3, 7);
    violation = std::max(violation, dual_violation(svm_train(d.X, d.y, {1.0, kernel}), machines));
  }
  return {dt_ok == 10 && svm_ok == 10 && xor_ok && violation <= 1e-12,
          "DT separable " + std::to_string(dt_ok) + "/10, linear SVM " + std::to_string(svm_ok) +
              "/10, rbf XOR " + (xor_ok ? "solved" : "failed") + ", dual constraints on " +
              std::to_string(machines) + " machines (worst excess " + fmt("%.2g", std::max(0.0, violation)) + ")",
          30};
}

// ---------------------------------------------------------------- 6

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

Outcome criterion_hpo() {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = smbo_optimize(fixtures::quadratic_space(), fixtures::quadratic, Budget::evals(200), seed);
    hits += std::get<std::int64_t>(r.incumbent.at("x")) == 42;
  }
  std::vector<double> smbo, random;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    smbo.push_back(smbo_optimize(fixtures::rugged_space(), fixtures::rugged, Budget::evals(100), seed).incumbent_objective);
    random.push_back(random_search(fixtures::rugged_space(), fixtures::rugged, Budget::evals(100), seed).incumbent_objective);
  }
  const double ms = median(smbo), mr = median(random);
  return {hits >= 18 && ms <= mr,
          "quadratic optimum found in " + std::to_string(hits) + "/20 seeds; rugged median SMBO " + fmt("%.4f", ms) +
              " vs random " + fmt("%.4f", mr),
          120};
}

// ---------------------------------------------------------------- 7, 8, 10

const char* const kRaw = "rf+raw-noise";
const char* const kNone = "rf+no-noise";

struct TechnologyRun {
  EvaluationReport report;
  std::size_t n_train{0}, n_test{0};
  long leaked{0};
  long final_audits{0};
  long fold_audits{0};
};

TechnologyRun run_technology(TechPreset preset) {
  const auto data = generate_dataset(DatasetSpec{}, preset, derive_seed(kMasterSeed, {100}));
  const auto split = train_test_split(data, kTrainFraction, derive_seed(kMasterSeed, {101}));
  std::set<std::string> test_ids;
  for (const auto& t : split.test) test_ids.insert(t.id());

  TechnologyRun run;
  run.n_train = split.train.size();
  run.n_test = split.test.size();
  std::mutex m;
  ProtocolOptions options;
  options.reps = 20;
  options.runs_per_rep = 15;
  options.sample_k = 5;
  options.budget = Budget::evals(30);
  options.cv.audit = [&](const LeakageAudit& a) {
    long leaks = 0;
    for (const auto& id : a.train_parents) leaks += test_ids.count(id);
    if (a.stage == "cv-fold") {
      for (const auto& id : a.eval_parents) leaks += test_ids.count(id);
    } else {
      for (const auto& id : a.eval_parents) leaks += !test_ids.count(id);
    }
    std::lock_guard lock(m);
    run.leaked += leaks;
    (a.stage == "final" ? run.final_audits : run.fold_audits) += 1;
  };
  run.report.meta = {{"preset", to_string(preset)}, {"master_seed", kMasterSeed}, {"reps", options.reps},
                     {"runs_per_rep", options.runs_per_rep}, {"sample_k", options.sample_k},
                     {"max_evals", *options.budget.max_evals}};
  const auto master = derive_seed(kMasterSeed, {102});
  for (const char* name : {kRaw, kNone}) {
    const auto family = PipelineFamily::parse(name);
    auto r = bootstrap_family(family, split.train, split.test, options, master);
    run.report.families.push_back({family, std::move(r.scores), std::move(r.selected)});
  }
  return run;
}

std::optional<TechnologyRun> g_gnss, g_uwb;

const TechnologyRun& gnss_run() {
  if (!g_gnss) {
    g_gnss = run_technology(TechPreset::GnssLike);
    write_file(g_artifacts / "gnss_report.json", to_json(g_gnss->report).dump(2) + "\n");
    write_file(g_artifacts / "gnss_table.txt", report_table(g_gnss->report));
  }
  return *g_gnss;
}

const TechnologyRun& uwb_run() {
  if (!g_uwb) {
    g_uwb = run_technology(TechPreset::UwbLike);
    write_file(g_artifacts / "uwb_report.json", to_json(g_uwb->report).dump(2) + "\n");
    write_file(g_artifacts / "uwb_table.txt", report_table(g_uwb->report));
  }
  return *g_uwb;
}

std::vector<double> mcc_of(const FamilyReport& f) {
  std::vector<double> out;
  for (const auto& s : f.scores) out.push_back(s.mcc);
  return out;
}

Outcome criterion_noise_removal() {
  const auto& run = gnss_run();
  const auto& raw = run.report.family(kRaw);
  const auto& none = run.report.family(kNone);
  const double m_raw = summarize(raw.scores, 3).mean, m_none = summarize(none.scores, 3).mean;
  double p = 1;
  std::string note;
  try {
    p = wilcoxon_signed_rank(mcc_of(raw), mcc_of(none)).p_value;
  } catch (const Error& e) {
    note = std::string(", wilcoxon: ") + e.what();
  }
  return {m_raw > m_none && p < 0.05,
          "gnss-like mean MCC " + std::string(kRaw) + " " + fmt("%.3f", m_raw) + " vs " + kNone + " " +
              fmt("%.3f", m_none) + ", wilcoxon p=" + fmt_p(p) + note,
          30 * 60, true};
}

const FamilyReport& best_family(const EvaluationReport& r) {
  const FamilyReport* best = &r.families.front();
  for (const auto& f : r.families) {
    if (summarize(f.scores, 3).mean > summarize(best->scores, 3).mean) best = &f;
  }
  return *best;
}

Outcome criterion_technology() {
  const auto& g = best_family(gnss_run().report);
  const auto& u = best_family(uwb_run().report);
  const auto cmp = compare_technologies(g.scores, u.scores);
  write_file(g_artifacts / "comparison.json",
             json{{"a", {{"label", "gnss-like"}, {"family", g.family.name()}}},
                  {"b", {{"label", "uwb-like"}, {"family", u.family.name()}}},
                  {"comparison", to_json(cmp)}}
                     .dump(2) + "\n");
  bool all = cmp.metrics.size() == 4;
  std::string detail = "gnss " + g.family.name() + " vs uwb " + u.family.name() + ":";
  for (const auto& m : cmp.metrics) {
    const bool ok = m.mann_whitney && m.mann_whitney->p_value < 0.01 && m.mann_whitney->direction > 0;
    all = all && ok;
    detail += " " + m.metric + " p=" + (m.mann_whitney ? fmt_p(m.mann_whitney->p_value) : std::string("n/a"));
  }
  return {all, detail, 60 * 60, true};
}

Outcome criterion_leakage() {
  const auto& run = gnss_run();
  const long expected_finals = 2L * 20;
  return {run.leaked == 0 && run.final_audits == expected_finals && run.fold_audits > 0,
          std::to_string(run.fold_audits) + " fold audits and " + std::to_string(run.final_audits) +
              " final audits, " + std::to_string(run.leaked) + " leaked test ids",
          0};
}

// ---------------------------------------------------------------- 9

int run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + TRAJCLASS_CLI + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_determinism() {
  const auto root = g_artifacts / "determinism";
  fs::remove_all(root);
  const std::string common = "evaluate --preset gnss-like --family rf+raw-noise --reps 5 --evals 10 --seed 9";
  const int a = run_cli(common + " --jobs 1 --out '" + (root / "a").string() + "'");
  const int b = run_cli(common + " --jobs 3 --out '" + (root / "b").string() + "'");
  if (a != 0 || b != 0) return {false, "evaluate exited with " + std::to_string(a) + "/" + std::to_string(b), 180, true};
  auto report_in = [](const fs::path& dir) {
    for (const auto& e : fs::directory_iterator(dir)) return read_file(e.path() / "report.json");
    return std::string();
  };
  const auto ra = report_in(root / "a"), rb = report_in(root / "b");
  return {!ra.empty() && ra == rb,
          "two runs (jobs 1 and 3), report.json " + std::to_string(ra.size()) + " bytes, " +
              (ra == rb ? "byte-identical" : "different"),
          180, true};
}

struct Check {
  int number;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--artifacts" && i + 1 < argc) {
      g_artifacts = argv[++i];
    } else {
      selected.insert(std::stoi(arg));
    }
  }
  fs::create_directories(g_artifacts);

  const std::vector<Check> criteria{
      {1, "mcc oracle equivalence", criterion_mcc},
      {2, "savitzky-golay correctness", criterion_savgol},
      {3, "feature formulas", criterion_features},
      {4, "statistical tests", criterion_stats},
      {5, "learner sanity", criterion_learners},
      {6, "hpo competence", criterion_hpo},
      {7, "noise removal beats none (gnss-like)", criterion_noise_removal},
      {8, "uwb-like beats gnss-like", criterion_technology},
      {9, "protocol determinism", criterion_determinism},
      {10, "no leakage", criterion_leakage},
  };
  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  json summary = json::array();
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.1f s", secs);
    bool in_time = true;
    if (o.limit > 0) {
      if (o.desktop_only && threads < kDesktopThreads) {
        timing += fmt(", desktop limit %.0f s not enforced", o.limit) + " on " + std::to_string(threads) +
                  " hardware thread(s)";
      } else {
        in_time = secs < o.limit;
        timing += fmt(" of %.0f s allowed", o.limit);
      }
    }
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::cout << "criterion " << c.number << " [" << c.name << "]: " << (pass ? "PASS" : "FAIL") << " (" << o.detail
              << "; " << timing << ")" << std::endl;
    summary.push_back(json{{"criterion", c.number}, {"name", c.name}, {"pass", pass}, {"detail", o.detail},
                           {"seconds", secs}});
  }
  write_file(g_artifacts / "summary.json", summary.dump(2) + "\n");
  return failures == 0 ? 0 : 1;
}
