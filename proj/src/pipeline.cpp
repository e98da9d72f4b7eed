#include "trajclass/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "trajclass/error.hpp"
#include "trajclass/metrics.hpp"

namespace trajclass {

std::string_view to_string(ClassifierKind kind) noexcept {
  switch (kind) {
    case ClassifierKind::DT: return "dt";
    case ClassifierKind::RF: return "rf";
    case ClassifierKind::SVM: return "svm";
  }
  return "unknown";
}

ClassifierKind parse_classifier(std::string_view text) {
  if (text == "dt") return ClassifierKind::DT;
  if (text == "rf") return ClassifierKind::RF;
  if (text == "svm") return ClassifierKind::SVM;
  throw Error(ErrorKind::Argument, "unknown classifier '" + std::string(text) + "'");
}

namespace {

std::string_view placement_family_token(NoisePlacement p) {
  switch (p) {
    case NoisePlacement::None: return "no-noise";
    case NoisePlacement::OnRawLocation: return "raw-noise";
    case NoisePlacement::OnFeatures: return "feature-noise";
  }
  return "unknown";
}

}  // namespace

std::string PipelineFamily::name() const {
  return std::string(to_string(classifier)) + "+" + std::string(placement_family_token(placement));
}

PipelineFamily PipelineFamily::parse(std::string_view name) {
  for (const auto& f : all()) {
    if (f.name() == name) return f;
  }
  throw Error(ErrorKind::Lookup, "unknown pipeline family '" + std::string(name) + "'");
}

std::vector<PipelineFamily> PipelineFamily::all() {
  std::vector<PipelineFamily> out;
  for (auto c : {ClassifierKind::DT, ClassifierKind::RF, ClassifierKind::SVM}) {
    for (auto p : {NoisePlacement::None, NoisePlacement::OnRawLocation, NoisePlacement::OnFeatures}) {
      out.push_back({p, c});
    }
  }
  return out;
}

namespace {

std::vector<ParameterDef> pipeline_parameters() {
  using P = ParameterDef;
  using S = std::string;
  std::vector<ParamValue> windows;
  for (std::int64_t w = 1; w <= 29; w += 2) windows.emplace_back(w);
  const std::vector<ParamValue> smoothing{S("raw"), S("features")};
  const std::vector<ParamValue> criteria{S("gini"), S("entropy")};

  std::vector<ParameterDef> ps;
  ps.push_back(P::integer("split", 1, 10));
  ps.push_back(P::categorical("placement", {S("none"), S("raw"), S("features")}));
  ps.push_back(P::categorical("window_length", windows).when("placement", smoothing));
  ps.push_back(P::integer("polyorder", 1, 10).when("placement", smoothing));
  ps.push_back(P::categorical("classifier", {S("dt"), S("rf"), S("svm")}));
  ps.push_back(P::integer("dt.max_depth", 5, 50).when("classifier", {S("dt")}));
  ps.push_back(P::integer("dt.min_samples_leaf", 1, 10).when("classifier", {S("dt")}));
  ps.push_back(P::integer("dt.min_samples_split", 2, 10).when("classifier", {S("dt")}));
  ps.push_back(P::categorical("dt.criterion", criteria).when("classifier", {S("dt")}));
  ps.push_back(P::integer("rf.n_estimators", 5, 100).when("classifier", {S("rf")}));
  ps.push_back(P::integer("rf.min_samples_leaf", 1, 10).when("classifier", {S("rf")}));
  ps.push_back(P::integer("rf.max_depth", 5, 50).when("classifier", {S("rf")}));
  ps.push_back(P::integer("rf.min_samples_split", 2, 10).when("classifier", {S("rf")}));
  ps.push_back(P::categorical("rf.criterion", criteria).when("classifier", {S("rf")}));
  ps.push_back(P::real("svm.C", 0.1, 100.0).when("classifier", {S("svm")}));
  ps.push_back(P::categorical("svm.kernel", {S("linear"), S("poly"), S("rbf"), S("sigmoid")})
                   .when("classifier", {S("svm")}));
  return ps;
}

std::int64_t get_int(const Configuration& c, const std::string& name) {
  return std::get<std::int64_t>(c.at(name));
}
const std::string& get_str(const Configuration& c, const std::string& name) {
  return std::get<std::string>(c.at(name));
}

}  // namespace

ConfigurationSpace pipeline_space() { return ConfigurationSpace(pipeline_parameters()); }

ConfigurationSpace family_space(const PipelineFamily& family) {
  const std::string placement(to_string(family.placement));
  const std::string classifier(to_string(family.classifier));
  std::map<std::string, ParamValue> pinned{{"placement", placement}, {"classifier", classifier}};
  ConfigurationSpace space;
  for (auto p : pipeline_parameters()) {
    if (auto it = pinned.find(p.name); it != pinned.end()) p.choices = {it->second};
    if (p.condition) {
      auto it = pinned.find(p.condition->parent);
      if (it != pinned.end()) {
        const auto& vals = p.condition->values;
        if (std::find(vals.begin(), vals.end(), it->second) == vals.end()) continue;
        p.condition->values = {it->second};
      }
    }
    space.add(std::move(p));
  }
  return space;
}

PipelineConfig PipelineConfig::from_configuration(const Configuration& c) {
  static const ConfigurationSpace full = pipeline_space();
  full.validate(c);
  PipelineConfig out;
  out.split = static_cast<int>(get_int(c, "split"));
  out.placement = parse_noise_placement(get_str(c, "placement"));
  if (out.placement != NoisePlacement::None) {
    out.savgol = SavGolParams::repaired(static_cast<int>(get_int(c, "window_length")),
                                        static_cast<int>(get_int(c, "polyorder")));
  }
  out.classifier = parse_classifier(get_str(c, "classifier"));
  auto tree = [&](const std::string& prefix) {
    DTParams p;
    p.max_depth = static_cast<int>(get_int(c, prefix + ".max_depth"));
    p.min_samples_leaf = static_cast<int>(get_int(c, prefix + ".min_samples_leaf"));
    p.min_samples_split = static_cast<int>(get_int(c, prefix + ".min_samples_split"));
    p.criterion = parse_criterion(get_str(c, prefix + ".criterion"));
    return p;
  };
  switch (out.classifier) {
    case ClassifierKind::DT: out.params = tree("dt"); break;
    case ClassifierKind::RF:
      out.params = RFParams{static_cast<int>(get_int(c, "rf.n_estimators")), tree("rf")};
      break;
    case ClassifierKind::SVM:
      out.params = SVMParams{std::get<double>(c.at("svm.C")), parse_kernel(get_str(c, "svm.kernel"))};
      break;
  }
  return out;
}

Configuration PipelineConfig::to_configuration() const {
  Configuration c;
  c["split"] = std::int64_t{split};
  c["placement"] = std::string(to_string(placement));
  if (savgol) {
    c["window_length"] = std::int64_t{savgol->window_length};
    c["polyorder"] = std::int64_t{std::max(1, savgol->polyorder)};
  }
  c["classifier"] = std::string(to_string(classifier));
  auto tree = [&](const std::string& prefix, const DTParams& p) {
    c[prefix + ".max_depth"] = std::int64_t{p.max_depth};
    c[prefix + ".min_samples_leaf"] = std::int64_t{p.min_samples_leaf};
    c[prefix + ".min_samples_split"] = std::int64_t{p.min_samples_split};
    c[prefix + ".criterion"] = std::string(to_string(p.criterion));
  };
  if (const auto* dt = std::get_if<DTParams>(&params)) tree("dt", *dt);
  if (const auto* rf = std::get_if<RFParams>(&params)) {
    c["rf.n_estimators"] = std::int64_t{rf->n_estimators};
    tree("rf", rf->tree);
  }
  if (const auto* svm = std::get_if<SVMParams>(&params)) {
    c["svm.C"] = svm->C;
    c["svm.kernel"] = std::string(to_string(svm->kernel));
  }
  return c;
}

nlohmann::json to_json(const PipelineConfig& config) {
  return configuration_to_json(config.to_configuration());
}

PipelineConfig sample_config(const ConfigurationSpace& space, Rng& rng) {
  return PipelineConfig::from_configuration(space.sample(rng));
}

InstanceSet build_instances(std::span<const Trajectory> trajectories, const PipelineConfig& config,
                            const FeatureOptions& options) {
  std::vector<FeatureInstance> instances;
  instances.reserve(trajectories.size() * static_cast<std::size_t>(config.split));
  const SavGolParams savgol = config.savgol.value_or(SavGolParams{});
  for (const auto& raw : trajectories) {
    const Trajectory traj = config.placement == NoisePlacement::OnRawLocation
                                ? apply_placement(raw, config.placement, savgol)
                                : raw;
    for (const auto& seg : segment(traj, config.split)) {
      auto streams = point_features(seg, options);
      if (config.placement == NoisePlacement::OnFeatures) {
        streams = apply_placement(streams, config.placement, savgol);
      }
      instances.push_back(instance_vector(streams, traj.label(), traj.id()));
    }
  }
  return stack_instances(instances);
}

TrainedModel train_classifier(const PipelineConfig& config, const Eigen::MatrixXd& X,
                              std::span<const int> y, std::uint64_t seed) {
  return std::visit(
      [&](const auto& p) -> TrainedModel {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DTParams>) return dt_train(X, y, p, seed);
        if constexpr (std::is_same_v<T, RFParams>) return rf_train(X, y, p, seed);
        if constexpr (std::is_same_v<T, SVMParams>) return svm_train(X, y, p, seed);
      },
      config.params);
}

ScoreTuple score_predictions(std::span<const int> y_true, std::span<const int> y_pred) {
  std::vector<int> classes(y_true.begin(), y_true.end());
  classes.insert(classes.end(), y_pred.begin(), y_pred.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  const auto cm = confusion(y_true, y_pred, classes);
  const auto m = macro_prf(cm);
  return {m.precision, m.recall, m.f1, mcc_multiclass(cm), false, {}};
}

ScoreTuple evaluate_config(const PipelineConfig& config, std::span<const Trajectory> train,
                           std::span<const Trajectory> test, std::uint64_t seed,
                           const AuditHook& audit) {
  const auto train_set = build_instances(train, config);
  const auto test_set = build_instances(test, config);
  if (audit) audit({"final", train_set.parent_ids, test_set.parent_ids});
  const auto scaler = MinMaxScaler::fit(train_set.X);
  const auto model = train_classifier(config, scaler.apply(train_set.X), train_set.y, seed);
  const auto pred = model.predict(scaler.apply(test_set.X));
  return score_predictions(test_set.y, pred);
}

std::vector<int> stratified_folds(std::span<const int> y, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::Argument, "need at least 2 folds");
  if (y.size() < static_cast<std::size_t>(folds)) {
    throw Error(ErrorKind::Stratification, std::to_string(y.size()) + " instances cannot fill " +
                                               std::to_string(folds) + " folds");
  }
  std::vector<int> classes(y.begin(), y.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  Rng rng(seed);
  std::vector<int> fold(y.size(), -1);
  std::size_t next = 0;
  for (int c : classes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) members.push_back(i);
    }
    if (members.size() < 2) {
      throw Error(ErrorKind::Stratification,
                  "class " + std::to_string(c) + " would be absent from a training fold");
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (auto i : members) fold[i] = static_cast<int>(next++ % static_cast<std::size_t>(folds));
  }
  return fold;
}

CvObjective::CvObjective(std::vector<Trajectory> train, CvOptions options)
    : train_(std::move(train)), options_(std::move(options)) {}

std::shared_ptr<const InstanceSet> CvObjective::instances(const PipelineConfig& config) const {
  const auto key = std::make_tuple(config.split, static_cast<int>(config.placement),
                                   config.savgol ? config.savgol->window_length : 0,
                                   config.savgol ? config.savgol->polyorder : 0);
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto built = std::make_shared<const InstanceSet>(build_instances(train_, config, options_.features));
  std::lock_guard lock(mutex_);
  return cache_.try_emplace(key, std::move(built)).first->second;
}

TrialRecord CvObjective::operator()(const PipelineConfig& config, std::uint64_t seed) const {
  const auto start = std::chrono::steady_clock::now();
  const auto inst = instances(config);
  const auto fold = stratified_folds(inst->y, options_.folds, seed);

  TrialRecord record;
  record.config = config.to_configuration();
  record.seed = seed;
  for (int f = 0; f < options_.folds; ++f) {
    std::vector<Eigen::Index> tr, te;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      (fold[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
    }
    std::vector<int> ytr, yte;
    for (auto i : tr) ytr.push_back(inst->y[static_cast<std::size_t>(i)]);
    for (auto i : te) yte.push_back(inst->y[static_cast<std::size_t>(i)]);
    if (options_.audit) {
      LeakageAudit audit{"cv-fold", {}, {}};
      for (auto i : tr) audit.train_parents.push_back(inst->parent_ids[static_cast<std::size_t>(i)]);
      for (auto i : te) audit.eval_parents.push_back(inst->parent_ids[static_cast<std::size_t>(i)]);
      options_.audit(audit);
    }
    const Eigen::MatrixXd Xtr = inst->X(tr, Eigen::all);
    const Eigen::MatrixXd Xte = inst->X(te, Eigen::all);
    const auto scaler = MinMaxScaler::fit(Xtr);
    const auto model = train_classifier(config, scaler.apply(Xtr), ytr,
                                        derive_seed(seed, {static_cast<std::uint64_t>(f)}));
    const auto pred = model.predict(scaler.apply(Xte));
    record.fold_scores.push_back(score_predictions(yte, pred).mcc);
  }
  const double mean = std::accumulate(record.fold_scores.begin(), record.fold_scores.end(), 0.0) /
                      static_cast<double>(record.fold_scores.size());
  record.objective = 1.0 - mean;
  record.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

TrialRecord cv_objective(const PipelineConfig& config, std::span<const Trajectory> train,
                         std::uint64_t seed, const CvOptions& options) {
  CvObjective objective(std::vector<Trajectory>(train.begin(), train.end()), options);
  return objective(config, seed);
}

}  // namespace trajclass
