#include "trajclass/error.hpp"
#include "trajclass/learners.hpp"

namespace trajclass {

using nlohmann::json;

TrainedModel::TrainedModel(Impl impl, std::vector<int> classes, int n_features)
    : impl_(std::move(impl)), classes_(std::move(classes)), n_features_(n_features) {}

std::vector<int> TrainedModel::predict(const Eigen::MatrixXd& X) const {
  if (X.rows() == 0) return {};
  if (X.cols() != n_features_) {
    throw Error(ErrorKind::Shape, "model expects " + std::to_string(n_features_) +
                                      " features, got " + std::to_string(X.cols()));
  }
  const int k = static_cast<int>(classes_.size());
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const auto row = X.row(r);
    const int idx = std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, DecisionTree>) {
            return m.predict_index(row);
          } else {
            return m.predict_index(row, k);
          }
        },
        impl_);
    out.push_back(classes_[static_cast<std::size_t>(idx)]);
  }
  return out;
}

namespace {

json node_to_json(const std::vector<DecisionTree::Node>& nodes, int at) {
  const auto& n = nodes[static_cast<std::size_t>(at)];
  if (n.feature < 0) return {{"value", n.value}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"value", n.value},
          {"left", node_to_json(nodes, n.left)},
          {"right", node_to_json(nodes, n.right)}};
}

json tree_to_json(const DecisionTree& tree) { return node_to_json(tree.nodes(), 0); }

// Rebuilds the pre-order node layout the trainer produces.
int node_from_json(const json& j, int n_features, int n_classes, int depth,
                   std::vector<DecisionTree::Node>& out) {
  if (depth > 10000) throw Error(ErrorKind::Parse, "tree nesting too deep");
  const int id = static_cast<int>(out.size());
  out.emplace_back();
  DecisionTree::Node n;
  n.value = j.at("value").get<int>();
  if (n.value < 0 || n.value >= n_classes) throw Error(ErrorKind::Parse, "leaf class out of range");
  if (j.contains("feature")) {
    n.feature = j.at("feature").get<int>();
    n.threshold = j.at("threshold").get<double>();
    if (n.feature < 0 || n.feature >= n_features) throw Error(ErrorKind::Parse, "split feature out of range");
    n.left = node_from_json(j.at("left"), n_features, n_classes, depth + 1, out);
    n.right = node_from_json(j.at("right"), n_features, n_classes, depth + 1, out);
  }
  out[static_cast<std::size_t>(id)] = n;
  return id;
}

DecisionTree tree_from_json(const json& root, int n_features, int n_classes) {
  std::vector<DecisionTree::Node> out;
  node_from_json(root, n_features, n_classes, 0, out);
  return DecisionTree(std::move(out));
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(json::array());
    auto& row = rows.back();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
  }
  return rows;
}

}  // namespace

json TrainedModel::to_json() const {
  json doc{{"format", "trajclass-model"},
           {"version", kModelFormatVersion},
           {"classes", classes_},
           {"n_features", n_features_}};
  if (const auto* tree = std::get_if<DecisionTree>(&impl_)) {
    doc["kind"] = "dt";
    doc["tree"] = tree_to_json(*tree);
  } else if (const auto* forest = std::get_if<RandomForest>(&impl_)) {
    doc["kind"] = "rf";
    json trees = json::array();
    for (const auto& t : forest->trees()) trees.push_back(tree_to_json(t));
    doc["trees"] = std::move(trees);
  } else {
    const auto& svm = std::get<SvmModel>(impl_);
    doc["kind"] = "svm";
    doc["kernel"] = {{"type", to_string(svm.kernel().type)},
                     {"gamma", svm.kernel().gamma},
                     {"degree", svm.kernel().degree},
                     {"coef0", svm.kernel().coef0}};
    json machines = json::array();
    for (const auto& m : svm.machines()) {
      machines.push_back({{"positive", m.positive},
                          {"negative", m.negative},
                          {"C", m.C},
                          {"rho", m.rho},
                          {"iterations", m.iterations},
                          {"dual_coef", std::vector<double>(m.dual_coef.data(),
                                                            m.dual_coef.data() + m.dual_coef.size())},
                          {"support", matrix_to_json(m.support)}});
    }
    doc["machines"] = std::move(machines);
  }
  return doc;
}

TrainedModel TrainedModel::from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "trajclass-model") {
      throw Error(ErrorKind::Parse, "not a trajclass model document");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorKind::Parse, "unsupported model version " + std::to_string(version));
    }
    auto classes = doc.at("classes").get<std::vector<int>>();
    const int n_features = doc.at("n_features").get<int>();
    const int k = static_cast<int>(classes.size());
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "dt") {
      return TrainedModel(tree_from_json(doc.at("tree"), n_features, k), std::move(classes),
                          n_features);
    }
    if (kind == "rf") {
      std::vector<DecisionTree> trees;
      for (const auto& t : doc.at("trees")) trees.push_back(tree_from_json(t, n_features, k));
      return TrainedModel(RandomForest(std::move(trees)), std::move(classes), n_features);
    }
    if (kind == "svm") {
      const auto& kj = doc.at("kernel");
      KernelSpec kernel{parse_kernel(kj.at("type").get<std::string>()),
                        kj.at("gamma").get<double>(), kj.at("degree").get<int>(),
                        kj.at("coef0").get<double>()};
      std::vector<BinarySvm> machines;
      for (const auto& mj : doc.at("machines")) {
        BinarySvm m;
        m.positive = mj.at("positive").get<int>();
        m.negative = mj.at("negative").get<int>();
        if (m.positive < 0 || m.positive >= k || m.negative < 0 || m.negative >= k) {
          throw Error(ErrorKind::Parse, "machine class index out of range");
        }
        m.C = mj.at("C").get<double>();
        m.rho = mj.at("rho").get<double>();
        m.iterations = mj.at("iterations").get<long>();
        const auto coef = mj.at("dual_coef").get<std::vector<double>>();
        const auto rows = mj.at("support").get<std::vector<std::vector<double>>>();
        if (coef.size() != rows.size()) throw Error(ErrorKind::Parse, "support/coef size mismatch");
        m.dual_coef = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
        m.support.resize(static_cast<Eigen::Index>(rows.size()), n_features);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (static_cast<int>(rows[r].size()) != n_features) {
            throw Error(ErrorKind::Parse, "support vector has wrong length");
          }
          for (int c = 0; c < n_features; ++c) m.support(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
        }
        machines.push_back(std::move(m));
      }
      return TrainedModel(SvmModel(kernel, std::move(machines)), std::move(classes), n_features);
    }
    throw Error(ErrorKind::Parse, "unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("model document: ") + e.what());
  }
}

}  // namespace trajclass
