#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "learner_detail.hpp"
#include "trajclass/error.hpp"
#include "trajclass/learners.hpp"
#include "trajclass/random.hpp"

namespace trajclass {

std::string_view to_string(Criterion criterion) noexcept {
  return criterion == Criterion::Gini ? "gini" : "entropy";
}

Criterion parse_criterion(std::string_view text) {
  if (text == "gini") return Criterion::Gini;
  if (text == "entropy") return Criterion::Entropy;
  throw Error(ErrorKind::Argument, "unknown criterion '" + std::string(text) + "'");
}

void DTParams::validate() const {
  if (max_depth < 1) throw Error(ErrorKind::Parameter, "max_depth must be >= 1");
  if (min_samples_leaf < 1) throw Error(ErrorKind::Parameter, "min_samples_leaf must be >= 1");
  if (min_samples_split < 2) throw Error(ErrorKind::Parameter, "min_samples_split must be >= 2");
}

void RFParams::validate() const {
  if (n_estimators < 1) throw Error(ErrorKind::Parameter, "n_estimators must be >= 1");
  tree.validate();
}

double impurity(std::span<const int> class_counts, Criterion criterion) {
  const double n = std::accumulate(class_counts.begin(), class_counts.end(), 0.0);
  if (n <= 0) return 0.0;
  double out = criterion == Criterion::Gini ? 1.0 : 0.0;
  for (int c : class_counts) {
    if (c == 0) continue;
    const double p = c / n;
    out -= criterion == Criterion::Gini ? p * p : p * std::log2(p);
  }
  return out;
}

int DecisionTree::predict_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int at = 0;
  for (;;) {
    const auto& node = nodes_[static_cast<std::size_t>(at)];
    if (node.feature < 0) return node.value;
    at = row[node.feature] <= node.threshold ? node.left : node.right;
  }
}

int DecisionTree::depth() const {
  std::vector<int> depth(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    best = std::max(best, depth[i]);
    if (node.feature >= 0) {
      depth[static_cast<std::size_t>(node.left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(node.right)] = depth[i] + 1;
    }
  }
  return best;
}

bool operator==(const DecisionTree::Node& a, const DecisionTree::Node& b) {
  return a.feature == b.feature && a.threshold == b.threshold && a.left == b.left &&
         a.right == b.right && a.value == b.value;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) { return a.nodes_ == b.nodes_; }

int RandomForest::predict_index(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                                int n_classes) const {
  std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
  for (const auto& tree : trees_) ++votes[static_cast<std::size_t>(tree.predict_index(row))];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

namespace detail {

namespace {

// Nodes are split depth-first; the distinct samples of a node form a
// contiguous range and bootstrap duplicates are carried as integer weights.
class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& X, std::span<const int> y, int n_classes,
              const DTParams& params, int max_features, Rng* rng)
      : X_(X), y_(y), n_classes_(n_classes), params_(params), max_features_(max_features),
        rng_(rng) {
    const auto n = static_cast<std::size_t>(X.rows());
    weight_.assign(n, 0);
    entries_.resize(n);
    left_counts_.resize(static_cast<std::size_t>(n_classes));
    features_.resize(static_cast<std::size_t>(X.cols()));
  }

  DecisionTree build(const std::vector<int>& samples) {
    std::fill(weight_.begin(), weight_.end(), 0);
    for (int s : samples) ++weight_[static_cast<std::size_t>(s)];
    samples_.clear();
    for (std::size_t i = 0; i < weight_.size(); ++i) {
      if (weight_[i] > 0) samples_.push_back(static_cast<int>(i));
    }
    // c * log2(c) lookup for entropy on integer counts.
    xlogx_.assign(samples.size() + 1, 0.0);
    for (std::size_t c = 2; c < xlogx_.size(); ++c) {
      xlogx_[c] = static_cast<double>(c) * std::log2(static_cast<double>(c));
    }
    nodes_.clear();
    grow(0, samples_.size(), 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  struct Split {
    int feature{-1};
    double threshold{0};
    double score{std::numeric_limits<double>::infinity()};  // weighted child impurity
  };

  struct Entry {
    double value;
    int cls;
    int weight;
  };

  void evaluate_feature(int f, std::size_t begin, std::size_t end, const std::vector<int>& counts,
                        int total, Split& best) {
    const auto m = end - begin;
    const auto col = X_.col(f);
    for (std::size_t i = begin; i < end; ++i) {
      const auto s = static_cast<std::size_t>(samples_[i]);
      entries_[i - begin] = {col[static_cast<Eigen::Index>(s)], y_[s], weight_[s]};
    }
    auto* first = entries_.data();
    std::sort(first, first + m, [](const Entry& a, const Entry& b) { return a.value < b.value; });
    std::fill(left_counts_.begin(), left_counts_.end(), 0);
    std::vector<int>& right = right_counts_;
    right = counts;
    // Per side, gini needs sum c^2 and entropy needs sum c*log2(c); both are
    // updated in O(1) as samples move left.
    const bool gini = params_.criterion == Criterion::Gini;
    auto term = [&](int c) {
      return gini ? static_cast<double>(c) * c : xlogx_[static_cast<std::size_t>(c)];
    };
    double left_sum = 0;
    double right_sum = 0;
    for (int c : right) right_sum += term(c);
    const int min_leaf = params_.min_samples_leaf;
    int n_left = 0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const auto cls = static_cast<std::size_t>(first[k].cls);
      const int w = first[k].weight;
      left_sum += term(left_counts_[cls] + w) - term(left_counts_[cls]);
      right_sum += term(right[cls] - w) - term(right[cls]);
      left_counts_[cls] += w;
      right[cls] -= w;
      n_left += w;
      const double lo = first[k].value;
      const double hi = first[k + 1].value;
      if (!(lo < hi)) continue;
      const int n_right = total - n_left;
      if (n_left < min_leaf || n_right < min_leaf) continue;
      const double score = gini ? (n_left - left_sum / n_left) + (n_right - right_sum / n_right)
                                : (xlogx_[static_cast<std::size_t>(n_left)] - left_sum) +
                                      (xlogx_[static_cast<std::size_t>(n_right)] - right_sum);
      if (score < best.score) {
        double threshold = lo + (hi - lo) / 2;
        if (!(threshold < hi)) threshold = lo;
        best = {f, threshold, score};
      }
    }
  }

  Split find_split(std::size_t begin, std::size_t end, const std::vector<int>& counts, int total) {
    Split best;
    const int d = static_cast<int>(X_.cols());
    if (max_features_ >= d || rng_ == nullptr) {
      for (int f = 0; f < d; ++f) evaluate_feature(f, begin, end, counts, total, best);
      return best;
    }
    std::iota(features_.begin(), features_.end(), 0);
    std::shuffle(features_.begin(), features_.end(), *rng_);
    // Candidates are scanned in ascending index order so ties keep the lowest feature.
    std::sort(features_.begin(), features_.begin() + max_features_);
    for (int i = 0; i < max_features_; ++i) {
      evaluate_feature(features_[static_cast<std::size_t>(i)], begin, end, counts, total, best);
    }
    // No valid partition among the drawn features: keep drawing until one is found.
    for (int i = max_features_; i < d && best.feature < 0; ++i) {
      evaluate_feature(features_[static_cast<std::size_t>(i)], begin, end, counts, total, best);
    }
    return best;
  }

  int grow(std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    std::vector<int> counts(static_cast<std::size_t>(n_classes_), 0);
    int n = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto s = static_cast<std::size_t>(samples_[i]);
      counts[static_cast<std::size_t>(y_[s])] += weight_[s];
      n += weight_[s];
    }
    const int majority =
        static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    nodes_[static_cast<std::size_t>(id)].value = majority;

    const bool pure = counts[static_cast<std::size_t>(majority)] == n;
    if (pure || depth >= params_.max_depth || n < params_.min_samples_split) return id;

    const Split split = find_split(begin, end, counts, n);
    if (split.feature < 0) return id;

    const auto col = X_.col(split.feature);
    auto mid = std::stable_partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                     samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                     [&](int s) { return col[s] <= split.threshold; });
    const auto cut = static_cast<std::size_t>(mid - samples_.begin());
    const int left = grow(begin, cut, depth + 1);
    const int right = grow(cut, end, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  const Eigen::MatrixXd& X_;
  std::span<const int> y_;
  int n_classes_;
  DTParams params_;
  int max_features_;
  Rng* rng_;
  std::vector<double> xlogx_;
  std::vector<int> weight_;
  std::vector<int> samples_;
  std::vector<Entry> entries_;
  std::vector<int> left_counts_;
  std::vector<int> right_counts_;
  std::vector<int> features_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

LabelEncoding encode_labels(const Eigen::MatrixXd& X, std::span<const int> y) {
  if (X.rows() == 0 || y.empty()) throw Error(ErrorKind::Training, "empty training set");
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw Error(ErrorKind::Shape, "feature matrix has " + std::to_string(X.rows()) +
                                      " rows but " + std::to_string(y.size()) + " labels");
  }
  if (!X.allFinite()) throw Error(ErrorKind::Training, "non-finite training feature");
  LabelEncoding enc;
  enc.classes.assign(y.begin(), y.end());
  std::sort(enc.classes.begin(), enc.classes.end());
  enc.classes.erase(std::unique(enc.classes.begin(), enc.classes.end()), enc.classes.end());
  enc.index.reserve(y.size());
  for (int label : y) {
    enc.index.push_back(static_cast<int>(
        std::lower_bound(enc.classes.begin(), enc.classes.end(), label) - enc.classes.begin()));
  }
  return enc;
}

DecisionTree build_tree(const Eigen::MatrixXd& X, std::span<const int> y_index, int n_classes,
                        const DTParams& params, std::vector<int> samples, int max_features,
                        Rng* rng) {
  TreeBuilder builder(X, y_index, n_classes, params, max_features, rng);
  return builder.build(samples);
}

}  // namespace detail

TrainedModel dt_train(const Eigen::MatrixXd& X, std::span<const int> y, const DTParams& params,
                      std::uint64_t /*seed*/) {
  params.validate();
  auto enc = detail::encode_labels(X, y);
  std::vector<int> samples(static_cast<std::size_t>(X.rows()));
  std::iota(samples.begin(), samples.end(), 0);
  auto tree = detail::build_tree(X, enc.index, static_cast<int>(enc.classes.size()), params,
                                 std::move(samples), static_cast<int>(X.cols()), nullptr);
  return TrainedModel(std::move(tree), std::move(enc.classes), static_cast<int>(X.cols()));
}

TrainedModel rf_train(const Eigen::MatrixXd& X, std::span<const int> y, const RFParams& params,
                      std::uint64_t seed, const RFOptions& options) {
  params.validate();
  auto enc = detail::encode_labels(X, y);
  const auto n = static_cast<int>(X.rows());
  const auto d = static_cast<int>(X.cols());
  const int max_features =
      options.feature_subsampling ? static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))))
                                  : d;
  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(params.n_estimators));
  for (int t = 0; t < params.n_estimators; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    std::vector<int> samples(static_cast<std::size_t>(n));
    if (options.bootstrap) {
      std::uniform_int_distribution<int> pick(0, n - 1);
      for (auto& s : samples) s = pick(rng);
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    trees.push_back(detail::build_tree(X, enc.index, static_cast<int>(enc.classes.size()),
                                       params.tree, std::move(samples), max_features, &rng));
  }
  return TrainedModel(RandomForest(std::move(trees)), std::move(enc.classes), d);
}

}  // namespace trajclass
