#include <algorithm>
#include <numeric>

#include "fairens/ensemble.hpp"
#include "fairens/error.hpp"
#include "fairens/random.hpp"

namespace fairens {

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, int n_classes, std::size_t n_general,
                           std::size_t n_sensitive, TrainingMeta meta)
    : nodes_(std::move(nodes)),
      n_classes_(n_classes),
      n_general_(n_general),
      n_sensitive_(n_sensitive),
      meta_(std::move(meta)) {
  if (nodes_.empty()) throw Error(ErrorCode::InvalidModel, "tree has no nodes");
  if (n_classes_ < 2) throw Error(ErrorCode::InvalidModel, "tree class count below 2");
  const int n_features = static_cast<int>(n_general_ + n_sensitive_);
  const int n_nodes = static_cast<int>(nodes_.size());
  for (int i = 0; i < n_nodes; ++i) {
    const auto& node = nodes_[i];
    if (node.is_leaf()) {
      if (node.label < 0 || node.label >= n_classes_) throw Error(ErrorCode::InvalidModel, "leaf label out of range");
      continue;
    }
    if (node.feature >= n_features) throw Error(ErrorCode::InvalidModel, "split feature out of range");
    // Children always follow their parent, so prediction terminates.
    if (node.left <= i || node.right <= i || node.left >= n_nodes || node.right >= n_nodes)
      throw Error(ErrorCode::InvalidModel, "bad child index");
  }
}

ClassIndex DecisionTree::predict(std::span<const double> general, std::span<const int> sensitive) const {
  std::size_t at = 0;
  while (!nodes_[at].is_leaf()) {
    const auto& node = nodes_[at];
    const auto f = static_cast<std::size_t>(node.feature);
    const double x = f < n_general_ ? general[f] : static_cast<double>(sensitive[f - n_general_]);
    at = static_cast<std::size_t>(x <= node.threshold ? node.left : node.right);
  }
  return nodes_[at].label;
}

std::vector<ClassIndex> DecisionTree::predict(const Dataset& d) const { return predict(d, d.sensitive()); }

std::vector<ClassIndex> DecisionTree::predict(const Dataset& d, const Matrix<int>& sensitive) const {
  if (d.n_general() != n_general_ || sensitive.cols() != n_sensitive_ || sensitive.rows() != d.size())
    throw Error(ErrorCode::ShapeMismatch, "dataset layout does not match the tree");
  std::vector<ClassIndex> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = predict(d.general().row(i), sensitive.row(i));
  return out;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& d, std::span<const double> w, int max_depth, std::uint64_t seed)
      : d_(d), w_(w), max_depth_(max_depth), rng_(seed),
        n_features_(d.n_general() + d.n_sensitive()) {}

  std::vector<TreeNode> build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(nodes_);
  }

 private:
  double feature(std::size_t row, std::size_t f) const {
    return f < d_.n_general() ? d_.general()(row, f)
                              : static_cast<double>(d_.sensitive()(row, f - d_.n_general()));
  }

  std::vector<double> class_weights(const std::vector<std::size_t>& rows) const {
    std::vector<double> cw(static_cast<std::size_t>(d_.n_classes()), 0.0);
    for (auto r : rows) cw[static_cast<std::size_t>(d_.labels()[r])] += w_[r];
    return cw;
  }

  // Weight-scaled Gini impurity: W - sum_c W_c^2 / W.
  static double scaled_gini(const std::vector<double>& cw, double total) {
    if (total <= 0.0) return 0.0;
    double sq = 0.0;
    for (double c : cw) sq += c * c;
    return total - sq / total;
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const auto cw = class_weights(rows);
    const double total = std::accumulate(cw.begin(), cw.end(), 0.0);
    ClassIndex majority = 0;
    for (std::size_t c = 1; c < cw.size(); ++c)
      if (cw[c] > cw[static_cast<std::size_t>(majority)]) majority = static_cast<ClassIndex>(c);
    nodes_[id].label = majority;

    const auto nonzero = std::count_if(cw.begin(), cw.end(), [](double c) { return c > 0.0; });
    if (depth >= max_depth_ || nonzero <= 1) return id;

    const double parent = scaled_gini(cw, total);
    Split best;
    std::size_t ties = 0;
    std::vector<std::size_t> order = rows;
    std::vector<double> left_cw(cw.size());
    std::vector<double> right_cw(cw.size());
    for (std::size_t f = 0; f < n_features_; ++f) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return feature(a, f) < feature(b, f); });
      std::fill(left_cw.begin(), left_cw.end(), 0.0);
      double left_total = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const std::size_t r = order[i];
        left_cw[static_cast<std::size_t>(d_.labels()[r])] += w_[r];
        left_total += w_[r];
        const double here = feature(r, f);
        const double next = feature(order[i + 1], f);
        if (!(here < next)) continue;
        for (std::size_t c = 0; c < cw.size(); ++c) right_cw[c] = cw[c] - left_cw[c];
        const double right_total = total - left_total;
        const double score = scaled_gini(left_cw, left_total) + scaled_gini(right_cw, right_total);
        if (!best.valid || score < best.score) {
          best = {true, score, f, threshold_between(here, next)};
          ties = 1;
        } else if (score == best.score) {
          // Reservoir choice among exactly tied splits.
          ++ties;
          if (std::uniform_int_distribution<std::size_t>(0, ties - 1)(rng_) == 0)
            best = {true, score, f, threshold_between(here, next)};
        }
      }
    }
    if (!best.valid || !(best.score < parent - 1e-12 * total)) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (feature(r, best.feature) <= best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    nodes_[id].feature = static_cast<int>(best.feature);
    nodes_[id].threshold = best.threshold;
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  static double threshold_between(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid < hi ? mid : lo;
  }

  struct Split {
    bool valid = false;
    double score = 0.0;
    std::size_t feature = 0;
    double threshold = 0.0;
  };

  const Dataset& d_;
  std::span<const double> w_;
  int max_depth_;
  Rng rng_;
  std::size_t n_features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

Hypothesis train_tree(const Dataset& d, std::span<const double> row_weights, int max_depth, std::uint64_t seed) {
  if (row_weights.size() != d.size()) throw Error(ErrorCode::LengthMismatch, "one weight per row required");
  if (max_depth < 0) throw Error(ErrorCode::InvalidArgument, "max_depth must be non-negative");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(row_weights[i] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "row weights must be non-negative");
    if (row_weights[i] > 0.0) rows.push_back(i);
  }
  if (rows.empty()) throw Error(ErrorCode::AllZeroWeights, "every row weight is zero");
  TreeBuilder builder(d, row_weights, max_depth, seed);
  auto nodes = builder.build(std::move(rows));
  return DecisionTree(std::move(nodes), d.n_classes(), d.n_general(), d.n_sensitive(),
                      TrainingMeta{"cart", seed, max_depth});
}

}  // namespace fairens
