#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairens/dataset.hpp"
#include "fairens/metrics.hpp"

namespace fairens {

struct TreeNode {
  int feature = -1;  // < n_general: general column; otherwise sensitive column - n_general
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  ClassIndex label = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct TrainingMeta {
  std::string kind = "cart";
  std::uint64_t seed = 0;
  int max_depth = 0;

  bool operator==(const TrainingMeta&) const = default;
};

/// Axis-aligned binary classification tree over the concatenation of general
/// and sensitive features. Node 0 is the root; `x <= threshold` goes left.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, int n_classes, std::size_t n_general, std::size_t n_sensitive,
               TrainingMeta meta);

  ClassIndex predict(std::span<const double> general, std::span<const int> sensitive) const;
  std::vector<ClassIndex> predict(const Dataset& d) const;
  std::vector<ClassIndex> predict(const Dataset& d, const Matrix<int>& sensitive) const;

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  int n_classes() const noexcept { return n_classes_; }
  std::size_t n_general() const noexcept { return n_general_; }
  std::size_t n_sensitive() const noexcept { return n_sensitive_; }
  const TrainingMeta& meta() const noexcept { return meta_; }
  std::size_t depth() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  int n_classes_ = 2;
  std::size_t n_general_ = 0;
  std::size_t n_sensitive_ = 0;
  TrainingMeta meta_;
};

using Hypothesis = DecisionTree;

/// How an ensemble was produced; echoed into saved models.
struct EnsembleConfig {
  std::string trainer = "bagging";  // bagging | adaboost-m1 | samme
  std::size_t members = 11;
  int max_depth = 4;
  std::uint64_t seed = 0;

  bool operator==(const EnsembleConfig&) const = default;
};

/// Members with a normalized non-negative weight vector.
class WeightedEnsemble {
 public:
  WeightedEnsemble() = default;
  WeightedEnsemble(std::vector<Hypothesis> members, std::vector<double> weights, EnsembleConfig config = {});

  std::size_t size() const noexcept { return members_.size(); }
  const std::vector<Hypothesis>& members() const noexcept { return members_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const EnsembleConfig& config() const noexcept { return config_; }
  int n_classes() const noexcept { return members_.empty() ? 2 : members_.front().n_classes(); }

  /// Members listed in `selection` with uniform weights.
  WeightedEnsemble select(std::span<const std::size_t> selection) const;

  std::vector<ClassIndex> predict(const Dataset& d) const;

  bool operator==(const WeightedEnsemble&) const = default;

 private:
  std::vector<Hypothesis> members_;
  std::vector<double> weights_;
  EnsembleConfig config_;
};

/// Cached member and vote predictions on original and perturbed features.
struct EnsembleProfile {
  std::vector<PredictionProfile> members;
  std::vector<ClassIndex> vote_orig;
  std::vector<ClassIndex> vote_pert;
  std::vector<double> weights;
  int n_classes = 2;

  std::size_t rows() const noexcept { return vote_orig.size(); }
  std::size_t size() const noexcept { return members.size(); }
  double ensemble_dr() const { return empirical_dr(vote_orig, vote_pert); }
};

enum class BoostVariant { M1, SAMME };

inline constexpr double kMaxBoostAlpha = 27.631021115928547;  // ln(1e12)
inline constexpr int kMaxBoostRetries = 10;

/// Weighted-Gini CART. Rows with zero weight do not influence the tree.
Hypothesis train_tree(const Dataset& d, std::span<const double> row_weights, int max_depth, std::uint64_t seed);

/// argmax_c sum_j w_j [pred_j == c]; ties go to the lowest class index.
ClassIndex weighted_vote(std::span<const ClassIndex> member_preds, std::span<const double> weights);

/// Bootstrap-aggregated trees with uniform weights.
WeightedEnsemble train_bagging(const Dataset& d, std::size_t m, int max_depth, std::uint64_t seed);

/// Member weight ln((1-eps)/eps), plus ln(n_classes-1) for SAMME, capped at
/// kMaxBoostAlpha.
double boost_alpha(double eps, int n_classes, BoostVariant variant);

WeightedEnsemble train_adaboost(const Dataset& d, std::size_t m, int max_depth, BoostVariant variant,
                                std::uint64_t seed);

/// Dispatches on config.trainer.
WeightedEnsemble train_ensemble(const Dataset& d, const EnsembleConfig& config);

EnsembleProfile build_profile(const WeightedEnsemble& e, const Dataset& d, const PerturbedView& v);

/// Recomputes both vote vectors from member predictions and weights.
void recompute_votes(EnsembleProfile& profile);

std::string ensemble_to_json(const WeightedEnsemble& e);
WeightedEnsemble ensemble_from_json(std::string_view text);
void save_ensemble(const WeightedEnsemble& e, const std::filesystem::path& path);
WeightedEnsemble load_ensemble(const std::filesystem::path& path);

}  // namespace fairens
