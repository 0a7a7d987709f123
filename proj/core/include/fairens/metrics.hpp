#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fairens/dataset.hpp"

namespace fairens {

/// Predictions of one member on original and perturbed sensitive attributes.
struct PredictionProfile {
  std::vector<ClassIndex> preds_orig;
  std::vector<ClassIndex> preds_pert;
  std::size_t member_id = 0;

  std::size_t size() const noexcept { return preds_orig.size(); }
  bool flips(std::size_t row) const { return preds_orig[row] != preds_pert[row]; }
};

/// An absent value means the quantity is undefined (empty conditioning cell,
/// zero denominator). Never coerced to zero.
using MaybeReal = std::optional<double>;

enum class GroupMeasure { DP, EO, PQP };

std::string_view to_string(GroupMeasure m) noexcept;

struct GroupFairnessResult {
  GroupMeasure measure = GroupMeasure::DP;
  MaybeReal value;
  // Sizes of the conditioning cells, privileged group first.
  std::size_t privileged_size = 0;
  std::size_t marginalised_size = 0;
};

struct ClassificationMetrics {
  double accuracy = 0.0;
  MaybeReal precision;
  MaybeReal recall;
  MaybeReal f1;
  MaybeReal specificity;
};

constexpr int fair_loss_instance(ClassIndex p_orig, ClassIndex p_pert) noexcept {
  return p_orig != p_pert ? 1 : 0;
}

/// Both members flip on the row.
constexpr int tandem_loss_instance(ClassIndex f_orig, ClassIndex f_pert, ClassIndex g_orig,
                                   ClassIndex g_pert) noexcept {
  return fair_loss_instance(f_orig, f_pert) & fair_loss_instance(g_orig, g_pert);
}

double empirical_dr(std::span<const ClassIndex> preds_orig, std::span<const ClassIndex> preds_pert);
double empirical_dr(const PredictionProfile& profile);

double empirical_tandem(const PredictionProfile& a, const PredictionProfile& b);

/// 0/1 loss against `labels`.
double empirical_error(std::span<const ClassIndex> preds, std::span<const ClassIndex> labels);

/// `group` holds 1 for the privileged group and 0 otherwise. Predictions and
/// labels must be binary; prediction 1 is the favourable outcome.
GroupFairnessResult group_fairness(GroupMeasure measure, std::span<const ClassIndex> preds,
                                   std::span<const ClassIndex> labels, std::span<const int> group);

/// Positive class is 1. Binary-only ratios are undefined when any prediction
/// or label exceeds 1.
ClassificationMetrics classification_metrics(std::span<const ClassIndex> preds,
                                             std::span<const ClassIndex> labels);

double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace fairens
