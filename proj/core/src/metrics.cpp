#include "fairens/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fairens/error.hpp"

namespace fairens {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw Error(ErrorCode::LengthMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}

MaybeReal ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::string_view to_string(GroupMeasure m) noexcept {
  switch (m) {
    case GroupMeasure::DP: return "DP";
    case GroupMeasure::EO: return "EO";
    case GroupMeasure::PQP: return "PQP";
  }
  return "?";
}

double empirical_dr(std::span<const ClassIndex> preds_orig, std::span<const ClassIndex> preds_pert) {
  require_same_length(preds_orig.size(), preds_pert.size(), "prediction profile");
  if (preds_orig.empty()) throw Error(ErrorCode::EmptyProfile, "profile has no rows");
  std::size_t flips = 0;
  for (std::size_t i = 0; i < preds_orig.size(); ++i) flips += fair_loss_instance(preds_orig[i], preds_pert[i]);
  return static_cast<double>(flips) / static_cast<double>(preds_orig.size());
}

double empirical_dr(const PredictionProfile& profile) {
  return empirical_dr(profile.preds_orig, profile.preds_pert);
}

double empirical_tandem(const PredictionProfile& a, const PredictionProfile& b) {
  require_same_length(a.preds_orig.size(), a.preds_pert.size(), "prediction profile");
  require_same_length(b.preds_orig.size(), b.preds_pert.size(), "prediction profile");
  require_same_length(a.size(), b.size(), "tandem profiles");
  if (a.size() == 0) throw Error(ErrorCode::EmptyProfile, "profile has no rows");
  std::size_t both = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    both += tandem_loss_instance(a.preds_orig[i], a.preds_pert[i], b.preds_orig[i], b.preds_pert[i]);
  return static_cast<double>(both) / static_cast<double>(a.size());
}

double empirical_error(std::span<const ClassIndex> preds, std::span<const ClassIndex> labels) {
  require_same_length(preds.size(), labels.size(), "predictions vs labels");
  if (preds.empty()) throw Error(ErrorCode::EmptyProfile, "no rows");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) wrong += preds[i] != labels[i] ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(preds.size());
}

GroupFairnessResult group_fairness(GroupMeasure measure, std::span<const ClassIndex> preds,
                                   std::span<const ClassIndex> labels, std::span<const int> group) {
  require_same_length(preds.size(), labels.size(), "predictions vs labels");
  require_same_length(preds.size(), group.size(), "predictions vs group");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] > 1 || labels[i] < 0 || labels[i] > 1)
      throw Error(ErrorCode::NonBinaryTask, "group fairness requires binary predictions and labels");
    if (group[i] != 0 && group[i] != 1) throw Error(ErrorCode::InvalidArgument, "group must be 0/1");
  }

  // Per group g: `cell[g]` counts rows in the conditioning event and `hit[g]`
  // those where the measured outcome holds.
  std::size_t cell[2] = {0, 0};
  std::size_t hit[2] = {0, 0};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int g = group[i];
    switch (measure) {
      case GroupMeasure::DP:
        ++cell[g];
        hit[g] += preds[i] == 1;
        break;
      case GroupMeasure::EO:
        if (labels[i] == 1) {
          ++cell[g];
          hit[g] += preds[i] == 1;
        }
        break;
      case GroupMeasure::PQP:
        if (preds[i] == 1) {
          ++cell[g];
          hit[g] += labels[i] == 1;
        }
        break;
    }
  }
  GroupFairnessResult r;
  r.measure = measure;
  r.privileged_size = cell[1];
  r.marginalised_size = cell[0];
  if (cell[0] > 0 && cell[1] > 0) {
    const double p1 = static_cast<double>(hit[1]) / static_cast<double>(cell[1]);
    const double p0 = static_cast<double>(hit[0]) / static_cast<double>(cell[0]);
    r.value = std::fabs(p1 - p0);
  }
  return r;
}

ClassificationMetrics classification_metrics(std::span<const ClassIndex> preds,
                                             std::span<const ClassIndex> labels) {
  require_same_length(preds.size(), labels.size(), "predictions vs labels");
  if (preds.empty()) throw Error(ErrorCode::EmptyProfile, "no rows");
  std::size_t correct = 0, tp = 0, fp = 0, tn = 0, fn = 0;
  bool binary = true;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    correct += preds[i] == labels[i];
    if (preds[i] > 1 || labels[i] > 1) binary = false;
    if (preds[i] == 1 && labels[i] == 1) ++tp;
    else if (preds[i] == 1) ++fp;
    else if (labels[i] == 1) ++fn;
    else ++tn;
  }
  ClassificationMetrics m;
  m.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
  if (binary) {
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = ratio(2 * tp, 2 * tp + fp + fn);
    m.specificity = ratio(tn, tn + fp);
  }
  return m;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x.size(), y.size(), "pearson inputs");
  if (x.size() < 2) throw Error(ErrorCode::LengthMismatch, "pearson needs at least two points");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y)) throw Error(ErrorCode::ConstantVector, "pearson input is constant");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::ConstantVector, "pearson input has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace fairens
