#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fairens/ensemble.hpp"
#include "fairens/error.hpp"
#include "fairens/random.hpp"

namespace fairens {

namespace {

ClassIndex vote_into(std::span<const ClassIndex> preds, std::span<const double> weights,
                     std::vector<double>& tally) {
  std::fill(tally.begin(), tally.end(), 0.0);
  for (std::size_t j = 0; j < preds.size(); ++j) {
    const auto c = static_cast<std::size_t>(preds[j]);
    if (c >= tally.size()) tally.resize(c + 1, 0.0);
    tally[c] += weights[j];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < tally.size(); ++c)
    if (tally[c] > tally[best]) best = c;
  return static_cast<ClassIndex>(best);
}

std::vector<double> normalized(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace

WeightedEnsemble::WeightedEnsemble(std::vector<Hypothesis> members, std::vector<double> weights,
                                   EnsembleConfig config)
    : members_(std::move(members)), weights_(std::move(weights)), config_(std::move(config)) {
  if (members_.empty()) throw Error(ErrorCode::InvalidModel, "ensemble needs at least one member");
  if (weights_.size() != members_.size())
    throw Error(ErrorCode::LengthMismatch, "one weight per member required");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidModel, "weights must be non-negative");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidModel, "weights must sum to 1");
  for (const auto& m : members_) {
    if (m.n_classes() != members_.front().n_classes() || m.n_general() != members_.front().n_general() ||
        m.n_sensitive() != members_.front().n_sensitive())
      throw Error(ErrorCode::InvalidModel, "members disagree on input layout");
  }
}

WeightedEnsemble WeightedEnsemble::select(std::span<const std::size_t> selection) const {
  if (selection.empty()) throw Error(ErrorCode::EmptySelector, "selection is empty");
  std::vector<Hypothesis> chosen;
  for (auto j : selection) {
    if (j >= size()) throw Error(ErrorCode::InvalidArgument, "selected member out of range");
    chosen.push_back(members_[j]);
  }
  std::vector<double> w(chosen.size(), 1.0 / static_cast<double>(chosen.size()));
  return WeightedEnsemble(std::move(chosen), std::move(w), config_);
}

std::vector<ClassIndex> WeightedEnsemble::predict(const Dataset& d) const {
  std::vector<std::vector<ClassIndex>> per_member;
  for (const auto& m : members_) per_member.push_back(m.predict(d));
  std::vector<ClassIndex> out(d.size());
  std::vector<ClassIndex> row(size());
  std::vector<double> tally(static_cast<std::size_t>(n_classes()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) row[j] = per_member[j][i];
    out[i] = vote_into(row, weights_, tally);
  }
  return out;
}

ClassIndex weighted_vote(std::span<const ClassIndex> member_preds, std::span<const double> weights) {
  if (member_preds.size() != weights.size())
    throw Error(ErrorCode::LengthMismatch, "one weight per member prediction required");
  if (member_preds.empty()) throw Error(ErrorCode::InvalidArgument, "no member predictions");
  for (auto p : member_preds)
    if (p < 0) throw Error(ErrorCode::InvalidArgument, "negative class index");
  std::vector<double> tally(2, 0.0);
  return vote_into(member_preds, weights, tally);
}

WeightedEnsemble train_bagging(const Dataset& d, std::size_t m, int max_depth, std::uint64_t seed) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "ensemble size must be at least 1");
  if (d.size() == 0) throw Error(ErrorCode::InvalidArgument, "cannot train on an empty dataset");
  std::vector<Hypothesis> members;
  members.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    Rng rng(derive_seed(seed, {j, 0}));
    std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
    std::vector<double> counts(d.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) counts[pick(rng)] += 1.0;
    members.push_back(train_tree(d, counts, max_depth, derive_seed(seed, {j, 1})));
  }
  std::vector<double> w(m, 1.0 / static_cast<double>(m));
  return WeightedEnsemble(std::move(members), std::move(w), EnsembleConfig{"bagging", m, max_depth, seed});
}

double boost_alpha(double eps, int n_classes, BoostVariant variant) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidArgument, "weighted error must lie in [0,1]");
  if (eps <= 0.0) return kMaxBoostAlpha;
  double alpha = std::log((1.0 - eps) / eps);
  if (variant == BoostVariant::SAMME) alpha += std::log(static_cast<double>(n_classes - 1));
  return std::min(alpha, kMaxBoostAlpha);
}

WeightedEnsemble train_adaboost(const Dataset& d, std::size_t m, int max_depth, BoostVariant variant,
                                std::uint64_t seed) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "ensemble size must be at least 1");
  if (d.size() == 0) throw Error(ErrorCode::InvalidArgument, "cannot train on an empty dataset");
  const int nc = d.n_classes();
  if (variant == BoostVariant::M1 && nc > 2)
    throw Error(ErrorCode::InvalidArgument, "AdaBoost.M1 is binary-only here; use SAMME for multi-class");
  const double useless = 1.0 - 1.0 / static_cast<double>(nc);
  const std::size_t n = d.size();

  std::vector<double> dist(n, 1.0 / static_cast<double>(n));
  std::vector<Hypothesis> members;
  std::vector<double> alphas;
  for (std::size_t t = 0; t < m; ++t) {
    bool found = false;
    double eps = 0.0;
    std::vector<ClassIndex> preds;
    for (int attempt = 0; attempt <= kMaxBoostRetries && !found; ++attempt) {
      const std::uint64_t s = derive_seed(seed, {t, static_cast<std::uint64_t>(attempt)});
      std::vector<double> fit_weights = dist;
      if (attempt > 0) {
        // Retry on a weighted bootstrap resample from a fresh stream.
        Rng rng(s);
        std::discrete_distribution<std::size_t> pick(dist.begin(), dist.end());
        std::fill(fit_weights.begin(), fit_weights.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) fit_weights[pick(rng)] += 1.0;
      }
      Hypothesis h = train_tree(d, fit_weights, max_depth, s);
      preds = h.predict(d);
      eps = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (preds[i] != d.labels()[i]) eps += dist[i];
      eps = std::clamp(eps, 0.0, 1.0);
      if (eps < useless) {
        members.push_back(std::move(h));
        found = true;
      }
    }
    if (!found) {
      if (members.empty())
        throw Error(ErrorCode::NoUsefulWeakLearner,
                    "no weak learner beat chance after " + std::to_string(kMaxBoostRetries) + " retries");
      break;
    }
    const double alpha = boost_alpha(eps, nc, variant);
    alphas.push_back(alpha);
    if (eps <= 0.0) break;
    for (std::size_t i = 0; i < n; ++i)
      if (preds[i] != d.labels()[i]) dist[i] *= std::exp(alpha);
    dist = normalized(std::move(dist));
  }
  const char* name = variant == BoostVariant::M1 ? "adaboost-m1" : "samme";
  return WeightedEnsemble(std::move(members), normalized(std::move(alphas)),
                          EnsembleConfig{name, m, max_depth, seed});
}

WeightedEnsemble train_ensemble(const Dataset& d, const EnsembleConfig& config) {
  if (config.trainer == "bagging") return train_bagging(d, config.members, config.max_depth, config.seed);
  if (config.trainer == "adaboost-m1")
    return train_adaboost(d, config.members, config.max_depth, BoostVariant::M1, config.seed);
  if (config.trainer == "samme")
    return train_adaboost(d, config.members, config.max_depth, BoostVariant::SAMME, config.seed);
  throw Error(ErrorCode::InvalidArgument, "unknown trainer '" + config.trainer + "'");
}

void recompute_votes(EnsembleProfile& p) {
  const std::size_t m = p.members.size();
  if (p.weights.size() != m) throw Error(ErrorCode::LengthMismatch, "one weight per member profile required");
  const std::size_t n = m == 0 ? 0 : p.members.front().size();
  p.vote_orig.assign(n, 0);
  p.vote_pert.assign(n, 0);
  std::vector<ClassIndex> row_o(m), row_p(m);
  std::vector<double> tally(static_cast<std::size_t>(std::max(p.n_classes, 2)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      row_o[j] = p.members[j].preds_orig[i];
      row_p[j] = p.members[j].preds_pert[i];
    }
    p.vote_orig[i] = vote_into(row_o, p.weights, tally);
    p.vote_pert[i] = vote_into(row_p, p.weights, tally);
  }
}

EnsembleProfile build_profile(const WeightedEnsemble& e, const Dataset& d, const PerturbedView& v) {
  if (v.source_fingerprint != d.fingerprint() || v.perturbed_sensitive.rows() != d.size())
    throw Error(ErrorCode::FingerprintMismatch, "perturbed view was not derived from this dataset");
  EnsembleProfile p;
  p.weights = e.weights();
  p.n_classes = e.n_classes();
  p.members.reserve(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) {
    const auto& h = e.members()[j];
    p.members.push_back(PredictionProfile{h.predict(d), h.predict(d, v.perturbed_sensitive), j});
  }
  recompute_votes(p);
  return p;
}

}  // namespace fairens
