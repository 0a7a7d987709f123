#include "fairens/pruning.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <json.hpp>

#include "fairens/bounds.hpp"
#include "fairens/error.hpp"
#include "fairens/random.hpp"
#include "fairens/version.hpp"
#include "parallel.hpp"

namespace fairens {

Domination dominates(const BiObjective& a, const BiObjective& b) noexcept {
  if (!(a.err <= b.err && a.dr <= b.dr)) return Domination::None;
  return (a.err < b.err || a.dr < b.dr) ? Domination::Strict : Domination::WeakOnly;
}

std::size_t SelectorVector::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
}

std::vector<std::size_t> SelectorVector::indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < bits.size(); ++j)
    if (bits[j]) idx.push_back(j);
  return idx;
}

SelectorVector SelectorVector::from_indices(std::size_t m, std::span<const std::size_t> idx) {
  SelectorVector s{std::vector<bool>(m, false)};
  for (auto j : idx) {
    if (j >= m) throw Error(ErrorCode::InvalidArgument, "selector index out of range");
    s.bits[j] = true;
  }
  return s;
}

bool ParetoArchive::insert(ArchiveEntry cand) {
  for (const auto& e : entries_)
    if (dominates(e.objective, cand.objective) == Domination::Strict) return false;
  std::erase_if(entries_, [&](const ArchiveEntry& e) {
    return dominates(cand.objective, e.objective) != Domination::None;
  });
  entries_.push_back(std::move(cand));
  return true;
}

void validate(const PruneConfig& cfg, std::size_t m) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "nothing to prune");
  if (cfg.k < 1 || cfg.k > m)
    throw Error(ErrorCode::InvalidArgument, "k must lie in [1, " + std::to_string(m) + "]");
  if (!(cfg.lambda > 0.0 && cfg.lambda < 1.0)) throw Error(ErrorCode::InvalidLambda, "lambda must lie in (0,1)");
  if (cfg.machines < 1 || cfg.machines > m)
    throw Error(ErrorCode::InvalidArgument, "machine count must lie in [1, " + std::to_string(m) + "]");
  if (cfg.iteration_multiplier < 1) throw Error(ErrorCode::InvalidArgument, "iteration multiplier must be positive");
}

double pair_loss(double err_f, double err_g, double tandem_fg, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorCode::InvalidLambda, "lambda must lie in (0,1)");
  return lambda / 2.0 * (err_f + err_g) + (1.0 - lambda) * tandem_fg;
}

double combined_loss(const BiObjective& g, double lambda) { return lambda * g.err + (1.0 - lambda) * g.dr; }

PruningProblem::PruningProblem(const EnsembleProfile& profile, std::span<const ClassIndex> labels)
    : profile_(&profile), labels_(labels) {
  if (profile.size() == 0) throw Error(ErrorCode::EmptyProfile, "profile has no members");
  if (profile.rows() != labels.size()) throw Error(ErrorCode::LengthMismatch, "one label per profile row required");
  member_err_.reserve(profile.size());
  for (const auto& m : profile.members) member_err_.push_back(empirical_error(m.preds_orig, labels));
  tandem_ = tandem_matrix(profile);
}

double PruningProblem::pair(std::size_t a, std::size_t b, double lambda) const {
  return pair_loss(member_err_[a], member_err_[b], tandem_(a, b), lambda);
}

BiObjective PruningProblem::objective(std::span<const std::size_t> selection) const {
  if (selection.empty()) throw Error(ErrorCode::EmptySelector, "sub-ensemble is empty");
  for (auto j : selection)
    if (j >= members()) throw Error(ErrorCode::InvalidArgument, "selected member out of range");
  const auto& members = profile_->members;
  const std::size_t n = rows();
  std::vector<std::size_t> tally_o(static_cast<std::size_t>(std::max(profile_->n_classes, 2)));
  std::vector<std::size_t> tally_p(tally_o.size());
  // Uniform weights: integer counts give the same argmax as equal real weights.
  auto argmax = [](const std::vector<std::size_t>& t) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < t.size(); ++c)
      if (t[c] > t[best]) best = c;
    return static_cast<ClassIndex>(best);
  };
  std::size_t wrong = 0, flips = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(tally_o.begin(), tally_o.end(), 0);
    std::fill(tally_p.begin(), tally_p.end(), 0);
    for (auto j : selection) {
      const auto po = static_cast<std::size_t>(members[j].preds_orig[i]);
      const auto pp = static_cast<std::size_t>(members[j].preds_pert[i]);
      if (po >= tally_o.size() || pp >= tally_o.size()) {
        tally_o.resize(std::max(po, pp) + 1, 0);
        tally_p.resize(std::max(po, pp) + 1, 0);
      }
      ++tally_o[po];
      ++tally_p[pp];
    }
    const ClassIndex vo = argmax(tally_o);
    const ClassIndex vp = argmax(tally_p);
    wrong += vo != labels_[i];
    flips += vo != vp;
  }
  const double dn = static_cast<double>(n);
  return {static_cast<double>(wrong) / dn, static_cast<double>(flips) / dn};
}

BiObjective PruningProblem::objective(const SelectorVector& sel) const {
  if (sel.bits.size() != members()) throw Error(ErrorCode::LengthMismatch, "selector length differs from m");
  return objective(sel.indices());
}

double subensemble_loss(const PruningProblem& problem, std::span<const std::size_t> selection, double lambda) {
  return combined_loss(problem.objective(selection), lambda);
}

double subensemble_loss(const PruningProblem& problem, const SelectorVector& sel, double lambda) {
  return combined_loss(problem.objective(sel), lambda);
}

std::vector<std::size_t> poaf(const PruningProblem& problem, const PruneConfig& cfg, PoafTrace* trace) {
  const std::size_t m = problem.members();
  validate(cfg, m);
  const std::size_t k = cfg.k;
  Rng rng(cfg.seed);
  PoafTrace local;
  PoafTrace& t = trace ? *trace : local;
  t = {};

  auto feasible = [&](const SelectorVector& s) {
    const auto c = s.count();
    return c >= 1 && c <= k;
  };
  auto entry = [&](SelectorVector s) {
    ++t.evaluated;
    BiObjective g = problem.objective(s);
    return ArchiveEntry{std::move(s), g};
  };

  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  ParetoArchive archive;
  archive.insert(entry(SelectorVector::from_indices(m, std::span(perm).first(k))));

  std::bernoulli_distribution flip(1.0 / static_cast<double>(m));
  const std::size_t iterations = k * cfg.iteration_multiplier;
  for (std::size_t it = 0; it < iterations; ++it) {
    ++t.iterations;
    std::uniform_int_distribution<std::size_t> pick(0, archive.size() - 1);
    SelectorVector mutated = archive.entries()[pick(rng)].selector;
    for (std::size_t j = 0; j < m; ++j)
      if (flip(rng)) mutated.bits[j] = !mutated.bits[j];
    if (!feasible(mutated)) {
      ++t.skipped_infeasible;
      continue;
    }
    ArchiveEntry cand = entry(mutated);
    if (!archive.insert(cand)) continue;

    // Neighbours: one member fewer, then one member more.
    std::vector<ArchiveEntry> neighbours;
    for (int delta : {-1, +1}) {
      for (std::size_t j = 0; j < m; ++j) {
        if (mutated.bits[j] != (delta < 0)) continue;
        SelectorVector v = mutated;
        v.bits[j] = !v.bits[j];
        if (!feasible(v)) {
          ++t.skipped_infeasible;
          continue;
        }
        neighbours.push_back(entry(std::move(v)));
      }
    }
    std::stable_sort(neighbours.begin(), neighbours.end(), [&](const ArchiveEntry& a, const ArchiveEntry& b) {
      return combined_loss(a.objective, cfg.lambda) < combined_loss(b.objective, cfg.lambda);
    });
    for (auto& v : neighbours) archive.insert(std::move(v));
  }

  const auto& entries = archive.entries();
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (combined_loss(entries[i].objective, cfg.lambda) < combined_loss(entries[best].objective, cfg.lambda))
      best = i;
  t.final_archive = entries;
  return entries[best].selector.indices();
}

std::vector<std::size_t> epaf_c(const PruningProblem& problem, std::size_t k, double lambda,
                                std::span<const std::size_t> candidates) {
  std::vector<std::size_t> pool;
  if (candidates.empty()) {
    pool.resize(problem.members());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
  } else {
    pool.assign(candidates.begin(), candidates.end());
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    if (pool.back() >= problem.members()) throw Error(ErrorCode::InvalidArgument, "candidate out of range");
  }
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorCode::InvalidLambda, "lambda must lie in (0,1)");
  const std::size_t size = std::min(k, pool.size());

  // Pool is ascending, so strict < keeps the lowest index on ties.
  std::size_t first = 0;
  for (std::size_t p = 1; p < pool.size(); ++p)
    if (problem.pair(pool[p], pool[p], lambda) < problem.pair(pool[first], pool[first], lambda)) first = p;

  std::vector<std::size_t> picked{pool[first]};
  std::vector<bool> taken(pool.size(), false);
  taken[first] = true;
  std::vector<double> acc(pool.size(), 0.0);
  while (picked.size() < size) {
    const std::size_t last = picked.back();
    std::size_t best = pool.size();
    for (std::size_t p = 0; p < pool.size(); ++p) {
      if (taken[p]) continue;
      acc[p] += problem.pair(pool[p], last, lambda);
      if (best == pool.size() || acc[p] < acc[best]) best = p;
    }
    taken[best] = true;
    picked.push_back(pool[best]);
  }
  return picked;
}

std::vector<std::size_t> epaf_d(const PruningProblem& problem, const PruneConfig& cfg, EpafDTrace* trace) {
  const std::size_t m = problem.members();
  validate(cfg, m);
  Rng rng(cfg.seed);
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::vector<std::size_t>> groups(cfg.machines);
  for (std::size_t i = 0; i < m; ++i) groups[i % cfg.machines].push_back(perm[i]);
  for (auto& g : groups) std::sort(g.begin(), g.end());

  std::vector<std::vector<std::size_t>> results(groups.size());
  detail::parallel_for(groups.size(), cfg.threads,
                       [&](std::size_t g) { results[g] = epaf_c(problem, cfg.k, cfg.lambda, groups[g]); });

  std::vector<std::size_t> merged;
  for (const auto& r : results) merged.insert(merged.end(), r.begin(), r.end());
  std::sort(merged.begin(), merged.end());
  auto merged_result = epaf_c(problem, cfg.k, cfg.lambda, merged);

  std::size_t chosen = 0;
  double best = subensemble_loss(problem, results[0], cfg.lambda);
  for (std::size_t g = 1; g <= results.size(); ++g) {
    const auto& cand = g < results.size() ? results[g] : merged_result;
    const double loss = subensemble_loss(problem, cand, cfg.lambda);
    if (loss < best) {
      best = loss;
      chosen = g;
    }
  }
  std::vector<std::size_t> out = chosen < results.size() ? results[chosen] : merged_result;
  std::sort(out.begin(), out.end());
  if (trace) *trace = EpafDTrace{std::move(groups), std::move(results), std::move(merged_result), chosen};
  return out;
}

PruneResult prune(const PruningProblem& problem, const std::string& algorithm, const PruneConfig& cfg) {
  validate(cfg, problem.members());
  PruneResult r;
  r.algorithm = algorithm;
  r.config = cfg;
  if (algorithm == "poaf") {
    r.selected = poaf(problem, cfg);
  } else if (algorithm == "epaf-c") {
    r.selected = epaf_c(problem, cfg.k, cfg.lambda);
    std::sort(r.selected.begin(), r.selected.end());
  } else if (algorithm == "epaf-d") {
    r.selected = epaf_d(problem, cfg);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown pruning algorithm '" + algorithm + "'");
  }
  r.objective = problem.objective(r.selected);
  r.loss = combined_loss(r.objective, cfg.lambda);
  return r;
}

std::string prune_result_to_json(const PruneResult& r) {
  nlohmann::ordered_json j = {
      {"tool", {{"name", kToolName}, {"version", kVersion}}},
      {"algorithm", r.algorithm},
      {"selected", r.selected},
      {"objective", {{"err", r.objective.err}, {"dr", r.objective.dr}}},
      {"loss", r.loss},
      {"config",
       {{"k", r.config.k},
        {"lambda", r.config.lambda},
        {"machines", r.config.machines},
        {"iteration_multiplier", r.config.iteration_multiplier},
        {"seed", r.config.seed}}}};
  return j.dump(2);
}

}  // namespace fairens
