#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairens/ensemble.hpp"
#include "fairens/matrix.hpp"

namespace fairens {

/// Objective pair used for domination: 0/1 error and discriminative risk.
struct BiObjective {
  double err = 0.0;
  double dr = 0.0;

  bool operator==(const BiObjective&) const = default;
};

enum class Domination { None, WeakOnly, Strict };

/// Strict: a <= b componentwise with at least one strict inequality.
/// WeakOnly: a <= b componentwise and equal in both.
Domination dominates(const BiObjective& a, const BiObjective& b) noexcept;

/// Binary mask over ensemble members.
struct SelectorVector {
  std::vector<bool> bits;

  std::size_t count() const noexcept;
  std::vector<std::size_t> indices() const;
  static SelectorVector from_indices(std::size_t m, std::span<const std::size_t> idx);

  bool operator==(const SelectorVector&) const = default;
};

struct ArchiveEntry {
  SelectorVector selector;
  BiObjective objective;
};

/// Mutually non-dominated selectors, in insertion order.
class ParetoArchive {
 public:
  /// Rejects `cand` iff an entry strictly dominates it. Otherwise removes every
  /// entry that `cand` weakly dominates and appends `cand`.
  bool insert(ArchiveEntry cand);

  const std::vector<ArchiveEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::vector<ArchiveEntry> entries_;
};

struct PruneConfig {
  std::size_t k = 5;
  double lambda = 0.5;
  std::size_t machines = 2;
  std::uint64_t seed = 0;
  std::size_t iteration_multiplier = 1;  // POAF runs k * multiplier outer iterations
  std::size_t threads = 1;               // EPAF-D group-level workers
};

void validate(const PruneConfig& cfg, std::size_t m);

/// (lambda/2)(err_f + err_g) + (1 - lambda) tandem_fg
double pair_loss(double err_f, double err_g, double tandem_fg, double lambda);

/// Pruning inputs: member predictions on original/perturbed features plus
/// labels, with member errors and the tandem matrix precomputed.
class PruningProblem {
 public:
  PruningProblem(const EnsembleProfile& profile, std::span<const ClassIndex> labels);
  // Borrows both arguments.
  PruningProblem(EnsembleProfile&&, std::span<const ClassIndex>) = delete;

  std::size_t members() const noexcept { return profile_->size(); }
  std::size_t rows() const noexcept { return labels_.size(); }
  const EnsembleProfile& profile() const noexcept { return *profile_; }
  std::span<const ClassIndex> labels() const noexcept { return labels_; }

  double member_error(std::size_t j) const { return member_err_[j]; }
  double member_dr(std::size_t j) const { return tandem_(j, j); }
  double tandem(std::size_t a, std::size_t b) const { return tandem_(a, b); }

  /// pair_loss over precomputed member errors and tandem risks.
  double pair(std::size_t a, std::size_t b, double lambda) const;
  /// (err, dr) of the uniform-weight vote over `selection`.
  BiObjective objective(std::span<const std::size_t> selection) const;
  BiObjective objective(const SelectorVector& sel) const;

 private:
  const EnsembleProfile* profile_;
  std::span<const ClassIndex> labels_;
  std::vector<double> member_err_;
  Matrix<double> tandem_;
};

double combined_loss(const BiObjective& g, double lambda);

/// lambda * err + (1 - lambda) * dr of the uniform-weight vote over `selection`.
double subensemble_loss(const PruningProblem& problem, std::span<const std::size_t> selection, double lambda);
double subensemble_loss(const PruningProblem& problem, const SelectorVector& sel, double lambda);

struct PoafTrace {
  std::size_t iterations = 0;
  std::size_t evaluated = 0;
  std::size_t skipped_infeasible = 0;
  std::vector<ArchiveEntry> final_archive;
};

/// Pareto-archive search. Returns selected member indices in ascending order.
std::vector<std::size_t> poaf(const PruningProblem& problem, const PruneConfig& cfg, PoafTrace* trace = nullptr);

/// Greedy selection over `candidates` (all members when empty). Returns the
/// members in the order they were picked.
std::vector<std::size_t> epaf_c(const PruningProblem& problem, std::size_t k, double lambda,
                                std::span<const std::size_t> candidates = {});

struct EpafDTrace {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::vector<std::size_t>> group_results;
  std::vector<std::size_t> merged_result;
  std::size_t chosen = 0;  // index into group_results, or groups.size() for the merged result
};

/// Random partition, greedy per group, greedy over the union, best of all.
/// Returns selected member indices in ascending order.
std::vector<std::size_t> epaf_d(const PruningProblem& problem, const PruneConfig& cfg, EpafDTrace* trace = nullptr);

struct PruneResult {
  std::string algorithm;
  std::vector<std::size_t> selected;
  BiObjective objective;
  double loss = 0.0;
  PruneConfig config;
};

/// Runs "poaf", "epaf-c" or "epaf-d".
PruneResult prune(const PruningProblem& problem, const std::string& algorithm, const PruneConfig& cfg);

std::string prune_result_to_json(const PruneResult& r);

}  // namespace fairens
