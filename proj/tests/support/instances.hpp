#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "fairens/ensemble.hpp"
#include "fairens/random.hpp"

namespace fairens::testing {

inline std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

/// Positive weights normalized to sum to one.
inline std::vector<double> random_weights(Rng& rng, std::size_t m) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> w(m);
  double total = 0.0;
  for (auto& x : w) total += x = exp1(rng) + 1e-6;
  for (auto& x : w) x /= total;
  return w;
}

/// Binary member predictions; each member flips on a random subset of rows.
/// Votes use uniform weights.
inline EnsembleProfile random_profile(Rng& rng, std::size_t m, std::size_t n) {
  EnsembleProfile p;
  p.n_classes = 2;
  std::bernoulli_distribution coin(0.5);
  for (std::size_t j = 0; j < m; ++j) {
    const double flip_rate = uniform_real(rng, 0.0, 0.6);
    std::bernoulli_distribution flip(flip_rate);
    PredictionProfile mp;
    mp.member_id = j;
    for (std::size_t i = 0; i < n; ++i) {
      const ClassIndex o = coin(rng) ? 1 : 0;
      mp.preds_orig.push_back(o);
      mp.preds_pert.push_back(flip(rng) ? 1 - o : o);
    }
    p.members.push_back(std::move(mp));
  }
  p.weights.assign(m, 1.0 / static_cast<double>(m));
  recompute_votes(p);
  return p;
}

inline std::vector<ClassIndex> random_labels(Rng& rng, std::size_t n) {
  std::bernoulli_distribution coin(0.5);
  std::vector<ClassIndex> y(n);
  for (auto& v : y) v = coin(rng) ? 1 : 0;
  return y;
}

}  // namespace fairens::testing
