#include "fairens/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>

#include "fairens/error.hpp"
#include "fairens/random.hpp"

namespace fairens {

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;

  void bytes(const void* p, std::size_t len) noexcept {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(const T& v) noexcept {
    bytes(&v, sizeof(T));
  }
};

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidDataset, what); }

}  // namespace

Dataset::Dataset(Matrix<double> general, Matrix<int> sensitive, std::vector<ClassIndex> labels,
                 int n_classes, std::vector<std::string> feature_names,
                 std::vector<std::string> sensitive_names, std::vector<int> cardinalities,
                 std::vector<int> privileged_values)
    : general_(std::move(general)),
      sensitive_(std::move(sensitive)),
      labels_(std::move(labels)),
      n_classes_(n_classes),
      feature_names_(std::move(feature_names)),
      sensitive_names_(std::move(sensitive_names)),
      cardinalities_(std::move(cardinalities)),
      privileged_(std::move(privileged_values)) {
  const std::size_t n = labels_.size();
  if (n_classes_ < 2) invalid("class count must be at least 2");
  // A matrix with zero columns carries no row count of its own.
  if (general_.rows() != n && !(general_.cols() == 0 && general_.rows() == 0))
    invalid("general feature rows differ from label count");
  if (sensitive_.rows() != n && !(sensitive_.cols() == 0 && sensitive_.rows() == 0))
    invalid("sensitive attribute rows differ from label count");
  if (general_.rows() == 0 && general_.cols() == 0 && n > 0) general_ = Matrix<double>(n, 0);
  if (sensitive_.rows() == 0 && sensitive_.cols() == 0 && n > 0) sensitive_ = Matrix<int>(n, 0);
  if (feature_names_.size() != general_.cols()) invalid("feature name count mismatch");
  const std::size_t na = sensitive_.cols();
  if (sensitive_names_.size() != na || cardinalities_.size() != na || privileged_.size() != na)
    invalid("sensitive metadata count mismatch");
  for (std::size_t j = 0; j < na; ++j) {
    if (cardinalities_[j] < 1) invalid("attribute cardinality must be positive");
    if (privileged_[j] < 0 || privileged_[j] >= cardinalities_[j])
      invalid("privileged value outside attribute domain for " + sensitive_names_[j]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels_[i] < 0 || labels_[i] >= n_classes_)
      invalid("label out of range at row " + std::to_string(i));
    for (std::size_t j = 0; j < na; ++j) {
      const int v = sensitive_(i, j);
      if (v < 0 || v >= cardinalities_[j])
        invalid("sensitive value out of range at row " + std::to_string(i));
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Matrix<double> g(rows.size(), n_general());
  Matrix<int> s(rows.size(), n_sensitive());
  std::vector<ClassIndex> y(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t src = rows[r];
    if (src >= size()) throw Error(ErrorCode::InvalidArgument, "subset row out of range");
    std::copy_n(general_.row(src).begin(), n_general(), g.row(r).begin());
    std::copy_n(sensitive_.row(src).begin(), n_sensitive(), s.row(r).begin());
    y[r] = labels_[src];
  }
  return Dataset(std::move(g), std::move(s), std::move(y), n_classes_, feature_names_,
                 sensitive_names_, cardinalities_, privileged_);
}

Dataset Dataset::with_sensitive(Matrix<int> sensitive) const {
  if (sensitive.rows() != size() || sensitive.cols() != n_sensitive())
    throw Error(ErrorCode::ShapeMismatch, "replacement sensitive matrix has the wrong shape");
  return Dataset(general_, std::move(sensitive), labels_, n_classes_, feature_names_,
                 sensitive_names_, cardinalities_, privileged_);
}

std::vector<int> Dataset::privileged_group(std::size_t attr) const {
  if (attr >= n_sensitive()) throw Error(ErrorCode::InvalidArgument, "no such sensitive attribute");
  std::vector<int> g(size());
  for (std::size_t i = 0; i < size(); ++i) g[i] = sensitive_(i, attr) == privileged_[attr] ? 1 : 0;
  return g;
}

std::uint64_t Dataset::fingerprint() const noexcept {
  Fnv1a f;
  f.value(static_cast<std::uint64_t>(size()));
  f.value(static_cast<std::uint64_t>(n_general()));
  f.value(static_cast<std::uint64_t>(n_sensitive()));
  f.value(n_classes_);
  if (!general_.data().empty()) f.bytes(general_.data().data(), general_.data().size() * sizeof(double));
  if (!sensitive_.data().empty()) f.bytes(sensitive_.data().data(), sensitive_.data().size() * sizeof(int));
  if (!labels_.empty()) f.bytes(labels_.data(), labels_.size() * sizeof(ClassIndex));
  for (int c : cardinalities_) f.value(c);
  return f.h;
}

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) rows.push_back(i);
  return rows;
}

PerturbedView perturb_sensitive(const Dataset& d, std::uint64_t seed) {
  if (d.n_sensitive() == 0)
    throw Error(ErrorCode::NoSensitiveAttributes, "dataset has no sensitive attributes");
  for (std::size_t j = 0; j < d.n_sensitive(); ++j)
    if (d.cardinalities()[j] < 2)
      throw Error(ErrorCode::DegenerateAttribute,
                  "attribute " + d.sensitive_names()[j] + " has fewer than two values");

  Rng rng(seed);
  Matrix<int> out(d.size(), d.n_sensitive());
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.n_sensitive(); ++j) {
      const int original = d.sensitive()(i, j);
      // Draw from {0..c-2} and skip over the original value.
      std::uniform_int_distribution<int> pick(0, d.cardinalities()[j] - 2);
      const int r = pick(rng);
      out(i, j) = r >= original ? r + 1 : r;
    }
  }
  return PerturbedView{std::move(out), d.fingerprint(), seed};
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "fold count must be at least 2");
  if (k > n)
    throw Error(ErrorCode::TooFewRows,
                std::to_string(n) + " rows cannot fill " + std::to_string(k) + " folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  FoldPlan plan{k, std::vector<std::size_t>(n), seed};
  for (std::size_t i = 0; i < n; ++i) plan.assignments[perm[i]] = i % k;
  return plan;
}

Dataset synth_biased(std::size_t n, double bias, std::size_t n_features, std::uint64_t seed) {
  if (n < 10) throw Error(ErrorCode::InvalidArgument, "synthetic data needs at least 10 rows");
  if (n_features < 1) throw Error(ErrorCode::InvalidArgument, "synthetic data needs a feature");
  if (!(bias >= 0.0 && bias <= 1.0)) throw Error(ErrorCode::InvalidArgument, "bias must lie in [0,1]");

  Rng coef_rng(derive_seed(seed, {0}));
  Rng row_rng(derive_seed(seed, {1}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  std::vector<double> coef(n_features);
  for (auto& c : coef) c = normal(coef_rng);

  Matrix<double> x(n, n_features);
  Matrix<int> s(n, 1);
  std::vector<ClassIndex> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double score = 0.0;
    for (std::size_t j = 0; j < n_features; ++j) {
      x(i, j) = normal(row_rng);
      score += coef[j] * x(i, j);
    }
    s(i, 0) = coin(row_rng) ? 1 : 0;
    const double noise = 0.5 * normal(row_rng);
    const bool copy = unit(row_rng) < bias;
    y[i] = copy ? s(i, 0) : (score + noise > 0.0 ? 1 : 0);
  }

  std::vector<std::string> names(n_features);
  for (std::size_t j = 0; j < n_features; ++j) names[j] = "x" + std::to_string(j);
  return Dataset(std::move(x), std::move(s), std::move(y), 2, std::move(names), {"s"}, {2}, {1});
}

}  // namespace fairens
