#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairens/matrix.hpp"

namespace fairens {

using ClassIndex = int;

struct SensitiveColumn {
  std::string name;
  int cardinality = 2;
  int privileged_value = 1;
  // Optional textual levels; when non-empty, the CSV cell is matched against
  // these and the position is the encoded value.
  std::vector<std::string> levels;

  bool operator==(const SensitiveColumn&) const = default;
};

struct DatasetSchema {
  std::string label_column;
  // When set, rows whose label equals this text map to class 1, all others to
  // class 0. When empty, labels are parsed as integer class indices.
  std::string positive_label;
  std::vector<SensitiveColumn> sensitive_columns;
  // Non-sensitive categorical columns, one-hot binarized over their sorted
  // distinct values.
  std::vector<std::string> categorical_columns;
  char delimiter = ',';
  // Optional lower bound on the class count for integer labels.
  int n_classes = 0;

  bool operator==(const DatasetSchema&) const = default;
};

DatasetSchema parse_schema(std::string_view json_text);
DatasetSchema load_schema(const std::filesystem::path& path);
std::string schema_to_json(const DatasetSchema& schema);

/// Feature matrix split into general and sensitive attributes plus labels.
/// Immutable once constructed; the constructor validates every invariant.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Matrix<double> general, Matrix<int> sensitive, std::vector<ClassIndex> labels,
          int n_classes, std::vector<std::string> feature_names,
          std::vector<std::string> sensitive_names, std::vector<int> cardinalities,
          std::vector<int> privileged_values);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t n_general() const noexcept { return general_.cols(); }
  std::size_t n_sensitive() const noexcept { return sensitive_.cols(); }
  int n_classes() const noexcept { return n_classes_; }

  const Matrix<double>& general() const noexcept { return general_; }
  const Matrix<int>& sensitive() const noexcept { return sensitive_; }
  const std::vector<ClassIndex>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  const std::vector<std::string>& sensitive_names() const noexcept { return sensitive_names_; }
  const std::vector<int>& cardinalities() const noexcept { return cardinalities_; }
  const std::vector<int>& privileged_values() const noexcept { return privileged_; }

  /// Rows selected by `rows`, in that order.
  Dataset subset(std::span<const std::size_t> rows) const;
  /// Same general features and labels, sensitive columns replaced.
  Dataset with_sensitive(Matrix<int> sensitive) const;
  /// Binary group membership for attribute `attr`: 1 for the privileged value.
  std::vector<int> privileged_group(std::size_t attr) const;

  /// FNV-1a over shapes and contents. Stable across runs and platforms with
  /// the same floating-point representation.
  std::uint64_t fingerprint() const noexcept;

 private:
  Matrix<double> general_;
  Matrix<int> sensitive_;
  std::vector<ClassIndex> labels_;
  int n_classes_ = 2;
  std::vector<std::string> feature_names_;
  std::vector<std::string> sensitive_names_;
  std::vector<int> cardinalities_;
  std::vector<int> privileged_;
};

/// Sensitive-attribute assignment aligned row-for-row with its source.
struct PerturbedView {
  Matrix<int> perturbed_sensitive;
  std::uint64_t source_fingerprint = 0;
  std::uint64_t seed = 0;
};

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_rows(std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t fold) const;
};

/// Reads a delimited file with a header row. Categorical columns are one-hot
/// binarized; sensitive columns are encoded per the schema.
Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema);
Dataset parse_csv(std::string_view text, const DatasetSchema& schema);

/// Writes general features, sensitive columns and integer labels. The returned
/// schema reloads the file into an equal Dataset.
DatasetSchema save_csv(const Dataset& d, const std::filesystem::path& path);
std::string to_csv(const Dataset& d);
DatasetSchema roundtrip_schema(const Dataset& d);

/// Every sensitive value is replaced by a uniform draw from its attribute's
/// domain minus the original value. All attributes are perturbed jointly.
PerturbedView perturb_sensitive(const Dataset& d, std::uint64_t seed);

/// Seeded k-fold assignment with fold sizes floor(n/k) or ceil(n/k).
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// Binary task with one binary sensitive attribute `s`. With probability
/// `bias` a row's label copies `s`; otherwise it follows a noisy linear rule
/// on the general features.
Dataset synth_biased(std::size_t n, double bias, std::size_t n_features, std::uint64_t seed);

}  // namespace fairens
