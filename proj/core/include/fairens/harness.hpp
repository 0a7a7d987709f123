#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairens/bounds.hpp"
#include "fairens/dataset.hpp"
#include "fairens/ensemble.hpp"
#include "fairens/matrix.hpp"
#include "fairens/metrics.hpp"
#include "fairens/pruning.hpp"

namespace fairens {

struct DataSource {
  std::string kind = "synthetic";  // synthetic | csv
  std::size_t n = 600;
  double bias = 0.6;
  std::size_t features = 5;
  std::uint64_t seed = 1;
  std::filesystem::path csv_path;
  std::filesystem::path schema_path;
};

struct PrunerSpec {
  std::string name;       // column label in reports
  std::string algorithm;  // poaf | epaf-c | epaf-d
  PruneConfig config;     // config.seed is replaced per fold
};

struct ExperimentConfig {
  std::string name;
  DataSource data;
  EnsembleConfig ensemble;  // ensemble.seed is replaced per fold
  std::vector<PrunerSpec> pruners;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> metrics;
  std::filesystem::path output_dir;
  std::size_t threads = 1;
};

/// Metric names understood by ExperimentConfig::metrics.
const std::vector<std::string>& known_metrics();

ExperimentConfig default_experiment_config();
/// Relative data paths are resolved against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
/// Reads a config file; relative data paths resolve against its directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

Dataset load_source(const DataSource& source);

/// Seeds used inside fold `fold`; each role draws from its own stream.
struct FoldSeeds {
  std::uint64_t ensemble;
  std::uint64_t train_perturbation;
  std::uint64_t test_perturbation;
  std::uint64_t pruner_base;
};
FoldSeeds fold_seeds(std::uint64_t master_seed, std::size_t fold);
std::uint64_t fold_plan_seed(std::uint64_t master_seed);

struct MethodResult {
  std::string method;
  std::vector<std::size_t> selected;  // members used; all for the unpruned ensemble
  // Metric name -> value; absent or empty means undefined or disabled.
  std::map<std::string, MaybeReal> values;
  std::optional<OracleBoundReport> bounds;

  MaybeReal get(const std::string& metric) const;
};

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::size_t ensemble_members = 0;
  std::vector<MethodResult> methods;
};

struct Report {
  ExperimentConfig config;
  std::string dataset_name;
  std::size_t rows = 0;
  std::vector<std::string> sensitive_names;
  std::vector<std::string> methods;
  std::vector<FoldResult> folds;
};

/// Group-fairness metric key for one sensitive attribute, e.g. "dp[race]".
std::string group_metric_key(GroupMeasure m, const std::string& attr);

/// Metrics of a profile's votes on `d` (the dataset the profile was built on).
MethodResult evaluate_profile(const std::string& method, const EnsembleProfile& profile, const Dataset& d,
                              const std::vector<std::string>& metrics);

/// Uniform-weight profile restricted to `selection`.
EnsembleProfile select_profile(const EnsembleProfile& profile, std::span<const std::size_t> selection);

Report run_experiment(const ExperimentConfig& cfg);
Report run_experiment(const ExperimentConfig& cfg, const Dataset& data, const std::string& dataset_name);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
  std::size_t count = 0;
};

/// Per method, per metric mean and standard deviation over folds; undefined
/// fold values are skipped and all-undefined metrics are absent.
std::map<std::string, std::map<std::string, MetricSummary>> summarize(const Report& report);

struct CorrelationTable {
  std::string pooling;  // "fold" or "dataset-mean"
  std::vector<std::string> measures;
  std::vector<MaybeReal> coefficients;
  std::vector<std::size_t> points;
};

/// Pearson correlation of each fairness measure with the accuracy variation
/// (accuracy on original minus accuracy on perturbed features).
/// Fold pooling treats every (report, fold, method) as a point; dataset-mean
/// pooling uses every (report, method) mean.
CorrelationTable correlation_study(std::span<const Report> reports, const std::string& pooling);
CorrelationTable correlation_study(const Report& report, const std::string& pooling = "fold");

/// Friedman average ranks for a methods x datasets score matrix.
std::vector<double> friedman_avg_rank(const Matrix<double>& scores, bool lower_is_better);

std::string report_to_json(const Report& report);
/// Writes summary.json and one table_<metric>.csv per metric into `dir`.
void write_report_bundle(const Report& report, const std::filesystem::path& dir);

}  // namespace fairens
