#include "fairens/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairens/error.hpp"
#include "fairens/random.hpp"
#include "parallel.hpp"

namespace fairens {

namespace {

using json = nlohmann::ordered_json;

bool enabled(const std::vector<std::string>& metrics, const std::string& name) {
  return std::find(metrics.begin(), metrics.end(), name) != metrics.end();
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw Error(ErrorCode::InvalidArgument, "unknown key '" + key + "' in " + where);
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names = {"accuracy", "precision", "recall", "f1",  "specificity",
                                                 "dr",       "dp",        "eo",     "pqp", "bounds"};
  return names;
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig cfg;
  cfg.ensemble = EnsembleConfig{"bagging", 11, 4, 0};
  PruneConfig pc;
  pc.k = 5;
  pc.lambda = 0.5;
  pc.machines = 2;
  cfg.pruners = {{"EPAF-C", "epaf-c", pc}, {"EPAF-D", "epaf-d", pc}, {"POAF", "poaf", pc}};
  cfg.metrics = known_metrics();
  return cfg;
}

ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg = default_experiment_config();
  try {
    const json j = json::parse(json_text);
    reject_unknown_keys(j, {"name", "data", "ensemble", "pruners", "folds", "seed", "metrics", "output_dir", "threads"},
                        "experiment config");
    cfg.name = j.value("name", std::string{});
    if (j.contains("data")) {
      const auto& d = j.at("data");
      if (d.contains("synthetic")) {
        const auto& s = d.at("synthetic");
        reject_unknown_keys(s, {"n", "bias", "features", "seed"}, "data.synthetic");
        cfg.data.kind = "synthetic";
        cfg.data.n = s.value("n", cfg.data.n);
        cfg.data.bias = s.value("bias", cfg.data.bias);
        cfg.data.features = s.value("features", cfg.data.features);
        cfg.data.seed = s.value("seed", cfg.data.seed);
      } else if (d.contains("csv")) {
        reject_unknown_keys(d, {"csv", "schema"}, "data");
        cfg.data.kind = "csv";
        auto resolve = [&](const std::string& p) {
          std::filesystem::path path(p);
          return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
        };
        cfg.data.csv_path = resolve(d.at("csv").get<std::string>());
        cfg.data.schema_path = resolve(d.at("schema").get<std::string>());
      } else {
        throw Error(ErrorCode::InvalidArgument, "data must contain 'synthetic' or 'csv'");
      }
    }
    if (j.contains("ensemble")) {
      const auto& e = j.at("ensemble");
      reject_unknown_keys(e, {"trainer", "members", "max_depth"}, "ensemble");
      cfg.ensemble.trainer = e.value("trainer", cfg.ensemble.trainer);
      cfg.ensemble.members = e.value("members", cfg.ensemble.members);
      cfg.ensemble.max_depth = e.value("max_depth", cfg.ensemble.max_depth);
    }
    if (j.contains("pruners")) {
      cfg.pruners.clear();
      for (const auto& p : j.at("pruners")) {
        reject_unknown_keys(p, {"name", "algorithm", "k", "lambda", "machines", "iteration_multiplier"}, "pruner");
        PrunerSpec spec;
        spec.algorithm = p.at("algorithm").get<std::string>();
        spec.name = p.value("name", spec.algorithm);
        spec.config.k = p.value("k", spec.config.k);
        spec.config.lambda = p.value("lambda", spec.config.lambda);
        spec.config.machines = p.value("machines", spec.config.machines);
        spec.config.iteration_multiplier = p.value("iteration_multiplier", spec.config.iteration_multiplier);
        cfg.pruners.push_back(std::move(spec));
      }
    }
    cfg.folds = j.value("folds", cfg.folds);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("metrics")) cfg.metrics = j.at("metrics").get<std::vector<std::string>>();
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    cfg.threads = j.value("threads", cfg.threads);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("experiment config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_text(path), path.parent_path());
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.folds < 2) throw Error(ErrorCode::InvalidArgument, "at least two folds required");
  if (cfg.metrics.empty()) throw Error(ErrorCode::InvalidArgument, "at least one metric must be enabled");
  for (const auto& m : cfg.metrics)
    if (!enabled(known_metrics(), m)) throw Error(ErrorCode::InvalidArgument, "unknown metric '" + m + "'");
  if (cfg.ensemble.members < 1) throw Error(ErrorCode::InvalidArgument, "ensemble needs at least one member");
  if (cfg.ensemble.max_depth < 0) throw Error(ErrorCode::InvalidArgument, "max_depth must be non-negative");
  std::set<std::string> names{"unpruned"};
  for (const auto& p : cfg.pruners) {
    if (p.algorithm != "poaf" && p.algorithm != "epaf-c" && p.algorithm != "epaf-d")
      throw Error(ErrorCode::InvalidArgument, "unknown pruning algorithm '" + p.algorithm + "'");
    if (!names.insert(p.name).second) throw Error(ErrorCode::InvalidArgument, "duplicate method name '" + p.name + "'");
    if (!(p.config.lambda > 0.0 && p.config.lambda < 1.0)) throw Error(ErrorCode::InvalidLambda, "lambda must lie in (0,1)");
    if (p.config.k < 1 || p.config.machines < 1 || p.config.iteration_multiplier < 1)
      throw Error(ErrorCode::InvalidArgument, "pruner '" + p.name + "' has a non-positive size parameter");
  }
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json data;
  if (cfg.data.kind == "csv") {
    data = {{"csv", cfg.data.csv_path.generic_string()}, {"schema", cfg.data.schema_path.generic_string()}};
  } else {
    data = {{"synthetic",
             {{"n", cfg.data.n}, {"bias", cfg.data.bias}, {"features", cfg.data.features}, {"seed", cfg.data.seed}}}};
  }
  json pruners = json::array();
  for (const auto& p : cfg.pruners) {
    pruners.push_back({{"name", p.name},
                       {"algorithm", p.algorithm},
                       {"k", p.config.k},
                       {"lambda", p.config.lambda},
                       {"machines", p.config.machines},
                       {"iteration_multiplier", p.config.iteration_multiplier}});
  }
  json j = {{"name", cfg.name},
            {"data", std::move(data)},
            {"ensemble",
             {{"trainer", cfg.ensemble.trainer}, {"members", cfg.ensemble.members}, {"max_depth", cfg.ensemble.max_depth}}},
            {"pruners", std::move(pruners)},
            {"folds", cfg.folds},
            {"seed", cfg.seed},
            {"metrics", cfg.metrics},
            {"output_dir", cfg.output_dir.generic_string()},
            {"threads", cfg.threads}};
  return j.dump(2);
}

Dataset load_source(const DataSource& source) {
  if (source.kind == "synthetic") return synth_biased(source.n, source.bias, source.features, source.seed);
  if (source.kind == "csv") return load_csv(source.csv_path, load_schema(source.schema_path));
  throw Error(ErrorCode::InvalidArgument, "unknown data source '" + source.kind + "'");
}

std::uint64_t fold_plan_seed(std::uint64_t master_seed) { return derive_seed(master_seed, {0}); }

FoldSeeds fold_seeds(std::uint64_t master_seed, std::size_t fold) {
  return {derive_seed(master_seed, {1, fold}), derive_seed(master_seed, {2, fold}),
          derive_seed(master_seed, {3, fold}), derive_seed(master_seed, {4, fold})};
}

MaybeReal MethodResult::get(const std::string& metric) const {
  auto it = values.find(metric);
  return it == values.end() ? std::nullopt : it->second;
}

std::string group_metric_key(GroupMeasure m, const std::string& attr) {
  std::string base(to_string(m));
  std::transform(base.begin(), base.end(), base.begin(), [](unsigned char c) { return std::tolower(c); });
  return base + "[" + attr + "]";
}

EnsembleProfile select_profile(const EnsembleProfile& profile, std::span<const std::size_t> selection) {
  if (selection.empty()) throw Error(ErrorCode::EmptySelector, "selection is empty");
  EnsembleProfile sub;
  sub.n_classes = profile.n_classes;
  for (auto j : selection) {
    if (j >= profile.size()) throw Error(ErrorCode::InvalidArgument, "selected member out of range");
    sub.members.push_back(profile.members[j]);
  }
  sub.weights.assign(selection.size(), 1.0 / static_cast<double>(selection.size()));
  recompute_votes(sub);
  return sub;
}

MethodResult evaluate_profile(const std::string& method, const EnsembleProfile& profile, const Dataset& d,
                              const std::vector<std::string>& metrics) {
  if (profile.rows() != d.size()) throw Error(ErrorCode::LengthMismatch, "profile rows differ from dataset rows");
  MethodResult r;
  r.method = method;
  r.values["size"] = static_cast<double>(profile.size());
  const auto& y = d.labels();
  const auto cm = classification_metrics(profile.vote_orig, y);
  if (enabled(metrics, "accuracy")) {
    const auto cm_pert = classification_metrics(profile.vote_pert, y);
    r.values["accuracy"] = cm.accuracy;
    r.values["accuracy_perturbed"] = cm_pert.accuracy;
    r.values["delta_accuracy"] = cm.accuracy - cm_pert.accuracy;
  }
  if (enabled(metrics, "precision")) r.values["precision"] = cm.precision;
  if (enabled(metrics, "recall")) r.values["recall"] = cm.recall;
  if (enabled(metrics, "f1")) r.values["f1"] = cm.f1;
  if (enabled(metrics, "specificity")) r.values["specificity"] = cm.specificity;
  if (enabled(metrics, "dr")) r.values["dr"] = profile.ensemble_dr();
  for (auto m : {GroupMeasure::DP, GroupMeasure::EO, GroupMeasure::PQP}) {
    std::string name(to_string(m));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!enabled(metrics, name)) continue;
    for (std::size_t a = 0; a < d.n_sensitive(); ++a) {
      const auto key = group_metric_key(m, d.sensitive_names()[a]);
      if (d.n_classes() != 2) {
        r.values[key] = std::nullopt;
        continue;
      }
      const auto group = d.privileged_group(a);
      r.values[key] = group_fairness(m, profile.vote_orig, y, group).value;
    }
  }
  if (enabled(metrics, "bounds")) r.bounds = audit_bounds(profile);
  return r;
}

Report run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const Dataset data = load_source(cfg.data);
  std::string name = cfg.name;
  if (name.empty()) {
    if (cfg.data.kind == "csv") {
      name = cfg.data.csv_path.stem().string();
    } else {
      std::ostringstream ss;
      ss << "synth(n=" << cfg.data.n << ",bias=" << cfg.data.bias << ",seed=" << cfg.data.seed << ")";
      name = ss.str();
    }
  }
  return run_experiment(cfg, data, name);
}

Report run_experiment(const ExperimentConfig& cfg, const Dataset& data, const std::string& dataset_name) {
  validate(cfg);
  const FoldPlan plan = kfold_split(data.size(), cfg.folds, fold_plan_seed(cfg.seed));

  Report report;
  report.config = cfg;
  report.dataset_name = dataset_name;
  report.rows = data.size();
  report.sensitive_names = data.sensitive_names();
  report.methods.push_back("unpruned");
  for (const auto& p : cfg.pruners) report.methods.push_back(p.name);
  report.folds.resize(cfg.folds);

  detail::parallel_for(cfg.folds, cfg.threads, [&](std::size_t f) {
    try {
      const FoldSeeds seeds = fold_seeds(cfg.seed, f);
      FoldResult fr;
      fr.fold = f;
      fr.train_rows = plan.train_rows(f);
      fr.test_rows = plan.test_rows(f);
      const Dataset train = data.subset(fr.train_rows);
      const Dataset test = data.subset(fr.test_rows);

      EnsembleConfig ec = cfg.ensemble;
      ec.seed = seeds.ensemble;
      const WeightedEnsemble ensemble = train_ensemble(train, ec);
      fr.ensemble_members = ensemble.size();

      const EnsembleProfile train_profile =
          build_profile(ensemble, train, perturb_sensitive(train, seeds.train_perturbation));
      const PruningProblem problem(train_profile, train.labels());
      const EnsembleProfile test_profile =
          build_profile(ensemble, test, perturb_sensitive(test, seeds.test_perturbation));

      MethodResult unpruned = evaluate_profile("unpruned", test_profile, test, cfg.metrics);
      unpruned.selected.resize(ensemble.size());
      std::iota(unpruned.selected.begin(), unpruned.selected.end(), std::size_t{0});
      fr.methods.push_back(std::move(unpruned));

      for (std::size_t p = 0; p < cfg.pruners.size(); ++p) {
        const auto& spec = cfg.pruners[p];
        PruneConfig pc = spec.config;
        pc.seed = derive_seed(seeds.pruner_base, {p});
        // Boosting may stop early, leaving fewer members than configured.
        pc.k = std::min(pc.k, ensemble.size());
        pc.machines = std::min(pc.machines, ensemble.size());
        pc.threads = 1;
        const PruneResult pr = prune(problem, spec.algorithm, pc);
        MethodResult mr = evaluate_profile(spec.name, select_profile(test_profile, pr.selected), test, cfg.metrics);
        mr.selected = pr.selected;
        fr.methods.push_back(std::move(mr));
      }
      report.folds[f] = std::move(fr);
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(f) + ": " + e.what());
    }
  });
  return report;
}

std::map<std::string, std::map<std::string, MetricSummary>> summarize(const Report& report) {
  std::map<std::string, std::map<std::string, std::vector<double>>> collected;
  for (const auto& fold : report.folds)
    for (const auto& m : fold.methods)
      for (const auto& [key, value] : m.values)
        if (value) collected[m.method][key].push_back(*value);

  std::map<std::string, std::map<std::string, MetricSummary>> out;
  for (const auto& [method, metrics] : collected) {
    for (const auto& [key, vals] : metrics) {
      MetricSummary s;
      s.count = vals.size();
      s.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
      if (vals.size() > 1) {
        double ss = 0.0;
        for (double v : vals) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(vals.size() - 1));
      }
      out[method][key] = s;
    }
  }
  return out;
}

namespace {

std::vector<std::string> fairness_measures(std::span<const Report> reports) {
  std::vector<std::string> measures{"dr"};
  for (auto m : {GroupMeasure::DP, GroupMeasure::EO, GroupMeasure::PQP}) {
    std::set<std::string> keys;
    for (const auto& r : reports)
      for (const auto& a : r.sensitive_names) keys.insert(group_metric_key(m, a));
    measures.insert(measures.end(), keys.begin(), keys.end());
  }
  return measures;
}

}  // namespace

CorrelationTable correlation_study(std::span<const Report> reports, const std::string& pooling) {
  if (pooling != "fold" && pooling != "dataset-mean")
    throw Error(ErrorCode::InvalidArgument, "pooling must be 'fold' or 'dataset-mean'");
  CorrelationTable table;
  table.pooling = pooling;
  table.measures = fairness_measures(reports);

  // Points as metric maps: one per (report, fold, method) or (report, method).
  std::vector<std::map<std::string, MaybeReal>> points;
  for (const auto& r : reports) {
    if (pooling == "fold") {
      for (const auto& f : r.folds)
        for (const auto& m : f.methods) points.push_back(m.values);
    } else {
      for (const auto& [method, metrics] : summarize(r)) {
        std::map<std::string, MaybeReal> p;
        for (const auto& [key, s] : metrics) p[key] = s.mean;
        points.push_back(std::move(p));
      }
    }
  }

  for (const auto& measure : table.measures) {
    std::vector<double> x, y;
    for (const auto& p : points) {
      auto mx = p.find(measure);
      auto my = p.find("delta_accuracy");
      if (mx == p.end() || my == p.end() || !mx->second || !my->second) continue;
      x.push_back(*mx->second);
      y.push_back(*my->second);
    }
    table.points.push_back(x.size());
    try {
      table.coefficients.push_back(pearson(x, y));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConstantVector && e.code() != ErrorCode::LengthMismatch) throw;
      table.coefficients.push_back(std::nullopt);
    }
  }
  return table;
}

CorrelationTable correlation_study(const Report& report, const std::string& pooling) {
  return correlation_study(std::span<const Report>(&report, 1), pooling);
}

std::vector<double> friedman_avg_rank(const Matrix<double>& scores, bool lower_is_better) {
  const std::size_t methods = scores.rows(), datasets = scores.cols();
  if (methods < 2 || datasets < 1)
    throw Error(ErrorCode::ShapeMismatch, "ranking needs at least two methods and one dataset");
  std::vector<double> total(methods, 0.0);
  std::vector<std::size_t> order(methods);
  for (std::size_t c = 0; c < datasets; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto better = [&](std::size_t a, std::size_t b) {
      return lower_is_better ? scores(a, c) < scores(b, c) : scores(a, c) > scores(b, c);
    };
    std::stable_sort(order.begin(), order.end(), better);
    for (std::size_t i = 0; i < methods;) {
      std::size_t j = i + 1;
      while (j < methods && scores(order[j], c) == scores(order[i], c)) ++j;
      // Positions i..j-1 share the average of ranks i+1..j.
      const double rank = static_cast<double>(i + 1 + j) / 2.0;
      for (std::size_t t = i; t < j; ++t) total[order[t]] += rank;
      i = j;
    }
  }
  for (auto& t : total) t /= static_cast<double>(datasets);
  return total;
}

}  // namespace fairens
