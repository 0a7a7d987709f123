#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairens/bounds.hpp"
#include "fairens/dataset.hpp"
#include "fairens/ensemble.hpp"
#include "fairens/error.hpp"
#include "fairens/harness.hpp"
#include "fairens/pruning.hpp"
#include "fairens/random.hpp"
#include "fairens/version.hpp"

namespace fairens::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json tool_json() { return {{"name", kToolName}, {"version", kVersion}}; }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::FileNotFound, "failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension();
  p += ".schema.json";
  return p;
}

// Perturbation and pruning draw from separate streams of the user seed.
std::uint64_t perturbation_seed(std::uint64_t seed) { return derive_seed(seed, {0}); }

struct DataArgs {
  std::string data;
  std::string schema;
};

void add_data_options(CLI::App* app, DataArgs& a) {
  app->add_option("--data", a.data, "Dataset CSV")->required();
  app->add_option("--schema", a.schema, "Schema JSON (default: <data stem>.schema.json)");
}

fs::path schema_for(const DataArgs& a) { return a.schema.empty() ? sidecar_path(a.data) : fs::path(a.schema); }

Dataset load_data(const DataArgs& a) { return load_csv(a.data, load_schema(schema_for(a))); }

json data_json(const DataArgs& a) { return {{"data", a.data}, {"schema", schema_for(a).generic_string()}}; }

// ---- synth ----

struct SynthArgs {
  std::size_t n = 0;
  double bias = 0.0;
  std::size_t features = 5;
  std::uint64_t seed = 0;
  std::string out;
};

void run_synth(const SynthArgs& a) {
  const Dataset d = synth_biased(a.n, a.bias, a.features, a.seed);
  const fs::path out(a.out);
  write_text(out, to_csv(d));
  json schema = json::parse(schema_to_json(roundtrip_schema(d)));
  schema["tool"] = tool_json();
  schema["generator"] = {{"command", "synth"}, {"n", a.n}, {"bias", a.bias}, {"features", a.features}, {"seed", a.seed}};
  write_text(sidecar_path(out), schema.dump(2) + "\n");
}

// ---- train ----

struct TrainArgs {
  DataArgs data;
  std::string trainer = "bagging";
  std::size_t members = 11;
  int depth = 4;
  std::uint64_t seed = 0;
  std::string out;
};

void run_train(const TrainArgs& a) {
  const Dataset d = load_data(a.data);
  const EnsembleConfig cfg{a.trainer, a.members, a.depth, a.seed};
  const WeightedEnsemble e = train_ensemble(d, cfg);
  json model = json::parse(ensemble_to_json(e));
  model["inputs"] = data_json(a.data);
  write_text(a.out, model.dump(1) + "\n");
}

// ---- prune ----

struct PruneArgs {
  std::string model;
  DataArgs data;
  std::string algo;
  std::size_t k = 5;
  double lambda = 0.5;
  std::size_t machines = 2;
  std::size_t multiplier = 1;
  std::size_t threads = 1;
  std::uint64_t seed = 0;
  std::string out;
};

void run_prune(const PruneArgs& a) {
  const WeightedEnsemble e = load_ensemble(a.model);
  const Dataset d = load_data(a.data);
  const EnsembleProfile profile = build_profile(e, d, perturb_sensitive(d, perturbation_seed(a.seed)));
  const PruningProblem problem(profile, d.labels());
  PruneConfig cfg;
  cfg.k = a.k;
  cfg.lambda = a.lambda;
  cfg.machines = a.machines;
  cfg.iteration_multiplier = a.multiplier;
  cfg.threads = a.threads;
  cfg.seed = a.seed;
  const PruneResult r = prune(problem, a.algo, cfg);
  json j = json::parse(prune_result_to_json(r));
  j["inputs"] = {{"model", a.model}, {"data", a.data.data}, {"schema", schema_for(a.data).generic_string()},
                 {"perturbation_seed", perturbation_seed(a.seed)}};
  write_text(a.out, j.dump(2) + "\n");
}

// ---- audit-bounds ----

struct AuditArgs {
  std::string model;
  DataArgs data;
  std::uint64_t seed = 0;
  double delta = 0.05;
  std::string out;
};

json pac_json(const PacBoundReport& p) {
  return {{"kind", p.kind},       {"empirical", p.empirical}, {"slack", p.slack}, {"bound", p.bound},
          {"n", p.n},             {"delta", p.delta},         {"class_size", p.class_size}, {"kl", p.kl}};
}

void run_audit(const AuditArgs& a) {
  const WeightedEnsemble e = load_ensemble(a.model);
  const Dataset d = load_data(a.data);
  const EnsembleProfile profile = build_profile(e, d, perturb_sensitive(d, perturbation_seed(a.seed)));
  const OracleBoundReport oracle = audit_bounds(e, profile);

  const std::vector<double> uniform(e.size(), 1.0 / static_cast<double>(e.size()));
  const double kl = kl_discrete(e.weights(), uniform);
  json pac = json::array();
  pac.push_back(pac_json(pac_single(oracle.ensemble_dr, d.size(), a.delta)));
  pac.push_back(pac_json(pac_class(oracle.ensemble_dr, d.size(), a.delta, e.size())));
  pac.push_back(pac_json(pac_mcallester(oracle.expected_member_dr, d.size(), a.delta, kl)));

  json j = {{"tool", tool_json()},
            {"config",
             {{"model", a.model},
              {"data", a.data.data},
              {"schema", schema_for(a.data).generic_string()},
              {"seed", a.seed},
              {"perturbation_seed", perturbation_seed(a.seed)},
              {"delta", a.delta}}},
            {"rows", d.size()},
            {"members", e.size()},
            {"oracle", json::parse(oracle_report_to_json(oracle))},
            {"pac", std::move(pac)}};
  write_text(a.out, j.dump(2) + "\n");
}

// ---- run ----

struct RunArgs {
  std::string config;
  std::string out;
  std::size_t threads = 0;
};

void run_experiment_cmd(const RunArgs& a, std::ostream& out) {
  ExperimentConfig cfg = load_experiment_config(a.config);
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.threads > 0) cfg.threads = a.threads;
  if (cfg.output_dir.empty())
    throw Error(ErrorCode::InvalidArgument, "no output directory: set output_dir in the config or pass --out");
  const Report report = run_experiment(cfg);
  write_report_bundle(report, cfg.output_dir);
  out << "wrote " << (cfg.output_dir / "summary.json").string() << '\n';
}

// ---- ranks ----

struct RanksArgs {
  std::string scores;
  bool lower_is_better = false;
  std::string out;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_score(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error(ErrorCode::UnparseableValue, "line " + std::to_string(line) + ": cannot parse score '" + s + "'");
  return v;
}

// Header: <label>,<method>,...; one row per dataset.
void run_ranks(const RanksArgs& a) {
  std::istringstream in(read_text(a.scores));
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyFile, a.scores + " is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 2) throw Error(ErrorCode::InvalidSchema, "score table needs at least one method column");
  const std::vector<std::string> methods(header.begin() + 1, header.end());

  std::vector<std::string> datasets;
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::ShapeMismatch, "line " + std::to_string(lineno) + " has the wrong number of cells");
    datasets.push_back(cells[0]);
    std::vector<double> r;
    for (std::size_t c = 1; c < cells.size(); ++c) r.push_back(parse_score(cells[c], lineno));
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyFile, a.scores + " has no data rows");

  Matrix<double> scores(methods.size(), rows.size());
  for (std::size_t dset = 0; dset < rows.size(); ++dset)
    for (std::size_t m = 0; m < methods.size(); ++m) scores(m, dset) = rows[dset][m];
  const auto avg = friedman_avg_rank(scores, a.lower_is_better);

  json ranks = json::object();
  for (std::size_t m = 0; m < methods.size(); ++m) ranks[methods[m]] = avg[m];
  json j = {{"tool", tool_json()},
            {"config", {{"scores", a.scores}, {"lower_is_better", a.lower_is_better}}},
            {"methods", methods},
            {"datasets", datasets},
            {"average_rank", std::move(ranks)}};
  write_text(a.out, j.dump(2) + "\n");
}

}  // namespace

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fairness-aware ensemble training, pruning and bound auditing", std::string(kToolName)};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a biased synthetic dataset (CSV + schema sidecar)");
  s->add_option("--n", synth.n, "Row count")->required();
  s->add_option("--bias", synth.bias, "Probability that a label copies the sensitive attribute")->required();
  s->add_option("--features", synth.features, "General feature count")->capture_default_str();
  s->add_option("--seed", synth.seed, "Random seed")->required();
  s->add_option("--out", synth.out, "Output CSV; the schema goes to <stem>.schema.json")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a weighted tree ensemble (model JSON)");
  add_data_options(t, train.data);
  t->add_option("--trainer", train.trainer, "bagging | adaboost-m1 | samme")
      ->check(CLI::IsMember({"bagging", "adaboost-m1", "samme"}))
      ->capture_default_str();
  t->add_option("--m", train.members, "Ensemble size")->capture_default_str();
  t->add_option("--depth", train.depth, "Maximum tree depth")->capture_default_str();
  t->add_option("--seed", train.seed, "Random seed")->required();
  t->add_option("--out", train.out, "Output model JSON")->required();

  PruneArgs pr;
  auto* p = app.add_subcommand("prune", "Select a fair sub-ensemble (result JSON)");
  p->add_option("--model", pr.model, "Model JSON")->required();
  add_data_options(p, pr.data);
  p->add_option("--algo", pr.algo, "poaf | epaf-c | epaf-d")
      ->check(CLI::IsMember({"poaf", "epaf-c", "epaf-d"}))
      ->required();
  p->add_option("--k", pr.k, "Sub-ensemble size")->capture_default_str();
  p->add_option("--lambda", pr.lambda, "Accuracy/fairness trade-off in (0,1)")->capture_default_str();
  p->add_option("--nm", pr.machines, "EPAF-D group count")->capture_default_str();
  p->add_option("--iterations", pr.multiplier, "POAF iteration multiplier")->capture_default_str();
  p->add_option("--threads", pr.threads, "Worker cap")->capture_default_str();
  p->add_option("--seed", pr.seed, "Random seed")->required();
  p->add_option("--out", pr.out, "Output result JSON")->required();

  AuditArgs au;
  auto* b = app.add_subcommand("audit-bounds", "Check oracle and PAC bounds of a model on a dataset (report JSON)");
  b->add_option("--model", au.model, "Model JSON")->required();
  add_data_options(b, au.data);
  b->add_option("--seed", au.seed, "Perturbation seed")->required();
  b->add_option("--delta", au.delta, "Confidence parameter in (0,1]")->capture_default_str();
  b->add_option("--out", au.out, "Output report JSON")->required();

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run a cross-validation experiment (summary.json + table_*.csv)");
  r->add_option("--config", run.config, "Experiment config JSON")->required();
  r->add_option("--out", run.out, "Output directory (overrides output_dir)");
  r->add_option("--threads", run.threads, "Worker cap (overrides threads)");

  RanksArgs rk;
  auto* k = app.add_subcommand("ranks", "Friedman average ranks of a methods score table (JSON)");
  k->add_option("--scores", rk.scores, "CSV with header <label>,<method>... and one row per dataset")->required();
  k->add_flag("--lower-is-better", rk.lower_is_better, "Rank ascending scores first");
  k->add_option("--out", rk.out, "Output JSON")->required();

  // CLI11 consumes a reversed token vector.
  std::vector<std::string> tokens(args.rbegin(), args.rend());
  try {
    app.parse(tokens);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    if (*s) run_synth(synth);
    else if (*t) run_train(train);
    else if (*p) run_prune(pr);
    else if (*b) run_audit(au);
    else if (*r) run_experiment_cmd(run, out);
    else if (*k) run_ranks(rk);
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_data_error(e.code()) ? kDataError : kInvariant;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInvariant;
  }
}

}  // namespace fairens::cli
