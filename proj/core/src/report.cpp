#include <charconv>
#include <fstream>

#include <json.hpp>

#include "fairens/error.hpp"
#include "fairens/harness.hpp"
#include "fairens/version.hpp"

namespace fairens {

namespace {

using json = nlohmann::ordered_json;

struct TableSpec {
  std::string metric;  // base name; group measures expand per attribute
  bool group = false;
  bool lower_is_better = false;
};

const std::vector<TableSpec>& table_specs() {
  static const std::vector<TableSpec> specs = {
      {"accuracy", false, false}, {"accuracy_perturbed", false, false}, {"delta_accuracy", false, true},
      {"precision", false, false}, {"recall", false, false},            {"f1", false, false},
      {"specificity", false, false}, {"dr", false, true},               {"dp", true, true},
      {"eo", true, true},           {"pqp", true, true},                {"size", false, true},
  };
  return specs;
}

json maybe(const MaybeReal& v) { return v ? json(*v) : json(nullptr); }

json bounds_json(const OracleBoundReport& b) {
  return {{"proxy", b.proxy},
          {"ensemble_dr", b.ensemble_dr},
          {"expected_member_dr", b.expected_member_dr},
          {"expected_tandem", b.expected_tandem},
          {"first_order", b.first_order},
          {"second_order", b.second_order},
          {"c_tandem", b.c_tandem ? json(*b.c_tandem) : json("inapplicable")},
          {"first_order_holds", b.first_order_holds},
          {"second_order_holds", b.second_order_holds},
          {"c_tandem_holds", b.c_tandem_holds}};
}

// (row label, metric key) pairs of one table.
std::vector<std::pair<std::string, std::string>> table_rows(const Report& report, const TableSpec& spec) {
  std::vector<std::pair<std::string, std::string>> rows;
  if (!spec.group) {
    rows.emplace_back(report.dataset_name, spec.metric);
    return rows;
  }
  for (const auto& a : report.sensitive_names) {
    GroupMeasure m = spec.metric == "dp" ? GroupMeasure::DP : spec.metric == "eo" ? GroupMeasure::EO : GroupMeasure::PQP;
    rows.emplace_back(report.dataset_name + ":" + a, group_metric_key(m, a));
  }
  return rows;
}

std::string fmt(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string report_to_json(const Report& report) {
  const auto summary = summarize(report);

  json folds = json::array();
  for (const auto& f : report.folds) {
    json methods = json::object();
    for (const auto& m : f.methods) {
      json values = json::object();
      for (const auto& [k, v] : m.values) values[k] = maybe(v);
      json entry = {{"selected", m.selected}, {"metrics", std::move(values)}};
      if (m.bounds) entry["bounds"] = bounds_json(*m.bounds);
      methods[m.method] = std::move(entry);
    }
    folds.push_back({{"fold", f.fold},
                     {"train_size", f.train_rows.size()},
                     {"test_size", f.test_rows.size()},
                     {"test_rows", f.test_rows},
                     {"ensemble_members", f.ensemble_members},
                     {"methods", std::move(methods)}});
  }

  json summ = json::object();
  for (const auto& method : report.methods) {
    json per = json::object();
    auto it = summary.find(method);
    if (it != summary.end())
      for (const auto& [k, s] : it->second) per[k] = {{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
    summ[method] = std::move(per);
  }

  json ranks = json::object();
  for (const auto& spec : table_specs()) {
    std::vector<std::vector<double>> cols;
    for (const auto& [row, key] : table_rows(report, spec)) {
      std::vector<double> col;
      for (const auto& method : report.methods) {
        auto mi = summary.find(method);
        if (mi == summary.end()) break;
        auto ki = mi->second.find(key);
        if (ki == mi->second.end()) break;
        col.push_back(ki->second.mean);
      }
      if (col.size() == report.methods.size()) cols.push_back(std::move(col));
    }
    if (cols.empty() || report.methods.size() < 2) continue;
    Matrix<double> scores(report.methods.size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
      for (std::size_t m = 0; m < report.methods.size(); ++m) scores(m, c) = cols[c][m];
    const auto avg = friedman_avg_rank(scores, spec.lower_is_better);
    json r = json::object();
    for (std::size_t m = 0; m < report.methods.size(); ++m) r[report.methods[m]] = avg[m];
    ranks[spec.metric] = std::move(r);
  }

  json correlations = json::object();
  for (const char* pooling : {"fold", "dataset-mean"}) {
    const auto table = correlation_study(report, pooling);
    json c = json::object();
    for (std::size_t i = 0; i < table.measures.size(); ++i)
      c[table.measures[i]] = {{"pearson", maybe(table.coefficients[i])}, {"points", table.points[i]}};
    correlations[pooling] = std::move(c);
  }

  std::size_t audits = 0, v1 = 0, v2 = 0, vc = 0, c_applicable = 0;
  for (const auto& f : report.folds) {
    for (const auto& m : f.methods) {
      if (!m.bounds) continue;
      ++audits;
      v1 += !m.bounds->first_order_holds;
      v2 += !m.bounds->second_order_holds;
      c_applicable += m.bounds->c_tandem.has_value();
      vc += !m.bounds->c_tandem_holds;
    }
  }

  json j = {{"tool", {{"name", kToolName}, {"version", kVersion}}},
            {"config", json::parse(experiment_config_to_json(report.config))},
            {"dataset", {{"name", report.dataset_name}, {"rows", report.rows}, {"sensitive", report.sensitive_names}}},
            {"methods", report.methods},
            {"summary", std::move(summ)},
            {"ranks", std::move(ranks)},
            {"correlations", std::move(correlations)},
            {"bound_audit",
             {{"proxy", "empirical test sample"},
              {"audits", audits},
              {"first_order_violations", v1},
              {"second_order_violations", v2},
              {"c_tandem_applicable", c_applicable},
              {"c_tandem_violations", vc}}},
            {"folds", std::move(folds)}};
  return j.dump(2);
}

void write_report_bundle(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "summary.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::FileNotFound, "cannot write into " + dir.string());
    out << report_to_json(report) << '\n';
  }
  const auto summary = summarize(report);
  for (const auto& spec : table_specs()) {
    std::string text = "row";
    for (const auto& m : report.methods) text += "," + csv_cell(m) + "," + csv_cell(m + "_std");
    text += '\n';
    for (const auto& [row, key] : table_rows(report, spec)) {
      text += csv_cell(row);
      for (const auto& method : report.methods) {
        std::string mean, sd;
        auto mi = summary.find(method);
        if (mi != summary.end()) {
          auto ki = mi->second.find(key);
          if (ki != mi->second.end()) {
            mean = fmt(ki->second.mean);
            sd = fmt(ki->second.std);
          }
        }
        text += "," + mean + "," + sd;
      }
      text += '\n';
    }
    std::ofstream out(dir / ("table_" + spec.metric + ".csv"), std::ios::binary);
    if (!out) throw Error(ErrorCode::FileNotFound, "cannot write into " + dir.string());
    out << text;
  }
}

}  // namespace fairens
