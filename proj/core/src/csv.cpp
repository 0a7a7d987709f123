#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairens/dataset.hpp"
#include "fairens/error.hpp"

namespace fairens {

namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one record. Double quotes delimit fields that contain the delimiter;
// a doubled quote inside a quoted field is a literal quote.
std::vector<std::string> split_record(std::string_view line, char delim) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

[[noreturn]] void unparseable(std::size_t row, const std::string& column, const std::string& cell) {
  throw Error(ErrorCode::UnparseableValue,
              "row " + std::to_string(row) + ", column '" + column + "': '" + cell + "'");
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string quote_if_needed(const std::string& s, char delim) {
  if (s.find(delim) == std::string::npos && s.find('"') == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

DatasetSchema parse_schema(std::string_view json_text) {
  DatasetSchema s;
  try {
    const json j = json::parse(json_text);
    s.label_column = j.at("label").get<std::string>();
    if (j.contains("positive_label") && !j.at("positive_label").is_null()) {
      const auto& p = j.at("positive_label");
      s.positive_label = p.is_string() ? p.get<std::string>() : p.dump();
    }
    if (j.contains("sensitive")) {
      for (const auto& e : j.at("sensitive")) {
        SensitiveColumn c;
        c.name = e.at("name").get<std::string>();
        if (e.contains("levels")) c.levels = e.at("levels").get<std::vector<std::string>>();
        c.cardinality = e.contains("cardinality") ? e.at("cardinality").get<int>()
                                                  : static_cast<int>(c.levels.size());
        c.privileged_value = e.value("privileged", 1);
        s.sensitive_columns.push_back(std::move(c));
      }
    }
    if (j.contains("categorical")) s.categorical_columns = j.at("categorical").get<std::vector<std::string>>();
    if (j.contains("delimiter")) {
      const auto d = j.at("delimiter").get<std::string>();
      if (d.size() != 1) throw Error(ErrorCode::InvalidSchema, "delimiter must be one character");
      s.delimiter = d[0];
    }
    s.n_classes = j.value("n_classes", 0);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidSchema, e.what());
  }
  for (const auto& c : s.sensitive_columns) {
    if (c.cardinality < 1) throw Error(ErrorCode::InvalidSchema, "cardinality of " + c.name + " must be positive");
    if (c.privileged_value < 0 || c.privileged_value >= c.cardinality)
      throw Error(ErrorCode::InvalidSchema, "privileged value of " + c.name + " outside its domain");
    if (!c.levels.empty() && static_cast<int>(c.levels.size()) != c.cardinality)
      throw Error(ErrorCode::InvalidSchema, "levels of " + c.name + " disagree with cardinality");
  }
  return s;
}

DatasetSchema load_schema(const std::filesystem::path& path) { return parse_schema(read_file(path)); }

std::string schema_to_json(const DatasetSchema& s) {
  json j = json::object();
  j["label"] = s.label_column;
  if (!s.positive_label.empty()) j["positive_label"] = s.positive_label;
  json sens = json::array();
  for (const auto& c : s.sensitive_columns) {
    json e = {{"name", c.name}, {"cardinality", c.cardinality}, {"privileged", c.privileged_value}};
    if (!c.levels.empty()) e["levels"] = c.levels;
    sens.push_back(std::move(e));
  }
  j["sensitive"] = std::move(sens);
  j["categorical"] = s.categorical_columns;
  j["delimiter"] = std::string(1, s.delimiter);
  if (s.n_classes > 0) j["n_classes"] = s.n_classes;
  return j.dump(2);
}

Dataset parse_csv(std::string_view text, const DatasetSchema& schema) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(ErrorCode::EmptyFile, "no header row");
  const auto header = split_record(lines[0], schema.delimiter);
  if (lines.size() < 2) throw Error(ErrorCode::EmptyFile, "no data rows");

  std::map<std::string, std::size_t> col_index;
  for (std::size_t c = 0; c < header.size(); ++c) col_index.emplace(header[c], c);
  auto require = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it == col_index.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not in header");
    return it->second;
  };

  const std::size_t label_col = require(schema.label_column);
  std::vector<std::size_t> sens_cols;
  for (const auto& s : schema.sensitive_columns) sens_cols.push_back(require(s.name));
  std::set<std::size_t> categorical;
  for (const auto& c : schema.categorical_columns) categorical.insert(require(c));

  std::vector<std::vector<std::string>> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto fields = split_record(lines[r], schema.delimiter);
    if (fields.size() != header.size())
      throw Error(ErrorCode::UnparseableValue, "row " + std::to_string(r) + " has " +
                                                   std::to_string(fields.size()) + " fields, expected " +
                                                   std::to_string(header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c)
      if (fields[c].empty() || fields[c] == "?" || fields[c] == "NA") unparseable(r, header[c], fields[c]);
    rows.push_back(std::move(fields));
  }
  const std::size_t n = rows.size();

  // General-feature layout: header order, categorical columns expanded in place.
  struct Slot {
    std::size_t source;
    bool one_hot;
    std::string level;
  };
  std::vector<Slot> slots;
  std::vector<std::string> names;
  std::set<std::size_t> skip(sens_cols.begin(), sens_cols.end());
  skip.insert(label_col);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (skip.contains(c)) continue;
    if (categorical.contains(c)) {
      std::set<std::string> levels;
      for (const auto& row : rows) levels.insert(row[c]);
      for (const auto& lv : levels) {
        slots.push_back({c, true, lv});
        names.push_back(header[c] + "=" + lv);
      }
    } else {
      slots.push_back({c, false, {}});
      names.push_back(header[c]);
    }
  }

  Matrix<double> general(n, slots.size());
  Matrix<int> sensitive(n, sens_cols.size());
  std::vector<ClassIndex> labels(n);
  int max_label = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows[r];
    for (std::size_t s = 0; s < slots.size(); ++s) {
      const auto& slot = slots[s];
      if (slot.one_hot) {
        general(r, s) = row[slot.source] == slot.level ? 1.0 : 0.0;
      } else if (!parse_double(row[slot.source], general(r, s))) {
        unparseable(r + 1, header[slot.source], row[slot.source]);
      }
    }
    for (std::size_t a = 0; a < sens_cols.size(); ++a) {
      const auto& spec = schema.sensitive_columns[a];
      const std::string& cell = row[sens_cols[a]];
      int v = -1;
      if (!spec.levels.empty()) {
        auto it = std::find(spec.levels.begin(), spec.levels.end(), cell);
        if (it != spec.levels.end()) v = static_cast<int>(it - spec.levels.begin());
      } else if (!parse_int(cell, v)) {
        v = -1;
      }
      if (v < 0 || v >= spec.cardinality) unparseable(r + 1, spec.name, cell);
      sensitive(r, a) = v;
    }
    const std::string& lab = row[label_col];
    if (!schema.positive_label.empty()) {
      labels[r] = lab == schema.positive_label ? 1 : 0;
    } else {
      int v = 0;
      if (!parse_int(lab, v) || v < 0) unparseable(r + 1, schema.label_column, lab);
      labels[r] = v;
      max_label = std::max(max_label, v);
    }
  }

  const int n_classes =
      schema.positive_label.empty() ? std::max({max_label + 1, schema.n_classes, 2}) : 2;
  std::vector<std::string> sens_names;
  std::vector<int> cards, priv;
  for (const auto& s : schema.sensitive_columns) {
    sens_names.push_back(s.name);
    cards.push_back(s.cardinality);
    priv.push_back(s.privileged_value);
  }
  return Dataset(std::move(general), std::move(sensitive), std::move(labels), n_classes, std::move(names),
                 std::move(sens_names), std::move(cards), std::move(priv));
}

Dataset load_csv(const std::filesystem::path& path, const DatasetSchema& schema) {
  return parse_csv(read_file(path), schema);
}

DatasetSchema roundtrip_schema(const Dataset& d) {
  DatasetSchema s;
  std::set<std::string> taken(d.feature_names().begin(), d.feature_names().end());
  taken.insert(d.sensitive_names().begin(), d.sensitive_names().end());
  s.label_column = "label";
  while (taken.contains(s.label_column)) s.label_column = "_" + s.label_column;
  for (std::size_t j = 0; j < d.n_sensitive(); ++j)
    s.sensitive_columns.push_back({d.sensitive_names()[j], d.cardinalities()[j], d.privileged_values()[j], {}});
  s.n_classes = d.n_classes();
  return s;
}

std::string to_csv(const Dataset& d) {
  const DatasetSchema schema = roundtrip_schema(d);
  const char delim = schema.delimiter;
  std::string out;
  auto emit_header = [&](const std::string& name, bool first) {
    if (!first) out.push_back(delim);
    out += quote_if_needed(name, delim);
  };
  bool first = true;
  for (const auto& name : d.feature_names()) {
    emit_header(name, first);
    first = false;
  }
  for (const auto& name : d.sensitive_names()) {
    emit_header(name, first);
    first = false;
  }
  emit_header(schema.label_column, first);
  out.push_back('\n');
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.n_general(); ++j) {
      out += format_double(d.general()(i, j));
      out.push_back(delim);
    }
    for (std::size_t j = 0; j < d.n_sensitive(); ++j) {
      out += std::to_string(d.sensitive()(i, j));
      out.push_back(delim);
    }
    out += std::to_string(d.labels()[i]);
    out.push_back('\n');
  }
  return out;
}

DatasetSchema save_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  out << to_csv(d);
  return roundtrip_schema(d);
}

}  // namespace fairens
