#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairens/ensemble.hpp"
#include "fairens/error.hpp"
#include "fairens/version.hpp"

namespace fairens {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kModelFormat = "fairens.ensemble";
constexpr int kModelVersion = 1;

json node_to_json(const std::vector<TreeNode>& nodes, std::size_t at) {
  const auto& n = nodes[at];
  if (n.is_leaf()) return json{{"leaf", n.label}};
  return json{{"feature", n.feature},
              {"threshold", n.threshold},
              {"majority", n.label},
              {"left", node_to_json(nodes, static_cast<std::size_t>(n.left))},
              {"right", node_to_json(nodes, static_cast<std::size_t>(n.right))}};
}

// Pre-order flattening keeps the "children after parent" layout.
int node_from_json(const json& j, std::vector<TreeNode>& out) {
  const int id = static_cast<int>(out.size());
  out.emplace_back();
  if (j.contains("leaf")) {
    out[id].label = j.at("leaf").get<ClassIndex>();
    return id;
  }
  out[id].feature = j.at("feature").get<int>();
  out[id].threshold = j.at("threshold").get<double>();
  out[id].label = j.value("majority", 0);
  if (out[id].feature < 0) throw Error(ErrorCode::InvalidModel, "negative split feature");
  const int l = node_from_json(j.at("left"), out);
  const int r = node_from_json(j.at("right"), out);
  out[id].left = l;
  out[id].right = r;
  return id;
}

}  // namespace

std::string ensemble_to_json(const WeightedEnsemble& e) {
  json members = json::array();
  for (const auto& m : e.members()) {
    members.push_back(json{{"meta", {{"kind", m.meta().kind}, {"seed", m.meta().seed}, {"max_depth", m.meta().max_depth}}},
                           {"tree", node_to_json(m.nodes(), 0)}});
  }
  const auto& c = e.config();
  const auto& front = e.members().front();
  json j = {{"format", kModelFormat},
            {"version", kModelVersion},
            {"tool", {{"name", kToolName}, {"version", kVersion}}},
            {"config", {{"trainer", c.trainer}, {"members", c.members}, {"max_depth", c.max_depth}, {"seed", c.seed}}},
            {"n_classes", front.n_classes()},
            {"n_general", front.n_general()},
            {"n_sensitive", front.n_sensitive()},
            {"weights", e.weights()},
            {"members", std::move(members)}};
  return j.dump(1);
}

WeightedEnsemble ensemble_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormat)
      throw Error(ErrorCode::InvalidModel, "not an ensemble model document");
    if (j.at("version").get<int>() != kModelVersion)
      throw Error(ErrorCode::InvalidModel, "unsupported model version " + j.at("version").dump());
    const int nc = j.at("n_classes").get<int>();
    const auto ng = j.at("n_general").get<std::size_t>();
    const auto ns = j.at("n_sensitive").get<std::size_t>();
    std::vector<Hypothesis> members;
    for (const auto& mj : j.at("members")) {
      std::vector<TreeNode> nodes;
      node_from_json(mj.at("tree"), nodes);
      const auto& meta = mj.at("meta");
      members.emplace_back(std::move(nodes), nc, ng, ns,
                           TrainingMeta{meta.at("kind").get<std::string>(), meta.at("seed").get<std::uint64_t>(),
                                        meta.at("max_depth").get<int>()});
    }
    EnsembleConfig config;
    if (j.contains("config")) {
      const auto& c = j.at("config");
      config = {c.at("trainer").get<std::string>(), c.at("members").get<std::size_t>(),
                c.at("max_depth").get<int>(), c.at("seed").get<std::uint64_t>()};
    }
    return WeightedEnsemble(std::move(members), j.at("weights").get<std::vector<double>>(), std::move(config));
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidModel, ex.what());
  }
}

void save_ensemble(const WeightedEnsemble& e, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write " + path.string());
  out << ensemble_to_json(e) << '\n';
}

WeightedEnsemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ensemble_from_json(ss.str());
}

}  // namespace fairens
