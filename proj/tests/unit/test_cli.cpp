#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "json.hpp"

namespace fairens::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Run {
  int rc;
  std::string out;
  std::string err;
};

Run call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int rc = dispatch(args, out, err);
  return {rc, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<fs::path> listing(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) files.push_back(fs::relative(e.path(), dir));
  std::sort(files.begin(), files.end());
  return files;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fairens_unit_cli_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string at(const std::string& name) const { return (dir_ / name).string(); }

  void synth_and_train() {
    ASSERT_EQ(call({"synth", "--n", "120", "--bias", "0.7", "--seed", "3", "--out", at("d.csv")}).rc, kOk);
    ASSERT_EQ(call({"train", "--data", at("d.csv"), "--m", "7", "--seed", "4", "--out", at("model.json")}).rc, kOk);
  }

  fs::path dir_;
};

TEST_F(Cli, SynthWritesCsvAndSidecar) {
  const auto r = call({"synth", "--n", "50", "--bias", "0.5", "--features", "3", "--seed", "1", "--out", at("s.csv")});
  ASSERT_EQ(r.rc, kOk) << r.err;
  std::istringstream csv(slurp(at("s.csv")));
  std::string header, line;
  std::getline(csv, header);
  std::size_t rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 50u);
  const auto schema = json::parse(slurp(at("s.schema.json")));
  EXPECT_EQ(schema.at("sensitive").size(), 1u);
  EXPECT_EQ(listing(dir_), (std::vector<fs::path>{"s.csv", "s.schema.json"}));
}

TEST_F(Cli, PipelineIsDeterministicAndWritesOnlyItsOutputs) {
  synth_and_train();
  for (const char* algo : {"poaf", "epaf-c", "epaf-d"}) {
    const std::vector<std::string> args = {"prune", "--model", at("model.json"), "--data", at("d.csv"), "--algo",
                                           algo,    "--k",     "3",              "--seed", "8",           "--out"};
    auto a = args, b = args;
    a.push_back(at(std::string("a_") + algo + ".json"));
    b.push_back(at(std::string("b_") + algo + ".json"));
    ASSERT_EQ(call(a).rc, kOk);
    ASSERT_EQ(call(b).rc, kOk);
    const auto ja = json::parse(slurp(a.back())), jb = json::parse(slurp(b.back()));
    EXPECT_EQ(ja.at("selected"), jb.at("selected"));
    EXPECT_EQ(ja.at("algorithm"), algo);
    EXPECT_LE(ja.at("selected").size(), 3u);
  }
  const auto audit = call({"audit-bounds", "--model", at("model.json"), "--data", at("d.csv"), "--seed", "2",
                           "--out", at("audit.json")});
  ASSERT_EQ(audit.rc, kOk) << audit.err;
  const auto j = json::parse(slurp(at("audit.json")));
  EXPECT_EQ(j.at("rows"), 120);
  EXPECT_EQ(j.at("members"), 7);
  EXPECT_TRUE(j.at("oracle").contains("first_order"));
  EXPECT_EQ(listing(dir_).size(), 10u);
}

TEST_F(Cli, RunWritesBundle) {
  {
    std::ofstream cfg(at("exp.json"));
    cfg << R"({"data": {"synthetic": {"n": 90}}, "ensemble": {"members": 5}, "folds": 3,
              "pruners": [{"algorithm": "epaf-c", "k": 2}], "metrics": ["dr", "accuracy"]})";
  }
  const auto r = call({"run", "--config", at("exp.json"), "--out", at("report")});
  ASSERT_EQ(r.rc, kOk) << r.err;
  EXPECT_NE(r.out.find("summary.json"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "report" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir_ / "report" / "table_dr.csv"));
}

TEST_F(Cli, RanksHandExample) {
  {
    std::ofstream s(at("scores.csv"));
    s << "dataset,A,B,C\nd1,0.9,0.8,0.8\nd2,0.7,0.8,0.6\n";
  }
  ASSERT_EQ(call({"ranks", "--scores", at("scores.csv"), "--out", at("r.json")}).rc, kOk);
  const auto j = json::parse(slurp(at("r.json")));
  EXPECT_EQ(j.at("average_rank").at("A"), 1.5);
  EXPECT_EQ(j.at("average_rank").at("B"), 1.75);
  EXPECT_EQ(j.at("average_rank").at("C"), 2.75);
  EXPECT_EQ(j.at("datasets"), (json{"d1", "d2"}));
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(call({}).rc, kUsage);
  EXPECT_EQ(call({"bogus"}).rc, kUsage);
  const auto missing_seed = call({"synth", "--n", "5", "--bias", "0.5", "--out", at("x.csv")});
  EXPECT_EQ(missing_seed.rc, kUsage);
  EXPECT_NE(missing_seed.err.find("--seed"), std::string::npos);
  const auto unknown = call({"synth", "--n", "5", "--bias", "0.5", "--seed", "1", "--rows", "3", "--out", at("x.csv")});
  EXPECT_EQ(unknown.rc, kUsage);
  EXPECT_NE(unknown.err.find("synth"), std::string::npos);
  EXPECT_EQ(call({"synth", "--n", "five", "--bias", "0.5", "--seed", "1", "--out", at("x.csv")}).rc, kUsage);
  EXPECT_TRUE(listing(dir_).empty());
}

TEST_F(Cli, DataErrorsExitTwo) {
  const auto r = call({"run", "--config", at("missing.json")});
  EXPECT_EQ(r.rc, kDataError);
  EXPECT_NE(r.err.find("missing.json"), std::string::npos);
  {
    std::ofstream bad(at("bad.json"));
    bad << "{\"folds\": ";
  }
  EXPECT_EQ(call({"run", "--config", at("bad.json"), "--out", at("o")}).rc, kDataError);
  {
    std::ofstream m(at("model.json"));
    m << "[1, 2]";
  }
  EXPECT_EQ(call({"audit-bounds", "--model", at("model.json"), "--data", at("nope.csv"), "--seed", "1", "--out",
                  at("a.json")})
                .rc,
            kDataError);
  EXPECT_EQ(call({"synth", "--n", "0", "--bias", "0.5", "--seed", "1", "--out", at("z.csv")}).rc, kDataError);
}

TEST_F(Cli, HelpAndVersionExitZero) {
  const auto help = call({"--help"});
  EXPECT_EQ(help.rc, kOk);
  for (const char* sub : {"synth", "train", "prune", "audit-bounds", "run", "ranks"})
    EXPECT_NE(help.out.find(sub), std::string::npos) << sub;
  EXPECT_EQ(call({"prune", "--help"}).rc, kOk);
  const auto v = call({"--version"});
  EXPECT_EQ(v.rc, kOk);
  EXPECT_FALSE(v.out.empty());
}

}  // namespace
}  // namespace fairens::cli
