#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "fairens/dataset.hpp"
#include "fairens/error.hpp"
#include "fairens/random.hpp"

namespace fairens {
namespace {

const std::filesystem::path kFixtures = FAIRENS_FIXTURE_DIR;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvariantViolation;
}

DatasetSchema toy_schema() {
  DatasetSchema s;
  s.label_column = "y";
  s.positive_label = "yes";
  s.sensitive_columns = {{"sex", 2, 1, {"f", "m"}}};
  s.categorical_columns = {"color"};
  return s;
}

TEST(Schema, ParsesLevelsAndDefaults) {
  const auto s = parse_schema(R"({"label":"y","positive_label":"yes",
      "sensitive":[{"name":"race","levels":["a","b","c"],"privileged":2},{"name":"sex","cardinality":2}],
      "categorical":["job"]})");
  EXPECT_EQ(s.label_column, "y");
  EXPECT_EQ(s.positive_label, "yes");
  ASSERT_EQ(s.sensitive_columns.size(), 2u);
  EXPECT_EQ(s.sensitive_columns[0].cardinality, 3);
  EXPECT_EQ(s.sensitive_columns[0].privileged_value, 2);
  EXPECT_EQ(s.sensitive_columns[1].levels.size(), 0u);
  EXPECT_EQ(s.categorical_columns, std::vector<std::string>{"job"});
  EXPECT_EQ(s.delimiter, ',');
}

TEST(Schema, RejectsInconsistentAttributes) {
  EXPECT_EQ(code_of([] { parse_schema(R"({"label":"y","sensitive":[{"name":"s","cardinality":2,"privileged":2}]})"); }),
            ErrorCode::InvalidSchema);
  EXPECT_EQ(code_of([] { parse_schema(R"({"label":"y","sensitive":[{"name":"s","cardinality":3,"levels":["a"]}]})"); }),
            ErrorCode::InvalidSchema);
  EXPECT_EQ(code_of([] { parse_schema(R"({"sensitive":[]})"); }), ErrorCode::InvalidSchema);
  EXPECT_EQ(code_of([] { parse_schema("not json"); }), ErrorCode::InvalidSchema);
}

TEST(Schema, JsonRoundTrip) {
  const auto s = toy_schema();
  EXPECT_EQ(parse_schema(schema_to_json(s)), s);
}

TEST(Csv, EncodesCategoricalSensitiveAndLabels) {
  const Dataset d = parse_csv("x,color,sex,y\n1.5,red,m,yes\n-2,blue,f,no\n0,red,f,yes\n", toy_schema());
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.feature_names(), (std::vector<std::string>{"x", "color=blue", "color=red"}));
  EXPECT_DOUBLE_EQ(d.general()(0, 0), 1.5);
  EXPECT_DOUBLE_EQ(d.general()(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(d.general()(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(d.general()(1, 1), 1.0);
  EXPECT_EQ(d.sensitive()(0, 0), 1);
  EXPECT_EQ(d.sensitive()(1, 0), 0);
  EXPECT_EQ(d.labels(), (std::vector<ClassIndex>{1, 0, 1}));
  EXPECT_EQ(d.n_classes(), 2);
  EXPECT_EQ(d.privileged_group(0), (std::vector<int>{1, 0, 0}));
}

TEST(Csv, QuotedFieldsAndIntegerLabels) {
  DatasetSchema s;
  s.label_column = "y";
  s.sensitive_columns = {{"g", 3, 0, {}}};
  const Dataset d = parse_csv("\"a, b\",g,y\n1,2,0\n3,0,2\n", s);
  EXPECT_EQ(d.feature_names(), std::vector<std::string>{"a, b"});
  EXPECT_EQ(d.n_classes(), 3);
  EXPECT_EQ(d.labels(), (std::vector<ClassIndex>{0, 2}));
}

TEST(Csv, ErrorPaths) {
  const auto s = toy_schema();
  EXPECT_EQ(code_of([&] { parse_csv("", s); }), ErrorCode::EmptyFile);
  EXPECT_EQ(code_of([&] { parse_csv("x,color,sex,y\n", s); }), ErrorCode::EmptyFile);
  EXPECT_EQ(code_of([&] { parse_csv("x,color,y\n1,red,yes\n", s); }), ErrorCode::MissingColumn);
  EXPECT_EQ(code_of([&] { parse_csv("x,color,sex,y\n?,red,m,yes\n", s); }), ErrorCode::UnparseableValue);
  EXPECT_EQ(code_of([&] { parse_csv("x,color,sex,y\nabc,red,m,yes\n", s); }), ErrorCode::UnparseableValue);
  EXPECT_EQ(code_of([&] { parse_csv("x,color,sex,y\n1,red,other,yes\n", s); }), ErrorCode::UnparseableValue);
  EXPECT_EQ(code_of([&] { parse_csv("x,color,sex,y\n1,red,m\n", s); }), ErrorCode::UnparseableValue);
  EXPECT_EQ(code_of([&] { load_csv(kFixtures / "does_not_exist.csv", s); }), ErrorCode::FileNotFound);
}

TEST(Csv, SaveLoadRoundTripIsExact) {
  const Dataset d = synth_biased(50, 0.3, 4, 9);
  const auto dir = std::filesystem::temp_directory_path() / "fairens_unit_csv";
  std::filesystem::create_directories(dir);
  const auto schema = save_csv(d, dir / "d.csv");
  const Dataset back = load_csv(dir / "d.csv", schema);
  EXPECT_EQ(back.fingerprint(), d.fingerprint());
  EXPECT_EQ(back.general(), d.general());
  EXPECT_EQ(back.labels(), d.labels());
  EXPECT_EQ(back.sensitive_names(), d.sensitive_names());
  EXPECT_EQ(to_csv(back), to_csv(d));
  std::filesystem::remove_all(dir);
}

TEST(Csv, RicciLayoutFixture) {
  const auto schema = load_schema(kFixtures / "ricci_layout.schema.json");
  const Dataset d = load_csv(kFixtures / "ricci_layout.csv", schema);
  EXPECT_EQ(d.size(), 118u);
  EXPECT_EQ(d.n_sensitive(), 1u);
  EXPECT_EQ(d.cardinalities(), std::vector<int>{3});
  EXPECT_EQ(d.privileged_values(), std::vector<int>{2});
  // Oral, Written, Combine plus two Position indicators.
  EXPECT_EQ(d.n_general(), 5u);
  const auto plan = kfold_split(d.size(), 5, 1);
  std::vector<std::size_t> sizes;
  for (std::size_t f = 0; f < 5; ++f) sizes.push_back(plan.test_rows(f).size());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{24, 24, 24, 23, 23}));
}

TEST(DatasetInvariants, ConstructorRejectsBadShapes) {
  Matrix<double> g(2, 1);
  Matrix<int> s(2, 1);
  EXPECT_EQ(code_of([&] { Dataset(g, s, {0, 1, 1}, 2, {"x"}, {"s"}, {2}, {1}); }), ErrorCode::InvalidDataset);
  EXPECT_EQ(code_of([&] { Dataset(g, s, {0, 2}, 2, {"x"}, {"s"}, {2}, {1}); }), ErrorCode::InvalidDataset);
  EXPECT_EQ(code_of([&] { Dataset(g, s, {0, 1}, 2, {"x"}, {"s"}, {2}, {2}); }), ErrorCode::InvalidDataset);
  EXPECT_EQ(code_of([&] { Dataset(g, s, {0, 1}, 2, {}, {"s"}, {2}, {1}); }), ErrorCode::InvalidDataset);
  s(1, 0) = 5;
  EXPECT_EQ(code_of([&] { Dataset(g, s, {0, 1}, 2, {"x"}, {"s"}, {2}, {1}); }), ErrorCode::InvalidDataset);
}

TEST(DatasetInvariants, SubsetAndWithSensitive) {
  const Dataset d = synth_biased(20, 0.5, 2, 3);
  const std::vector<std::size_t> rows = {5, 0, 5};
  const Dataset sub = d.subset(rows);
  ASSERT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub.labels()[0], d.labels()[5]);
  EXPECT_EQ(sub.general()(1, 1), d.general()(0, 1));
  EXPECT_EQ(code_of([&] { d.subset(std::vector<std::size_t>{20}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { d.with_sensitive(Matrix<int>(3, 1)); }), ErrorCode::ShapeMismatch);
  EXPECT_NE(d.with_sensitive(perturb_sensitive(d, 1).perturbed_sensitive).fingerprint(), d.fingerprint());
}

// Every perturbed value differs from its original and stays in the domain,
// across random multi-attribute datasets.
TEST(Perturbation, PropertyChangesEveryValueWithinDomain) {
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    Rng rng(derive_seed(11, {trial}));
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    const std::size_t na = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    std::vector<int> card(na);
    for (auto& c : card) c = std::uniform_int_distribution<int>(2, 5)(rng);
    Matrix<int> s(n, na);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < na; ++j) s(i, j) = std::uniform_int_distribution<int>(0, card[j] - 1)(rng);
    std::vector<std::string> names;
    for (std::size_t j = 0; j < na; ++j) names.push_back("s" + std::to_string(j));
    const Dataset d(Matrix<double>(n, 1), s, std::vector<ClassIndex>(n, 0), 2, {"x"}, names, card,
                    std::vector<int>(na, 0));
    const auto v = perturb_sensitive(d, trial);
    EXPECT_EQ(v.source_fingerprint, d.fingerprint());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < na; ++j) {
        EXPECT_NE(v.perturbed_sensitive(i, j), s(i, j));
        EXPECT_GE(v.perturbed_sensitive(i, j), 0);
        EXPECT_LT(v.perturbed_sensitive(i, j), card[j]);
      }
    }
    EXPECT_EQ(perturb_sensitive(d, trial).perturbed_sensitive, v.perturbed_sensitive);
  }
}

TEST(Perturbation, BinaryAttributeIsComplemented) {
  const Dataset d = synth_biased(30, 0.5, 2, 4);
  const auto v = perturb_sensitive(d, 77);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(v.perturbed_sensitive(i, 0), 1 - d.sensitive()(i, 0));
}

TEST(Perturbation, ThreeLevelDrawsCoverBothAlternatives) {
  Matrix<int> s(400, 1);
  const Dataset d(Matrix<double>(400, 1), s, std::vector<ClassIndex>(400, 0), 2, {"x"}, {"g"}, {3}, {0});
  const auto v = perturb_sensitive(d, 5);
  const auto ones = std::count(v.perturbed_sensitive.data().begin(), v.perturbed_sensitive.data().end(), 1);
  EXPECT_GT(ones, 150);
  EXPECT_LT(ones, 250);
}

TEST(Perturbation, ErrorPaths) {
  const Dataset none(Matrix<double>(3, 1), Matrix<int>(3, 0), {0, 1, 0}, 2, {"x"}, {}, {}, {});
  EXPECT_EQ(code_of([&] { perturb_sensitive(none, 1); }), ErrorCode::NoSensitiveAttributes);
  const Dataset single(Matrix<double>(3, 1), Matrix<int>(3, 1), {0, 1, 0}, 2, {"x"}, {"s"}, {1}, {0});
  EXPECT_EQ(code_of([&] { perturb_sensitive(single, 1); }), ErrorCode::DegenerateAttribute);
}

TEST(KFold, PropertyPartitionAndBalancedSizes) {
  for (std::uint64_t trial = 0; trial < 300; ++trial) {
    Rng rng(derive_seed(12, {trial}));
    const std::size_t k = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(k, 300)(rng);
    const auto plan = kfold_split(n, k, trial);
    std::vector<int> seen(n, 0);
    for (std::size_t f = 0; f < k; ++f) {
      const auto test = plan.test_rows(f);
      EXPECT_TRUE(test.size() == n / k || test.size() == (n + k - 1) / k);
      EXPECT_EQ(test.size() + plan.train_rows(f).size(), n);
      for (auto r : test) ++seen[r];
    }
    EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    EXPECT_EQ(kfold_split(n, k, trial).assignments, plan.assignments);
  }
}

TEST(KFold, ErrorPaths) {
  EXPECT_EQ(code_of([] { kfold_split(10, 1, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { kfold_split(3, 5, 0); }), ErrorCode::TooFewRows);
}

TEST(Synthetic, ShapeAndDeterminism) {
  const Dataset d = synth_biased(200, 0.8, 5, 1);
  EXPECT_EQ(d.size(), 200u);
  EXPECT_EQ(d.n_general(), 5u);
  EXPECT_EQ(d.sensitive_names(), std::vector<std::string>{"s"});
  EXPECT_EQ(d.privileged_values(), std::vector<int>{1});
  EXPECT_EQ(synth_biased(200, 0.8, 5, 1).fingerprint(), d.fingerprint());
  EXPECT_NE(synth_biased(200, 0.8, 5, 2).fingerprint(), d.fingerprint());
}

TEST(Synthetic, FullBiasCopiesTheSensitiveAttribute) {
  const Dataset d = synth_biased(300, 1.0, 3, 8);
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d.labels()[i], d.sensitive()(i, 0));
}

TEST(Synthetic, ErrorPaths) {
  EXPECT_EQ(code_of([] { synth_biased(5, 0.5, 2, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { synth_biased(50, 1.5, 2, 0); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { synth_biased(50, 0.5, 0, 0); }), ErrorCode::InvalidArgument);
}

}  // namespace
}  // namespace fairens

namespace fairens {
namespace {

TEST(DatasetExamples, SmallCases) {
  Matrix<int> s(4, 1);
  s(1, 0) = 1;
  s(2, 0) = 1;
  const Dataset d(Matrix<double>(4, 1), s, {0, 0, 1, 1}, 2, {"x"}, {"a"}, {2}, {1});
  const auto v = perturb_sensitive(d, 0);
  EXPECT_EQ(v.perturbed_sensitive.data(), (std::vector<int>{1, 0, 0, 1}));

  const auto plan = kfold_split(10, 5, 4);
  for (std::size_t f = 0; f < 5; ++f) EXPECT_EQ(plan.test_rows(f).size(), 2u);

  EXPECT_EQ(to_csv(synth_biased(80, 0.0, 3, 6)), to_csv(synth_biased(80, 0.0, 3, 6)));
  const Dataset shape = synth_biased(200, 0.5, 5, 3);
  EXPECT_EQ(shape.size(), 200u);
  EXPECT_EQ(shape.n_classes(), 2);
  EXPECT_EQ(shape.n_sensitive(), 1u);

  DatasetSchema numeric;
  numeric.label_column = "y";
  numeric.sensitive_columns = {{"a", 2, 1, {}}};
  EXPECT_THROW(parse_csv("x,a,y\n1,0,abc\n", numeric), Error);
}

}  // namespace
}  // namespace fairens
