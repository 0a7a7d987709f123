#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fairens/error.hpp"
#include "fairens/metrics.hpp"
#include "fairens/random.hpp"

namespace fairens {
namespace {

using V = std::vector<ClassIndex>;

TEST(FairLoss, Instances) {
  EXPECT_EQ(fair_loss_instance(1, 1), 0);
  EXPECT_EQ(fair_loss_instance(1, 0), 1);
  EXPECT_EQ(fair_loss_instance(2, 3), 1);
  static_assert(tandem_loss_instance(0, 1, 1, 1) == 0);
  static_assert(tandem_loss_instance(0, 1, 1, 0) == 1);
}

TEST(EmpiricalDr, Counts) {
  EXPECT_DOUBLE_EQ(empirical_dr(V{0, 1, 1}, V{0, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(empirical_dr(V{0, 1, 1}, V{1, 0, 2}), 1.0);
  EXPECT_DOUBLE_EQ(empirical_dr(V{0, 0, 0, 0, 1, 1, 1, 1}, V{1, 0, 0, 0, 1, 1, 0, 1}), 0.25);
  EXPECT_THROW(empirical_dr(V{}, V{}), Error);
  EXPECT_THROW(empirical_dr(V{1}, V{1, 0}), Error);
}

PredictionProfile flips_on(std::size_t n, std::vector<std::size_t> rows) {
  PredictionProfile p;
  p.preds_orig.assign(n, 0);
  p.preds_pert.assign(n, 0);
  for (auto r : rows) p.preds_pert[r] = 1;
  return p;
}

TEST(EmpiricalTandem, Examples) {
  const auto a = flips_on(4, {0, 1});
  const auto b = flips_on(4, {1, 2});
  EXPECT_DOUBLE_EQ(empirical_tandem(a, b), 0.25);
  EXPECT_DOUBLE_EQ(empirical_tandem(a, a), empirical_dr(a));
  EXPECT_DOUBLE_EQ(empirical_tandem(a, flips_on(4, {2, 3})), 0.0);
  EXPECT_THROW(empirical_tandem(a, flips_on(5, {})), Error);
}

// Tandem risk is symmetric and bounded by both members' risks.
TEST(EmpiricalTandem, PropertySymmetricAndDominatedByMarginals) {
  Rng rng(31);
  std::bernoulli_distribution coin(0.4);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
    std::vector<std::size_t> ra, rb;
    for (std::size_t i = 0; i < n; ++i) {
      if (coin(rng)) ra.push_back(i);
      if (coin(rng)) rb.push_back(i);
    }
    const auto a = flips_on(n, ra), b = flips_on(n, rb);
    const double tab = empirical_tandem(a, b);
    EXPECT_EQ(tab, empirical_tandem(b, a));
    EXPECT_LE(tab, std::min(empirical_dr(a), empirical_dr(b)));
    EXPECT_GE(tab, empirical_dr(a) + empirical_dr(b) - 1.0 - 1e-15);
  }
}

TEST(GroupFairness, Examples) {
  auto dp = [](V p, V y, std::vector<int> g) { return group_fairness(GroupMeasure::DP, p, y, g).value; };
  EXPECT_EQ(dp({1, 1, 0, 0}, {0, 0, 0, 0}, {1, 1, 0, 0}), 1.0);
  EXPECT_EQ(dp({1, 1, 1, 1}, {0, 1, 0, 1}, {1, 0, 1, 0}), 0.0);
  const auto third = dp({1, 0, 1, 0, 1, 0}, {1, 1, 0, 0, 1, 0}, {1, 1, 1, 0, 0, 0});
  ASSERT_TRUE(third);
  EXPECT_NEAR(*third, 1.0 / 3.0, 1e-15);

  const auto pqp = group_fairness(GroupMeasure::PQP, V{1, 1, 0, 0}, V{1, 0, 1, 0}, std::vector<int>{1, 1, 0, 0});
  EXPECT_FALSE(pqp.value.has_value());
  EXPECT_EQ(pqp.privileged_size, 2u);
  EXPECT_EQ(pqp.marginalised_size, 0u);

  // EO conditions on y = 1: group 1 has rows {0}, group 0 has rows {2}.
  const auto eo = group_fairness(GroupMeasure::EO, V{1, 0, 0, 1}, V{1, 0, 1, 0}, std::vector<int>{1, 1, 0, 0});
  EXPECT_EQ(eo.value, 1.0);
}

TEST(GroupFairness, ErrorPaths) {
  EXPECT_THROW(group_fairness(GroupMeasure::DP, V{2, 0}, V{0, 0}, std::vector<int>{1, 0}), Error);
  EXPECT_THROW(group_fairness(GroupMeasure::DP, V{1, 0}, V{0, 0}, std::vector<int>{2, 0}), Error);
  EXPECT_THROW(group_fairness(GroupMeasure::DP, V{1, 0}, V{0}, std::vector<int>{1, 0}), Error);
}

TEST(ClassificationMetrics, Examples) {
  const auto perfect = classification_metrics(V{1, 0, 1}, V{1, 0, 1});
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);
  EXPECT_EQ(classification_metrics(V{0, 1, 1}, V{1, 0, 0}).accuracy, 0.0);
  const auto half = classification_metrics(V{1, 1, 0, 0}, V{1, 0, 1, 0});
  EXPECT_EQ(half.precision, 0.5);
  EXPECT_EQ(half.recall, 0.5);
  EXPECT_EQ(half.accuracy, 0.5);
  EXPECT_EQ(half.specificity, 0.5);
  const auto none = classification_metrics(V{0, 0}, V{0, 0});
  EXPECT_FALSE(none.precision.has_value());
  EXPECT_FALSE(none.recall.has_value());
  EXPECT_EQ(none.specificity, 1.0);
  const auto multi = classification_metrics(V{2, 1}, V{2, 0});
  EXPECT_EQ(multi.accuracy, 0.5);
  EXPECT_FALSE(multi.precision.has_value());
}

TEST(Pearson, Examples) {
  const std::vector<double> x = {1.0, 2.5, -3.0, 4.0};
  std::vector<double> neg;
  for (double v : x) neg.push_back(-v);
  EXPECT_DOUBLE_EQ(pearson(x, x), 1.0);
  EXPECT_DOUBLE_EQ(pearson(x, neg), -1.0);
  try {
    pearson(std::vector<double>{2.0, 2.0, 2.0}, std::vector<double>{1.0, 2.0, 3.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConstantVector);
  }
  EXPECT_THROW(pearson(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);
}

// Correlation is invariant under positive affine maps and bounded by one.
TEST(Pearson, PropertyAffineInvariance) {
  Rng rng(32);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(10), y(10), y2(10);
    for (std::size_t i = 0; i < 10; ++i) {
      x[i] = z(rng);
      y[i] = x[i] + z(rng);
      y2[i] = 3.0 * y[i] + 7.0;
    }
    const double r = pearson(x, y);
    EXPECT_LE(std::abs(r), 1.0);
    EXPECT_NEAR(r, pearson(x, y2), 1e-12);
  }
}

}  // namespace
}  // namespace fairens
