#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "crashdyn/density.hpp"
#include "crashdyn/error.hpp"

using namespace crashdyn;

namespace {

const BinningSpec kUnit{0.0, 1.0, 10};

double mass(const OnePointDensity& d) {
  double s = 0.0;
  for (double v : d.values) s += v * d.binning.width();
  return s;
}

}  // namespace

TEST(Binning, EdgesAndCenters) {
  const BinningSpec b;
  EXPECT_EQ(b.n_bins, 24u);
  EXPECT_DOUBLE_EQ(b.x_min, -0.35);
  EXPECT_EQ(b.bin_of(-0.35), 0u);
  EXPECT_EQ(b.bin_of(0.35), 23u);
  EXPECT_FALSE(b.bin_of(0.3500001));
  EXPECT_FALSE(b.bin_of(-0.36));
  EXPECT_FALSE(b.bin_of(std::nan("")));
  EXPECT_NEAR(b.center(0), -0.35 + 0.7 / 48.0, 1e-15);
  EXPECT_THROW((BinningSpec{1.0, 0.0, 4}.validate()), UsageError);
  EXPECT_THROW((BinningSpec{0.0, 1.0, 1}.validate()), UsageError);
}

TEST(OnePoint, DeltaMass) {
  const std::vector<double> sample(17, 0.33);
  const auto d = one_point(sample, kUnit);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(d.values[i], i == 3 ? 10.0 : 0.0);
  EXPECT_EQ(d.sample_count, 17u);
}

TEST(OnePoint, UniformWithinThreeStandardErrors) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 200000;
  std::vector<double> sample(n);
  for (auto& v : sample) v = u(rng);
  const auto d = one_point(sample, kUnit);
  // Bin count ~ Binomial(n, 0.1); density = count / (n * 0.1).
  const double se = std::sqrt(n * 0.1 * 0.9) / (n * 0.1);
  for (double v : d.values) EXPECT_NEAR(v, 1.0, 3.0 * se);
}

TEST(OnePoint, OutOfRangeIsCountedNotClamped) {
  const std::vector<double> sample{-1.0, 0.05, 0.05, 2.0};
  const auto d = one_point(sample, kUnit);
  EXPECT_EQ(d.out_of_range, 2u);
  EXPECT_EQ(d.sample_count, 2u);
  EXPECT_NEAR(mass(d), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(d.values[9], 0.0);
}

TEST(OnePoint, EmptySampleThrows) {
  EXPECT_THROW(one_point(std::vector<double>{}, kUnit), DataError);
  EXPECT_THROW(one_point(std::vector<double>{5.0}, kUnit), DataError);
}

TEST(Joint, DiagonalForIdenticalColumns) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 100; ++i) {
    const double x = (i % 10) / 10.0 + 0.05;
    pairs.emplace_back(x, x);
  }
  const auto j = joint(pairs, kUnit);
  for (std::size_t a = 0; a < 10; ++a) {
    for (std::size_t b = 0; b < 10; ++b) {
      if (a != b) EXPECT_EQ(j.at(a, b), 0.0);
      else EXPECT_GT(j.at(a, b), 0.0);
    }
  }
}

TEST(Joint, SinglePairSingleCell) {
  const std::vector<std::pair<double, double>> pairs{{0.15, 0.85}};
  const auto j = joint(pairs, kUnit);
  std::size_t occupied = 0;
  for (double v : j.values) occupied += v > 0.0 ? 1 : 0;
  EXPECT_EQ(occupied, 1u);
  EXPECT_DOUBLE_EQ(j.at(1, 8), 100.0);
}

TEST(Joint, IndependentColumnsFactorize) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 400000;
  std::vector<std::pair<double, double>> pairs(n);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = u(rng);
    b[i] = u(rng) * u(rng);
    pairs[i] = {a[i], b[i]};
  }
  const auto j = joint(pairs, kUnit);
  const auto pa = one_point(a, kUnit);
  const auto pb = one_point(b, kUnit);
  double worst = 0.0;
  for (std::size_t p = 0; p < 10; ++p) {
    for (std::size_t q = 0; q < 10; ++q) {
      const double expected = pa.values[p] * pb.values[q];
      // Cell probability ~ expected * w^2; Monte-Carlo sd of the density estimate.
      const double prob = expected * 0.01;
      const double sd = std::sqrt(prob * (1 - prob) / n) / 0.01;
      worst = std::max(worst, std::abs(j.at(p, q) - expected) / (sd + 1e-12));
    }
  }
  EXPECT_LT(worst, 5.0);
}

TEST(Joint, ErrorsAndEnsemblePairing) {
  ReturnEnsemble e({"a", "b", "c"}, 0, 2);
  e.set(0, 0, 0.15);
  e.set(0, 1, 0.25);
  e.set(1, 0, 0.55);  // no partner on day 1
  e.set(2, 1, 0.65);
  const auto j = joint(e, 0, 1, kUnit);
  EXPECT_EQ(j.sample_count, 1u);
  EXPECT_DOUBLE_EQ(j.at(1, 2), 100.0);
  EXPECT_THROW(joint(e, 1, 1, kUnit), UsageError);
  EXPECT_THROW(joint(e, 1, 2, kUnit), DataError);
  EXPECT_THROW(joint(e, 2, 5, kUnit), UsageError);
}

TEST(Conditional, IndependenceGivesMarginalRows) {
  std::vector<std::pair<double, double>> pairs;
  // Exact product: every x1 bin paired with the same x2 profile.
  const std::vector<double> x2_profile{0.05, 0.15, 0.15, 0.45, 0.95};
  for (int i1 = 0; i1 < 10; ++i1) {
    for (double x2 : x2_profile) pairs.emplace_back(i1 / 10.0 + 0.05, x2);
  }
  const auto j = joint(pairs, kUnit);
  const auto c = conditional(j, x1_marginal(j), 5);
  std::vector<double> x2s;
  for (const auto& p : pairs) x2s.push_back(p.second);
  const auto m2 = one_point(x2s, kUnit);
  for (std::size_t r = 0; r < 10; ++r) {
    ASSERT_TRUE(c.supported[r]);
    for (std::size_t q = 0; q < 10; ++q) EXPECT_NEAR(c.at(r, q), m2.values[q], 1e-12);
  }
}

TEST(Conditional, DiagonalIsIdentityTransition) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 60; ++i) pairs.emplace_back((i % 6) / 10.0 + 0.05, (i % 6) / 10.0 + 0.05);
  const auto j = joint(pairs, kUnit);
  const auto c = conditional(j, x1_marginal(j), 5);
  for (std::size_t r = 0; r < 10; ++r) {
    EXPECT_EQ(c.supported[r], r < 6);
    for (std::size_t q = 0; q < 10; ++q) EXPECT_DOUBLE_EQ(c.at(r, q), (r < 6 && q == r) ? 10.0 : 0.0);
  }
}

TEST(Conditional, ZeroMarginalRowFlagged) {
  const std::vector<std::pair<double, double>> pairs(10, {0.05, 0.05});
  const auto j = joint(pairs, kUnit);
  const auto c = conditional(j, x1_marginal(j), 5);
  EXPECT_TRUE(c.supported[0]);
  for (std::size_t r = 1; r < 10; ++r) {
    EXPECT_FALSE(c.supported[r]);
    for (std::size_t q = 0; q < 10; ++q) EXPECT_EQ(c.at(r, q), 0.0);
  }
}

TEST(Conditional, SupportThreshold) {
  std::vector<std::pair<double, double>> pairs(4, {0.05, 0.15});
  pairs.insert(pairs.end(), 5, {0.25, 0.15});
  const auto j = joint(pairs, kUnit);
  const auto c = conditional(j, x1_marginal(j));
  EXPECT_FALSE(c.supported[0]);
  EXPECT_TRUE(c.supported[2]);
  EXPECT_EQ(c.row_counts[0], 4u);
}

TEST(Conditional, RejectsMismatchedInputs) {
  const std::vector<std::pair<double, double>> pairs(10, {0.05, 0.05});
  const auto j = joint(pairs, kUnit, 0, 1);
  auto m = x1_marginal(j);
  m.binning.n_bins = 11;
  EXPECT_THROW(conditional(j, m), UsageError);
  auto m2 = x1_marginal(j);
  m2.t = 4;
  EXPECT_THROW(conditional(j, m2), UsageError);
}

TEST(Conditional, ReproducesJoint) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.5, 0.2);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 5000; ++i) {
    const double a = n(rng);
    pairs.emplace_back(a, 0.6 * a + 0.2 + 0.1 * n(rng));
  }
  const auto j = joint(pairs, kUnit);
  const auto m = x1_marginal(j);
  const auto c = conditional(j, m, 1);
  for (std::size_t r = 0; r < 10; ++r) {
    if (!c.supported[r]) continue;
    for (std::size_t q = 0; q < 10; ++q) {
      EXPECT_NEAR(c.at(r, q) * m.values[r], j.at(r, q), 1e-9);
    }
  }
}

TEST(DensityCsv, Headers) {
  const std::vector<double> sample{0.05, 0.15};
  const std::vector<OnePointDensity> ds{one_point(sample, kUnit, 3)};
  std::stringstream a;
  write_density_csv(ds, a);
  EXPECT_EQ(a.str().rfind("t,x_bin_center,density\n3,", 0), 0u) << a.str();
  const std::vector<std::pair<double, double>> pairs{{0.05, 0.15}};
  std::stringstream b;
  write_density_csv(joint(pairs, kUnit), b);
  EXPECT_EQ(b.str().rfind("x1_center,x2_center,density\n", 0), 0u);
}
