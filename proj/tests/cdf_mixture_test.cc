#include "ocd/cdf_mixture.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ocd/pac_bounds.h"
#include "ocd/status.h"

namespace ocd {
namespace {

EmpiricalCdf Cdf(std::vector<double> v) { return EmpiricalCdf(ScoreSample(std::move(v))); }

double CountingOracle(const std::vector<double>& v, double x) {
  return static_cast<double>(std::count_if(v.begin(), v.end(),
                                           [x](double s) { return s <= x; })) /
         static_cast<double>(v.size());
}

// Exhaustive isotonic least squares: the optimum is constant on contiguous
// blocks at the block means, so enumerate every partition into blocks and
// keep the best non-decreasing candidate.
std::vector<double> BruteForceIsotonic(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (unsigned cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    std::vector<double> fit(n);
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == n - 1 || (cuts >> i & 1u)) {
        double sum = 0;
        for (std::size_t k = start; k <= i; ++k) sum += y[k];
        for (std::size_t k = start; k <= i; ++k) fit[k] = sum / double(i - start + 1);
        start = i + 1;
      }
    }
    if (!std::is_sorted(fit.begin(), fit.end())) continue;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) sse += (fit[i] - y[i]) * (fit[i] - y[i]);
    if (sse < best_sse) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

TEST(EmpiricalCdfTest, SinglePoint) {
  const EmpiricalCdf f = Cdf({1.0});
  EXPECT_EQ(f(0.9), 0.0);
  EXPECT_EQ(f(1.0), 1.0);
  EXPECT_EQ(f(2.0), 1.0);
}

TEST(EmpiricalCdfTest, CountsTies) {
  const EmpiricalCdf f = Cdf({4, 2, 1, 2});
  EXPECT_DOUBLE_EQ(f(1), 0.25);
  EXPECT_DOUBLE_EQ(f(2), 0.75);
  EXPECT_DOUBLE_EQ(f(3), 0.75);
  EXPECT_DOUBLE_EQ(f(4), 1.0);
  EXPECT_EQ(f(-100), 0.0);
  EXPECT_EQ(f.CountAtOrBelow(2), 3u);
}

TEST(EmpiricalCdfTest, RejectsEmptyAndNonFinite) {
  try {
    Cdf({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
    EXPECT_STREQ(e.what(), "empty sample");
  }
  EXPECT_THROW(ScoreSample({1.0, std::nan("")}), Error);
  EXPECT_THROW(ScoreSample({std::numeric_limits<double>::infinity()}), Error);
}

TEST(EmpiricalCdfTest, MatchesCountingOracleOnRandomSamples) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 50);
    std::vector<double> v(n);
    // Coarse values so ties are common.
    for (double& x : v) x = static_cast<double>(rng() % 12) / 4.0;
    const EmpiricalCdf f = Cdf(v);
    for (double x = -1; x <= 4; x += 0.125) {
      EXPECT_DOUBLE_EQ(f(x), CountingOracle(v, x));
    }
    // Jump at each support value equals its multiplicity / n.
    for (const double s : f.support()) {
      const double mult = static_cast<double>(std::count(v.begin(), v.end(), s));
      EXPECT_NEAR(f(s) - f(std::nextafter(s, -1e300)), mult / n, 1e-15);
    }
    EXPECT_EQ(f.cum().back(), 1.0);
  }
}

TEST(AlienCdfTest, HandEnumeratedFixture) {
  const auto est = EstimateAlienCdf(Cdf({1, 2, 3, 4}), Cdf({2, 3, 5, 6}), 0.5);
  const std::vector<double> grid = {1, 2, 3, 4, 5, 6};
  const std::vector<double> raw = {-0.25, 0, 0.25, 0, 0.5, 1};
  EXPECT_EQ(est.grid, grid);
  ASSERT_EQ(est.raw.size(), raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_NEAR(est.raw[i], raw[i], 1e-15);
  EXPECT_FALSE(est.legal.has_value());

  const DetectionThreshold t = SelectThreshold(est, 0.25, ThresholdVariant::kBasic);
  ASSERT_TRUE(t.tau.has_value());
  EXPECT_EQ(*t.tau, 4.0);
}

TEST(AlienCdfTest, PointEvaluations) {
  // Fm = 0.5, F0 = 0.9 at x = 0 with alpha = 0.5.
  auto est = EstimateAlienCdf(Cdf({0, 0, 0, 0, 0, 0, 0, 0, 0, 1}),
                              Cdf({0, 0, 0, 0, 0, 1, 1, 1, 1, 1}), 0.5);
  EXPECT_NEAR(est.raw[0], 0.1, 1e-12);
  // Fm = 0.2, F0 = 0.5 at x = 0 with alpha = 0.2.
  est = EstimateAlienCdf(Cdf({0, 0, 0, 0, 0, 1, 1, 1, 1, 1}),
                         Cdf({0, 0, 1, 1, 1, 1, 1, 1, 1, 1}), 0.2);
  EXPECT_NEAR(est.raw[0], -1.0, 1e-12);
}

TEST(AlienCdfTest, AlphaOneIsMixtureCdf) {
  const EmpiricalCdf fm = Cdf({0.3, 1.5, 2, 2, 7});
  const auto est = EstimateAlienCdf(Cdf({-1, 0.3, 4}), fm, 1.0);
  for (std::size_t i = 0; i < est.grid.size(); ++i) {
    EXPECT_EQ(est.raw[i], fm(est.grid[i]));
  }
}

TEST(AlienCdfTest, RejectsInvalidAlpha) {
  for (const double a : {0.0, -0.1, 1.0000001, std::nan("")}) {
    try {
      EstimateAlienCdf(Cdf({1}), Cdf({2}), a);
      FAIL() << a;
    } catch (const Error& e) {
      EXPECT_EQ(std::string(e.what()).rfind("invalid alpha", 0), 0u) << e.what();
    }
  }
}

TEST(AlienCdfTest, ReconstructsMixtureProperty) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> a(1 + rng() % 40), b(1 + rng() % 40);
    for (double& x : a) x = std::round(z(rng) * 4) / 4;
    for (double& x : b) x = std::round((z(rng) + 1) * 4) / 4;
    const double alpha = u(rng);
    const EmpiricalCdf f0 = Cdf(a), fm = Cdf(b);
    const auto est = EstimateAlienCdf(f0, fm, alpha);
    ASSERT_TRUE(std::is_sorted(est.grid.begin(), est.grid.end()));
    ASSERT_TRUE(std::adjacent_find(est.grid.begin(), est.grid.end()) == est.grid.end());
    for (std::size_t i = 0; i < est.grid.size(); ++i) {
      const double g = est.grid[i];
      EXPECT_NEAR((1 - alpha) * f0(g) + alpha * est.raw[i], fm(g), 1e-12);
    }
    EXPECT_NEAR(est.raw.back(), 1.0, 1e-12);
  }
}

TEST(IsotonicTest, Examples) {
  EXPECT_EQ(IsotonicRegression(std::vector<double>{0.1, 0.2, 0.3}),
            (std::vector<double>{0.1, 0.2, 0.3}));
  const auto pooled = IsotonicRegression(std::vector<double>{0.2, 0.1, 0.3});
  EXPECT_NEAR(pooled[0], 0.15, 1e-15);
  EXPECT_NEAR(pooled[1], 0.15, 1e-15);
  EXPECT_NEAR(pooled[2], 0.3, 1e-15);

  AlienCdfEstimate est;
  est.grid = {1, 2, 3};
  est.raw = {-0.2, 0.1, 1.2};
  const auto clipped = IsotonizeAndClip(est);
  EXPECT_EQ(clipped.raw, est.raw);
  ASSERT_TRUE(clipped.legal.has_value());
  EXPECT_EQ(*clipped.legal, (std::vector<double>{0.0, 0.1, 1.0}));
}

TEST(IsotonicTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<double> y(1 + rng() % 8);
    for (double& v : y) v = u(rng);
    const auto fit = IsotonicRegression(y);
    const auto oracle = BruteForceIsotonic(y);
    ASSERT_EQ(fit.size(), y.size());
    EXPECT_TRUE(std::is_sorted(fit.begin(), fit.end()));
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(fit[i], oracle[i], 1e-9);
  }
}

TEST(ThresholdTest, AllPointsQualify) {
  const auto est = EstimateAlienCdf(Cdf({1, 2, 3, 4}), Cdf({2, 3, 5, 6}), 0.5);
  const auto t = SelectThreshold(est, 0.999999, ThresholdVariant::kBasic);
  // max raw is 1, so only the last point fails; cap it to let every point qualify.
  EXPECT_EQ(*t.tau, 5.0);
  AlienCdfEstimate capped = est;
  capped.raw.back() = 0.9;
  EXPECT_EQ(*SelectThreshold(capped, 0.9, ThresholdVariant::kBasic).tau, 6.0);
}

TEST(ThresholdTest, FlagAllWhenNothingQualifies) {
  // alpha = 1 and q below 1/n.
  const auto est = EstimateAlienCdf(Cdf({1}), Cdf({1, 2, 3, 4}), 1.0);
  const auto t = SelectThreshold(est, 0.1, ThresholdVariant::kBasic);
  EXPECT_TRUE(t.flags_all());
  EXPECT_EQ(Classify(std::vector<double>{-1e300, 0, 5}, t),
            (std::vector<bool>{true, true, true}));
}

TEST(ThresholdTest, RejectsBadQueries) {
  auto est = EstimateAlienCdf(Cdf({1}), Cdf({2}), 0.5);
  EXPECT_THROW(SelectThreshold(est, 0.0, ThresholdVariant::kBasic), Error);
  EXPECT_THROW(SelectThreshold(est, 1.0, ThresholdVariant::kBasic), Error);
  EXPECT_THROW(SelectThreshold(est, 0.1, ThresholdVariant::kIso), Error);
  EXPECT_NO_THROW(SelectThreshold(IsotonizeAndClip(est), 0.1, ThresholdVariant::kIso));
}

TEST(ThresholdTest, StrictAlarm) {
  DetectionThreshold t;
  t.tau = 4.0;
  EXPECT_EQ(Classify(std::vector<double>{3.9, 4.0, 4.1}, t),
            (std::vector<bool>{false, false, true}));
  t.tau = 4.1;
  EXPECT_EQ(AlarmRate(std::vector<double>{3.9, 4.0, 4.1}, t), 0.0);
}

TEST(ThresholdTest, VariantNames) {
  EXPECT_EQ(ParseVariant("iso"), ThresholdVariant::kIso);
  EXPECT_EQ(VariantName(ParseVariant("basic")), "basic");
  EXPECT_THROW(ParseVariant("fancy"), Error);
}

struct RandomInstance {
  std::vector<double> clean;
  std::vector<double> mixture;
};

RandomInstance Draw(std::mt19937_64& rng, double alpha) {
  std::normal_distribution<double> z;
  std::bernoulli_distribution alien(alpha);
  RandomInstance r;
  const int n = 5 + static_cast<int>(rng() % 80);
  for (int i = 0; i < n; ++i) r.clean.push_back(std::round(z(rng) * 8) / 8);
  for (int i = 0; i < n; ++i) {
    r.mixture.push_back(std::round((z(rng) + (alien(rng) ? 2.5 : 0)) * 8) / 8);
  }
  return r;
}

TEST(ThresholdTest, MaximalityProperty) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const RandomInstance r = Draw(rng, 0.3);
    const double q = 0.02 + 0.3 * static_cast<double>(rng() % 100) / 100.0;
    for (const auto variant : {ThresholdVariant::kBasic, ThresholdVariant::kIso}) {
      const auto fit = FitThreshold(ScoreSample(r.clean), ScoreSample(r.mixture),
                                    0.3, q, variant);
      const auto& f = variant == ThresholdVariant::kBasic ? fit.estimate.raw
                                                         : *fit.estimate.legal;
      const auto& grid = fit.estimate.grid;
      const auto& tau = fit.threshold.tau;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (tau && grid[i] == *tau) EXPECT_LE(f[i], q + kCdfTolerance);
        if (!tau || grid[i] > *tau) EXPECT_GT(f[i], q + kCdfTolerance);
      }
      if (tau) {
        EXPECT_TRUE(std::binary_search(grid.begin(), grid.end(), *tau));
      }
    }
  }
}

TEST(ThresholdTest, MonotoneMisspecificationProperty) {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int rep = 0; rep < 400; ++rep) {
    const RandomInstance r = Draw(rng, 0.4);
    const EmpiricalCdf f0 = Cdf(r.clean), fm = Cdf(r.mixture);
    if (!CheckAdmissibility(f0, fm).admissible) continue;
    ++checked;
    const auto base = SelectThreshold(EstimateAlienCdf(f0, fm, 0.4), 0.05,
                                      ThresholdVariant::kBasic);
    for (const double ap : {0.41, 0.5, 0.7, 1.0}) {
      const auto t = SelectThreshold(EstimateAlienCdf(f0, fm, ap), 0.05,
                                     ThresholdVariant::kBasic);
      if (!base.tau) {
        EXPECT_TRUE(t.flags_all());
      } else if (t.tau) {
        EXPECT_LE(*t.tau, *base.tau);
      }
    }
  }
  EXPECT_GT(checked, 20);
}

}  // namespace
}  // namespace ocd
