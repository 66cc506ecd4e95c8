// Copyright 2026 The BNNLab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "bnnlab/dynamics.h"
#include "bnnlab/errors.h"
#include "bnnlab/game_tree.h"
#include "bnnlab/lyapunov.h"
#include "bnnlab/normal_form.h"
#include "bnnlab/random.h"
#include "gtest/gtest.h"
#include "oracles.h"

namespace bnnlab {
namespace {

using oracles::KuhnEquilibrium;

double Sum(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

MixedProfile RandomProfile(const NormalFormGame& g, Rng& rng) {
  MixedProfile p;
  for (Player i = 0; i < kNumPlayers; ++i) {
    p[i] = RandomInteriorSimplex(g.NumActions(i), rng);
  }
  return p;
}

using Vec = std::vector<double>;

double L1(const Strategy& a, const Strategy& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

TEST(NoiseSpecTest, Parse) {
  EXPECT_EQ(NoiseSpec::Parse("none").sigma, 0.0);
  const NoiseSpec g = NoiseSpec::Parse("gauss:0.1");
  EXPECT_EQ(g.distribution, NoiseDistribution::kGaussian);
  EXPECT_EQ(g.sigma, 0.1);
  const NoiseSpec u = NoiseSpec::Parse("uniform:0.2");
  EXPECT_EQ(u.distribution, NoiseDistribution::kUniform);
  EXPECT_EQ(NoiseSpec::Parse(u.ToString()).sigma, 0.2);
  EXPECT_THROW(NoiseSpec::Parse("gauss:-1"), ConfigError);
  EXPECT_THROW(NoiseSpec::Parse("cauchy:1"), ConfigError);
  EXPECT_THROW(NoiseSpec::Parse("gauss:x"), ConfigError);
}

TEST(NoiseModelTest, MatchedVariance) {
  for (const char* text : {"gauss:0.5", "uniform:0.5"}) {
    NoiseModel noise(NoiseSpec::Parse(text), 3);
    double s = 0.0;
    double s2 = 0.0;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
      const double x = noise.Draw();
      s += x;
      s2 += x * x;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01) << text;
    EXPECT_NEAR(std::sqrt(s2 / n), 0.5, 0.01) << text;
  }
}

TEST(StepScheduleTest, ParseAndEvaluate) {
  const StepSchedule p = StepSchedule::Parse("power:c=2,t0=6");
  EXPECT_NEAR(p.Eta(2), 2.0 / 4.0, 1e-15);
  const StepSchedule c = StepSchedule::Parse("const:0.05");
  EXPECT_EQ(c.Eta(1000), 0.05);
  EXPECT_EQ(StepSchedule::Parse(p.ToString()).Eta(7), p.Eta(7));
  EXPECT_THROW(StepSchedule::Parse("power:t0=0.5"), ConfigError);
  EXPECT_THROW(StepSchedule::Parse("const:0"), ConfigError);
  EXPECT_THROW(StepSchedule::Parse("power:k=1"), ConfigError);
  EXPECT_THROW(StepSchedule::Parse("linear:1"), ConfigError);
}

TEST(StepTest, Example) {
  const StepResult r = Step(Vec(3, 1.0 / 3),
                            Vec{-1.0 / 3, 2.0 / 3, -1.0 / 3}, 0.3);
  EXPECT_FALSE(r.floored);
  EXPECT_NEAR(r.next[0], 0.7 / 3, 1e-15);
  EXPECT_NEAR(r.next[1], 1.6 / 3, 1e-15);
  EXPECT_NEAR(r.next[2], 0.7 / 3, 1e-15);
}

TEST(StepTest, ZeroDirectionKeepsProfile) {
  const std::vector<double> pi = {0.2, 0.3, 0.5};
  EXPECT_EQ(Step(pi, Vec{0.0, 0.0, 0.0}, 0.7).next, pi);
}

TEST(StepTest, FloorAndRenormalize) {
  const StepResult r = Step(Vec{0.5, 0.5}, Vec{-10.0, 10.0}, 1.0);
  EXPECT_TRUE(r.floored);
  EXPECT_GE(r.next[0], kSimplexFloor * 0.99);
  EXPECT_TRUE(IsValidSimplex(r.next));
}

TEST(StepTest, NonFiniteIsNumericalError) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Step(Vec{0.5, 0.5}, Vec{nan, 0.0}, 0.1), NumericalError);
  EXPECT_THROW(Step(Vec{0.5, 0.5}, Vec{0.1, -0.1}, nan), NumericalError);
  EXPECT_THROW(Step(Vec{0.5, 0.5}, Vec{0.1}, 0.1), ShapeError);
}

TEST(BnnFieldTest, RpsAgainstRock) {
  const NormalFormGame g = BuildRps({});
  MixedProfile p = UniformProfile(g);
  p[kPlayerTwo] = {1.0, 0.0, 0.0};
  const std::vector<double> adv = Advantages(g, p, kPlayerOne);
  EXPECT_NEAR(adv[0], 0.0, 1e-15);
  EXPECT_NEAR(adv[1], 1.0, 1e-15);
  EXPECT_NEAR(adv[2], -1.0, 1e-15);
  const std::vector<double> h = BnnField(g, p, kPlayerOne);
  EXPECT_NEAR(h[0], -1.0 / 3, 1e-15);
  EXPECT_NEAR(h[1], 2.0 / 3, 1e-15);
  EXPECT_NEAR(h[2], -1.0 / 3, 1e-15);
}

TEST(BnnFieldTest, ZeroAtNash) {
  const NormalFormGame g = BuildRps(NamedRpsParams("brps"));
  MixedProfile p;
  p[kPlayerOne] = {1.0 / 14, 1.0 / 14, 12.0 / 14};
  p[kPlayerTwo] = p[kPlayerOne];
  for (Player i = 0; i < kNumPlayers; ++i) {
    for (double h : BnnField(g, p, i)) EXPECT_NEAR(h, 0.0, 1e-14);
  }
}

TEST(BnnFieldTest, TangentAndZeroIffNoPositiveAdvantage) {
  Rng rng(5);
  const NormalFormGame g = BuildRps(NamedRpsParams("brps_w"));
  for (int k = 0; k < 1000; ++k) {
    const MixedProfile p = RandomProfile(g, rng);
    for (Player i = 0; i < kNumPlayers; ++i) {
      const std::vector<double> h = BnnField(g, p, i);
      EXPECT_NEAR(Sum(h), 0.0, 1e-12);
      const std::vector<double> adv = Advantages(g, p, i);
      const bool any_positive =
          std::any_of(adv.begin(), adv.end(), [](double a) { return a > 0; });
      const bool all_zero =
          std::all_of(h.begin(), h.end(), [](double x) { return x == 0.0; });
      EXPECT_EQ(any_positive, !all_zero);
    }
  }
}

TEST(NoisyBnnFieldTest, ZeroSigmaIsBitwiseExact) {
  Rng rng(6);
  const NormalFormGame g = BuildRps(NamedRpsParams("brps"));
  NoiseModel noise(NoiseSpec{}, 9);
  for (int k = 0; k < 100; ++k) {
    const MixedProfile p = RandomProfile(g, rng);
    const FieldSample s = NoisyBnnField(g, p, kPlayerOne, noise);
    EXPECT_EQ(s.direction, BnnField(g, p, kPlayerOne));
    EXPECT_EQ(s.bias_free_direction, s.direction);
  }
}

TEST(NoisyBnnFieldTest, Deterministic) {
  const NormalFormGame g = BuildRps(NamedRpsParams("brps"));
  const MixedProfile p = UniformProfile(g);
  NoiseModel a(NoiseSpec::Parse("gauss:0.3"), 42);
  NoiseModel b(NoiseSpec::Parse("gauss:0.3"), 42);
  for (int k = 0; k < 10; ++k) {
    const FieldSample x = NoisyBnnField(g, p, kPlayerTwo, a);
    const FieldSample y = NoisyBnnField(g, p, kPlayerTwo, b);
    EXPECT_EQ(x.direction, y.direction);
    EXPECT_EQ(x.noise_draws, y.noise_draws);
    EXPECT_EQ(x.noise_draws.size(), 3u);
    EXPECT_NEAR(Sum(x.direction), 0.0, 1e-12);
  }
}

TEST(NoisyBnnFieldTest, BiasWithinBound) {
  const NormalFormGame g = BuildRps(NamedRpsParams("brps"));
  Rng rng(8);
  const MixedProfile p = RandomProfile(g, rng);
  const double sigma = 0.2;
  NoiseModel noise(NoiseSpec{NoiseDistribution::kGaussian, sigma}, 10);
  const int n = 100000;
  const std::vector<double> h = BnnField(g, p, kPlayerOne);
  std::vector<double> s(3, 0.0);
  std::vector<double> s2(3, 0.0);
  for (int k = 0; k < n; ++k) {
    const FieldSample f = NoisyBnnField(g, p, kPlayerOne, noise);
    for (int a = 0; a < 3; ++a) {
      s[a] += f.direction[a];
      s2[a] += f.direction[a] * f.direction[a];
    }
  }
  for (int a = 0; a < 3; ++a) {
    const double mean = s[a] / n;
    const double se = std::sqrt((s2[a] / n - mean * mean) / n);
    EXPECT_LE(std::abs(mean - h[a]), 2.0 * sigma + 3.0 * se);
  }
}

TEST(NoisyBnnFieldTest, PathwiseContinuityInSigma) {
  const NormalFormGame g = BuildRps(NamedRpsParams("brps"));
  Rng rng(12);
  const MixedProfile p = RandomProfile(g, rng);
  const std::vector<double> h = BnnField(g, p, kPlayerOne);
  for (double sigma : {1e-2, 1e-3, 1e-4}) {
    NoiseModel noise(NoiseSpec{NoiseDistribution::kGaussian, sigma}, 77);
    for (int k = 0; k < 100; ++k) {
      const FieldSample f = NoisyBnnField(g, p, kPlayerOne, noise);
      double err = 0.0;
      double xi = 0.0;
      for (int a = 0; a < 3; ++a) {
        err = std::max(err, std::abs(f.direction[a] - h[a]));
        xi = std::max(xi, std::abs(f.noise_draws[a]));
      }
      EXPECT_LE(err, 4.0 * xi + 1e-15);
    }
  }
}

TEST(BnnFieldTest, SupportNeverExtinguished) {
  const NormalFormGame g = BuildRps(NamedRpsParams("brps"));
  Rng rng(13);
  MixedProfile p = RandomProfile(g, rng);
  const double eta = 0.01;
  for (int t = 0; t < 20000; ++t) {
    MixedProfile next = p;
    for (Player i = 0; i < kNumPlayers; ++i) {
      ASSERT_LT(eta * SMass(g, p, i), 1.0);
      const StepResult r = Step(p[i], BnnField(g, p, i), eta, 0.0);
      EXPECT_FALSE(r.floored);
      next[i] = r.next;
    }
    p = next;
    for (Player i = 0; i < kNumPlayers; ++i) {
      ASSERT_GT(*std::min_element(p[i].begin(), p[i].end()), 0.0);
    }
  }
}

TEST(ReplicatorFieldTest, RegularizedReductions) {
  const NormalFormGame g = BuildRps(NamedRpsParams("brps"));
  Rng rng(14);
  for (int k = 0; k < 50; ++k) {
    const MixedProfile p = RandomProfile(g, rng);
    RegRdConfig zero{0.0, 100, RandomProfile(g, rng)};
    RegRdConfig at_ref{0.3, 100, p};
    for (Player i = 0; i < kNumPlayers; ++i) {
      const std::vector<double> rep = ReplicatorField(g, p, i);
      EXPECT_NEAR(Sum(rep), 0.0, 1e-12);
      const std::vector<double> a = RegularizedReplicatorField(g, p, i, zero);
      const std::vector<double> b = RegularizedReplicatorField(g, p, i, at_ref);
      for (int x = 0; x < 3; ++x) {
        EXPECT_NEAR(a[x], rep[x], 1e-15);
        EXPECT_NEAR(b[x], rep[x], 1e-15);
      }
    }
  }
}

TEST(ReplicatorFieldTest, NonInteriorReferenceIsConfigError) {
  const NormalFormGame g = BuildRps({});
  const MixedProfile p = UniformProfile(g);
  MixedProfile ref = p;
  ref[kPlayerOne] = {1.0, 0.0, 0.0};
  EXPECT_THROW(RegularizedReplicatorField(g, p, kPlayerOne, {0.1, 100, ref}),
               ConfigError);
}

TEST(RegRdFixedPointTest, DriftGrowsWithLambdaAndResetHelps) {
  const NormalFormGame g = BuildRps(NamedRpsParams("brps"));
  const Strategy nash = {1.0 / 14, 1.0 / 14, 12.0 / 14};
  const MixedProfile uniform = UniformProfile(g);
  double previous = 0.0;
  for (double lambda : {0.05, 0.1, 0.2}) {
    RegRdConfig cfg{lambda, 100, uniform};
    const FixedPointResult first =
        FindRegRdFixedPoint(g, uniform, cfg, 0.05, 2000000, 1e-11);
    ASSERT_TRUE(first.converged) << lambda;
    const double d1 = L1(first.profile[kPlayerOne], nash);
    EXPECT_GT(d1, previous);
    EXPECT_GT(NashConv(g, first.profile), 0.0);
    previous = d1;
    cfg.reference = first.profile;
    const FixedPointResult second =
        FindRegRdFixedPoint(g, first.profile, cfg, 0.05, 2000000, 1e-11);
    ASSERT_TRUE(second.converged) << lambda;
    EXPECT_LT(L1(second.profile[kPlayerOne], nash), d1);
  }
}

TEST(EfgBnnFieldTest, ZeroAtEquilibrium) {
  const GameTree t = BuildKuhn();
  const BehaviorProfile b = KuhnEquilibrium(t, 0.2);
  const CfValueTable cf = ComputeCfValues(t, b);
  for (Player p = 0; p < kNumPlayers; ++p) {
    for (const auto& f : EfgBnnField(t, b, cf, p)) {
      for (double x : f) EXPECT_NEAR(x, 0.0, 1e-14);
    }
  }
}

TEST(EfgBnnFieldTest, UniformKuhnJackFacingBet) {
  const GameTree t = BuildKuhn();
  const BehaviorProfile b = UniformBehavior(t);
  const CfValueTable cf = ComputeCfValues(t, b);
  const int x = t.FindInfoset("p1|J||cb");
  // Deals JQ and JK, then the opponent bets after a check.
  const double rho = 2.0 / 6 * 0.5;
  EXPECT_NEAR(cf.external_reach[x], rho, 1e-15);
  // Folding loses 1, calling loses 2 in both deals.
  const std::vector<double> adv = {0.5, -0.5};
  const EfgField f = EfgBnnField(t, b, cf, kPlayerOne);
  const std::vector<double> bnn = BnnDirection(adv, b[x]);
  for (int a = 0; a < 2; ++a) {
    EXPECT_NEAR(cf.advantages[x][a], adv[a], 1e-14);
    EXPECT_NEAR(f[x][a], rho * bnn[a], 1e-15);
  }
  for (int y : t.infosets_of(kPlayerTwo)) {
    for (double v : f[y]) EXPECT_EQ(v, 0.0);
  }
}

TEST(EfgBnnFieldTest, LinearInReachAndZeroWithoutReach) {
  const GameTree t = BuildKuhn();
  Rng rng(15);
  const BehaviorProfile b = RandomInteriorBehavior(t, rng);
  CfValueTable cf = ComputeCfValues(t, b);
  const EfgField f = EfgBnnField(t, b, cf, kPlayerOne);
  CfValueTable doubled = cf;
  for (double& r : doubled.external_reach) r *= 2.0;
  const EfgField g = EfgBnnField(t, b, doubled, kPlayerOne);
  for (int x = 0; x < t.num_infosets(); ++x) {
    EXPECT_NEAR(Sum(f[x]), 0.0, 1e-12);
    for (std::size_t a = 0; a < f[x].size(); ++a) {
      EXPECT_NEAR(g[x][a], 2.0 * f[x][a], 1e-15);
    }
  }
  for (double& r : cf.external_reach) r = 0.0;
  for (auto& a : cf.advantages) std::fill(a.begin(), a.end(), 5.0);
  for (const auto& v : EfgBnnField(t, b, cf, kPlayerOne)) {
    for (double x : v) EXPECT_EQ(x, 0.0);
  }
}

TEST(NoisyEfgBnnFieldTest, ZeroSigmaAndDeterminism) {
  const GameTree t = BuildKuhn();
  Rng rng(16);
  const BehaviorProfile b = RandomInteriorBehavior(t, rng);
  const CfValueTable cf = ComputeCfValues(t, b);
  NoiseModel none(NoiseSpec{}, 1);
  const auto exact = NoisyEfgBnnField(t, b, kPlayerTwo, none);
  const EfgField field = EfgBnnField(t, b, cf, kPlayerTwo);
  for (int x = 0; x < t.num_infosets(); ++x) {
    EXPECT_EQ(exact[x].direction, field[x]);
  }
  NoiseModel n1(NoiseSpec::Parse("gauss:0.1"), 5);
  NoiseModel n2(NoiseSpec::Parse("gauss:0.1"), 5);
  const auto s1 = NoisyEfgBnnField(t, b, kPlayerTwo, n1);
  const auto s2 = NoisyEfgBnnField(t, b, kPlayerTwo, n2);
  for (int x = 0; x < t.num_infosets(); ++x) {
    EXPECT_EQ(s1[x].direction, s2[x].direction);
    EXPECT_NEAR(Sum(s1[x].direction), 0.0, 1e-12);
  }
}

double EfgBiasNorm(const GameTree& t, const BehaviorProfile& b, double sigma,
                   int n) {
  NoiseModel noise(NoiseSpec{NoiseDistribution::kGaussian, sigma}, 2024);
  const CfValueTable cf = ComputeCfValues(t, b);
  std::vector<std::vector<double>> mean(t.num_infosets());
  std::vector<std::vector<double>> exact(t.num_infosets());
  for (Player p = 0; p < kNumPlayers; ++p) {
    const EfgField f = EfgBnnField(t, b, cf, p);
    for (int x : t.infosets_of(p)) {
      exact[x] = f[x];
      mean[x].assign(f[x].size(), 0.0);
    }
  }
  for (int k = 0; k < n; ++k) {
    for (Player p = 0; p < kNumPlayers; ++p) {
      const auto s = NoisyEfgBnnField(t, b, cf, p, noise);
      for (int x : t.infosets_of(p)) {
        for (std::size_t a = 0; a < mean[x].size(); ++a) {
          mean[x][a] += s[x].direction[a] / n;
        }
      }
    }
  }
  double norm = 0.0;
  for (int x = 0; x < t.num_infosets(); ++x) {
    for (std::size_t a = 0; a < mean[x].size(); ++a) {
      norm += std::pow(mean[x][a] - exact[x][a], 2);
    }
  }
  return std::sqrt(norm);
}

TEST(NoisyEfgBnnFieldTest, BiasShrinksLinearlyInSigma) {
  const GameTree t = BuildKuhn();
  const BehaviorProfile b = KuhnEquilibrium(t, 0.2);
  const double big = EfgBiasNorm(t, b, 0.1, 20000);
  const double small = EfgBiasNorm(t, b, 0.05, 20000);
  ASSERT_TRUE(std::isfinite(big));
  ASSERT_GT(small, 0.0);
  EXPECT_NEAR(big / small, 2.0, 0.3);
}

TEST(EfgRegularizedReplicatorTest, TangentAndReducesAtReference) {
  const GameTree t = BuildKuhn();
  Rng rng(18);
  const BehaviorProfile b = RandomInteriorBehavior(t, rng);
  const CfValueTable cf = ComputeCfValues(t, b);
  NoiseModel none;
  const EfgField plain =
      EfgRegularizedReplicatorField(t, b, cf, kPlayerOne, {0.0, 100, {}}, none);
  const EfgField at_ref =
      EfgRegularizedReplicatorField(t, b, cf, kPlayerOne, {0.5, 100, b}, none);
  for (int x = 0; x < t.num_infosets(); ++x) {
    EXPECT_NEAR(Sum(plain[x]), 0.0, 1e-12);
    for (std::size_t a = 0; a < plain[x].size(); ++a) {
      EXPECT_NEAR(plain[x][a], at_ref[x][a], 1e-15);
    }
  }
}

TEST(StepBehaviorTest, KeepsEverySimplexValid) {
  const GameTree t = BuildLeduc();
  Rng rng(20);
  BehaviorProfile b = RandomInteriorBehavior(t, rng);
  NoiseModel noise(NoiseSpec::Parse("gauss:0.5"), 3);
  for (int k = 0; k < 20; ++k) {
    for (Player p = 0; p < kNumPlayers; ++p) {
      const auto s = NoisyEfgBnnField(t, b, p, noise);
      EfgField f(s.size());
      for (std::size_t x = 0; x < s.size(); ++x) f[x] = s[x].direction;
      StepBehavior(b, f, 5.0);
    }
  }
  for (int x = 0; x < t.num_infosets(); ++x) {
    EXPECT_TRUE(IsValidSimplex(b[x], 1e-12));
  }
}

}  // namespace
}  // namespace bnnlab
