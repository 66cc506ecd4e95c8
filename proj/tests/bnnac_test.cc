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
#include <numeric>
#include <vector>

#include "bnnlab/bnnac.h"
#include "bnnlab/dynamics.h"
#include "bnnlab/errors.h"
#include "bnnlab/game_tree.h"
#include "bnnlab/random.h"
#include "gtest/gtest.h"

namespace bnnlab {
namespace {

// Player one picks l (payoff 0.2) or r (payoff -0.2).
GameTree OneShotTree() {
  GameTreeBuilder b;
  const int root = b.AddDecision(-1, "", kPlayerOne, "x");
  b.AddTerminal(root, "l", 0.2);
  b.AddTerminal(root, "r", -0.2);
  return std::move(b).Build();
}

std::vector<double> JacobianImage(const Strategy& pi,
                                  const std::vector<double>& delta) {
  const double mean =
      std::inner_product(pi.begin(), pi.end(), delta.begin(), 0.0);
  std::vector<double> out(pi.size());
  for (std::size_t a = 0; a < pi.size(); ++a) out[a] = pi[a] * (delta[a] - mean);
  return out;
}

BnnacConfig OracleConfig(double eta) {
  BnnacConfig c;
  c.k_actor = 1;
  c.eta = StepSchedule{StepSchedule::Kind::kConstant, eta, 1.0};
  c.oracle_tables = true;
  return c;
}

TEST(SoftmaxTest, SimplexAndShiftInvariance) {
  const std::vector<double> l = {0.3, -1.2, 2.0};
  const Strategy p = Softmax(l);
  EXPECT_TRUE(IsValidSimplex(p));
  const Strategy q = Softmax(std::vector<double>{5.3, 3.8, 7.0});
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(p[a], q[a], 1e-15);
  const Strategy big = Softmax(std::vector<double>{1000.0, 0.0});
  EXPECT_TRUE(std::isfinite(big[0]));
  EXPECT_NEAR(big[0], 1.0, 1e-15);
}

TEST(BnnacConfigTest, Validate) {
  BnnacConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.k_actor = 0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = BnnacConfig{};
  c.alpha = 0.0;
  EXPECT_THROW(c.Validate(), ConfigError);
  c = BnnacConfig{};
  c.policy_floor = 0.0;
  EXPECT_THROW(c.Validate(), ConfigError);
}

TEST(CollectTest, EmptyBatchAndDeterminism) {
  const GameTree t = BuildKuhn();
  const BehaviorProfile b = UniformBehavior(t);
  Rng rng(1);
  EXPECT_TRUE(Collect(t, b, 0, rng).empty());
  Rng r1(7);
  Rng r2(7);
  const Dataset d1 = Collect(t, b, 50, r1);
  const Dataset d2 = Collect(t, b, 50, r2);
  ASSERT_EQ(d1.size(), 50u);
  for (std::size_t k = 0; k < d1.size(); ++k) {
    ASSERT_EQ(d1[k].visits.size(), d2[k].visits.size());
    EXPECT_EQ(d1[k].terminal_payoff, d2[k].terminal_payoff);
    for (std::size_t v = 0; v < d1[k].visits.size(); ++v) {
      EXPECT_EQ(d1[k].visits[v].infoset, d2[k].visits[v].infoset);
      EXPECT_EQ(d1[k].visits[v].action, d2[k].visits[v].action);
      const Visit& visit = d1[k].visits[v];
      const double own = visit.player == kPlayerOne ? d1[k].terminal_payoff
                                                    : -d1[k].terminal_payoff;
      EXPECT_EQ(visit.payoff, own);
    }
  }
}

TEST(CollectTest, VisitFrequenciesMatchReach) {
  const GameTree t = BuildKuhn();
  Rng init(3);
  const BehaviorProfile b = RandomInteriorBehavior(t, init);
  const ReachTable reach = ComputeReach(t, b);
  std::vector<double> expected(t.num_infosets(), 0.0);
  for (int x = 0; x < t.num_infosets(); ++x) {
    for (int h : t.infoset(x).nodes) expected[x] += reach.Total(h);
  }
  const int n = 100000;
  Rng rng(4);
  const Dataset data = Collect(t, b, n, rng);
  std::vector<double> count(t.num_infosets(), 0.0);
  for (const Trajectory& traj : data) {
    for (const Visit& v : traj.visits) count[v.infoset] += 1.0;
  }
  for (int x = 0; x < t.num_infosets(); ++x) {
    const double p = expected[x];
    const double se = std::sqrt(p * (1.0 - p) / n);
    EXPECT_NEAR(count[x] / n, p, 3.0 * se + 1e-12) << t.infoset(x).key;
  }
}

TEST(BnnacLearnerTest, HandExample) {
  const GameTree t = OneShotTree();
  BnnacLearner learner(t, kPlayerOne, 1e-3);
  learner.LoadOracleTables(ComputeCfValues(t, UniformBehavior(t)));
  EXPECT_DOUBLE_EQ(learner.reach(0), 1.0);
  EXPECT_NEAR(learner.critic(0)[0], 0.2, 1e-15);
  EXPECT_NEAR(learner.critic(0)[1], -0.2, 1e-15);
  const std::vector<double> delta = learner.LogitDirection(0);
  EXPECT_NEAR(delta[0], 0.4, 1e-15);
  EXPECT_EQ(delta[1], 0.0);
  const std::vector<double> image = JacobianImage(learner.Policy(0), delta);
  EXPECT_NEAR(image[0], 0.1, 1e-15);
  EXPECT_NEAR(image[1], -0.1, 1e-15);
  const std::vector<double> bnn = BnnDirection(
      std::vector<double>{0.2, -0.2}, learner.Policy(0));
  for (int a = 0; a < 2; ++a) EXPECT_NEAR(image[a], bnn[a], 1e-15);
}

TEST(BnnacLearnerTest, NoPositiveAdvantageNoMove) {
  const GameTree t = OneShotTree();
  BnnacLearner learner(t, kPlayerOne, 1e-3);
  learner.set_logits(0, {0.5, -0.5});
  learner.set_critic(0, {0.3, 0.3});
  const Strategy before = learner.Policy(0);
  for (double d : learner.LogitDirection(0)) EXPECT_EQ(d, 0.0);
  learner.UpdateActor(1.0);
  const Strategy after = learner.Policy(0);
  for (int a = 0; a < 2; ++a) EXPECT_NEAR(after[a], before[a], 1e-15);
}

TEST(BnnacLearnerTest, ShiftBeforePositivePartMatters) {
  const GameTree t = OneShotTree();
  BnnacLearner learner(t, kPlayerOne, 1e-3);
  learner.set_logits(0, {1.0, 0.0});
  learner.set_critic(0, {0.2, -0.2});
  const std::vector<double> d1 = learner.LogitDirection(0);
  learner.set_critic(0, {0.7, 0.3});
  const std::vector<double> d2 = learner.LogitDirection(0);
  for (int a = 0; a < 2; ++a) EXPECT_NEAR(d1[a], d2[a], 1e-15);
  const Strategy pi = learner.Policy(0);
  std::vector<double> shifted = {0.2 + 0.5, -0.2 + 0.5};
  std::vector<double> centred = {0.2, -0.2};
  const double mean = pi[0] * 0.2 - pi[1] * 0.2;
  for (double& a : centred) a -= mean;
  EXPECT_NE(BnnDirection(shifted, pi), BnnDirection(centred, pi));
}

TEST(BnnacLearnerTest, FloorIsCounted) {
  const GameTree t = OneShotTree();
  BnnacLearner learner(t, kPlayerOne, 1e-3);
  learner.set_logits(0, {0.0, -20.0});
  learner.set_critic(0, {-1.0, 1.0});
  int events = 0;
  const std::vector<double> d = learner.LogitDirection(0, &events);
  EXPECT_EQ(events, 1);
  EXPECT_TRUE(std::isfinite(d[1]));
  EXPECT_LE(d[1], 2.0 / 1e-3);
}

TEST(BnnacLearnerTest, LogitsCentredAfterUpdate) {
  const GameTree t = BuildLeduc();
  Rng rng(5);
  BnnacTrainer trainer(t, BnnacConfig{}, NoiseSpec{}, 9);
  trainer.SetPolicy(RandomInteriorBehavior(t, rng));
  for (int k = 0; k < 21; ++k) trainer.Iterate();
  for (Player p = 0; p < kNumPlayers; ++p) {
    for (int x : t.infosets_of(p)) {
      const auto l = trainer.learner(p).logits(x);
      EXPECT_NEAR(std::accumulate(l.begin(), l.end(), 0.0), 0.0, 1e-12);
    }
  }
}

TEST(BnnacLearnerTest, JacobianIdentityWithOracleTables) {
  const GameTree t = BuildKuhn();
  Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    const BehaviorProfile b = RandomInteriorBehavior(t, rng);
    BnnacTrainer trainer(t, OracleConfig(1e-3), NoiseSpec{}, 1);
    trainer.SetPolicy(b);
    const BehaviorProfile joint = trainer.JointPolicy();
    const CfValueTable cf = ComputeCfValues(t, joint);
    for (Player p = 0; p < kNumPlayers; ++p) {
      BnnacLearner& learner = trainer.mutable_learner(p);
      learner.LoadOracleTables(cf);
      const EfgField field = EfgBnnField(t, joint, cf, p);
      for (int x : t.infosets_of(p)) {
        const std::vector<double> image =
            JacobianImage(joint[x], learner.LogitDirection(x));
        for (std::size_t a = 0; a < image.size(); ++a) {
          EXPECT_NEAR(image[a], field[x][a], 1e-10);
        }
      }
    }
  }
}

TEST(BnnacLearnerTest, CriticConvergesGeometrically) {
  const GameTree t = OneShotTree();
  BnnacLearner learner(t, kPlayerOne, 1e-3);
  Trajectory traj;
  traj.visits.push_back({0, 0, kPlayerOne, 0.8});
  const Dataset data = {traj};
  learner.UpdateCritic({}, 0.5);
  EXPECT_EQ(learner.critic(0)[0], 0.0);
  for (int k = 1; k <= 30; ++k) {
    learner.UpdateCritic(data, 0.1);
    EXPECT_NEAR(learner.critic(0)[0], 0.8 * (1.0 - std::pow(0.9, k)), 1e-12);
  }
  EXPECT_EQ(learner.critic_visits(0, 0), 30);
  EXPECT_EQ(learner.critic_visits(0, 1), 0);
}

TEST(BnnacLearnerTest, CriticMatchesOracleUnderUniformPlay) {
  const GameTree t = BuildKuhn();
  const BehaviorProfile b = UniformBehavior(t);
  const CfValueTable cf = ComputeCfValues(t, b);
  BnnacLearner learner(t, kPlayerOne, 1e-3);
  Rng rng(8);
  const double alpha = 0.002;
  for (int k = 0; k < 5000; ++k) {
    learner.UpdateCritic(Collect(t, b, 16, rng), alpha);
  }
  // Stationary spread of a constant-step average of returns in [-2, 2].
  const double se = std::sqrt(alpha / (2.0 - alpha) * 4.0);
  for (int x : t.infosets_of(kPlayerOne)) {
    for (int a = 0; a < 2; ++a) {
      const double exact = cf.action_values[x][a] / cf.external_reach[x];
      EXPECT_NEAR(learner.critic(x)[a], exact, 3.0 * se) << t.infoset(x).key;
    }
  }
}

TEST(BnnacLearnerTest, ReachEstimate) {
  const GameTree t = BuildKuhn();
  Rng init(9);
  const BehaviorProfile b = RandomInteriorBehavior(t, init);
  BnnacLearner learner(t, kPlayerOne, 1e-3);
  for (int x : t.infosets_of(kPlayerOne)) {
    std::vector<double> l;
    for (double p : b[x]) l.push_back(std::log(p));
    learner.set_logits(x, l);
  }
  BehaviorProfile joint = b;
  learner.WritePolicy(joint);
  const ReachTable exact = ComputeReach(t, joint);
  learner.UpdateReach({}, 0.1);
  Rng rng(10);
  const double beta = 0.001;
  for (int k = 0; k < 4000; ++k) {
    learner.UpdateReach(Collect(t, joint, 16, rng), beta);
  }
  const std::vector<double> own = learner.OwnReach();
  for (int x : t.infosets_of(kPlayerOne)) {
    // Stationary spread of the visit-rate average, divided by own reach.
    const double visit = own[x] * exact.infoset_external[x];
    const double se = std::sqrt(beta / 2.0 * visit) / own[x];
    EXPECT_NEAR(learner.reach(x), exact.infoset_external[x], 4.0 * se)
        << t.infoset(x).key;
    if (t.infoset(x).parent_infoset < 0) {
      EXPECT_NEAR(exact.infoset_external[x], 1.0 / 3.0, 1e-15);
    }
  }
}

TEST(BnnacLearnerTest, ReachClampedUnderAdversarialData) {
  const GameTree t = BuildKuhn();
  BnnacLearner learner(t, kPlayerOne, 1e-3);
  const int root_j = t.FindInfoset("p1|J||");
  const int jcb = t.FindInfoset("p1|J||cb");
  learner.set_logits(root_j, {-10.0, 10.0});
  Trajectory traj;
  traj.visits.push_back({root_j, 0, kPlayerOne, 1.0});
  traj.visits.push_back({jcb, 0, kPlayerOne, 1.0});
  const Dataset data(20, traj);
  for (int k = 0; k < 50; ++k) learner.UpdateReach(data, 0.3);
  for (int x : t.infosets_of(kPlayerOne)) {
    EXPECT_GE(learner.reach(x), 0.0);
    EXPECT_LE(learner.reach(x), 1.0);
  }
  EXPECT_EQ(learner.reach(jcb), 1.0);
}

TEST(BnnacLearnerTest, SetTreeChecksShape) {
  const GameTree kuhn = BuildKuhn();
  const GameTree other = BuildKuhn(2.0);
  BnnacTrainer trainer(kuhn, BnnacConfig{}, NoiseSpec{}, 1);
  EXPECT_NO_THROW(trainer.SetTree(other));
  const GameTree leduc = BuildLeduc();
  EXPECT_THROW(trainer.SetTree(leduc), ShapeError);
}

TEST(BnnacTrainerTest, InformationHiding) {
  const GameTree t = BuildKuhn();
  BnnacConfig config;
  config.k_actor = 1;
  config.batch = 32;
  BnnacTrainer a(t, config, NoiseSpec::Parse("gauss:0.1"), 11);
  BnnacTrainer b(t, config, NoiseSpec::Parse("gauss:0.1"), 11);
  for (int k = 0; k < 5; ++k) a.Iterate(), b.Iterate();
  // Replace learner two's critic in b with unrelated values; its policy is
  // untouched, so the next batch is the same.
  for (int x : t.infosets_of(kPlayerTwo)) {
    b.mutable_learner(kPlayerTwo).set_critic(x, {7.0, -3.0});
  }
  a.Iterate();
  b.Iterate();
  const BnnacLearner& la = a.learner(kPlayerOne);
  const BnnacLearner& lb = b.learner(kPlayerOne);
  for (int x : t.infosets_of(kPlayerOne)) {
    for (int i = 0; i < 2; ++i) {
      EXPECT_EQ(la.logits(x)[i], lb.logits(x)[i]);
      EXPECT_EQ(la.critic(x)[i], lb.critic(x)[i]);
    }
    EXPECT_EQ(la.reach(x), lb.reach(x));
  }
}

TEST(BnnacTrainerTest, ActorGatedByInterval) {
  const GameTree t = BuildKuhn();
  BnnacConfig config;
  config.k_actor = 4;
  BnnacTrainer trainer(t, config, NoiseSpec{}, 2);
  trainer.Iterate();
  const BehaviorProfile after_first = trainer.JointPolicy();
  for (int k = 1; k < 4; ++k) {
    trainer.Iterate();
    EXPECT_EQ(trainer.JointPolicy(), after_first);
  }
  trainer.Iterate();
  EXPECT_NE(trainer.JointPolicy(), after_first);
  EXPECT_EQ(trainer.iteration(), 5);
}

TEST(BnnacTrainerTest, StepClockRestarts) {
  const GameTree t = BuildKuhn();
  BnnacConfig config;
  config.k_actor = 1;
  BnnacTrainer trainer(t, config, NoiseSpec{}, 2);
  trainer.Iterate();
  const double first = trainer.last_eta();
  for (int k = 0; k < 9; ++k) trainer.Iterate();
  EXPECT_LT(trainer.last_eta(), first);
  trainer.ResetStepClock();
  trainer.Iterate();
  EXPECT_EQ(trainer.last_eta(), first);
}

TEST(RunBnnacTest, Deterministic) {
  const GameTree t = BuildKuhn();
  const BnnacRun a = RunBnnac(t, BnnacConfig{}, NoiseSpec::Parse("gauss:0.1"),
                              300, 5, 100);
  const BnnacRun b = RunBnnac(t, BnnacConfig{}, NoiseSpec::Parse("gauss:0.1"),
                              300, 5, 100);
  EXPECT_EQ(a.final_policy, b.final_policy);
  ASSERT_EQ(a.readings.size(), 4u);
  for (std::size_t k = 0; k < a.readings.size(); ++k) {
    EXPECT_EQ(a.readings[k].nash_conv, b.readings[k].nash_conv);
  }
  const BnnacRun c = RunBnnac(t, BnnacConfig{}, NoiseSpec::Parse("gauss:0.1"),
                              300, 6, 100);
  EXPECT_NE(a.final_policy, c.final_policy);
}

TEST(RunBnnacTest, OracleTablesFollowExactField) {
  const GameTree t = BuildKuhn();
  const double eta = 1e-4;
  BnnacTrainer trainer(t, OracleConfig(eta), NoiseSpec{}, 3);
  Rng rng(12);
  trainer.SetPolicy(RandomInteriorBehavior(t, rng));
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const BehaviorProfile before = trainer.JointPolicy();
    const CfValueTable cf = ComputeCfValues(t, before);
    BehaviorProfile expected = before;
    for (Player p = 0; p < kNumPlayers; ++p) {
      const EfgField field = EfgBnnField(t, before, cf, p);
      for (int x : t.infosets_of(p)) {
        for (std::size_t a = 0; a < field[x].size(); ++a) {
          expected[x][a] += eta * field[x][a];
        }
      }
    }
    trainer.Iterate();
    const BehaviorProfile after = trainer.JointPolicy();
    for (int x = 0; x < t.num_infosets(); ++x) {
      for (std::size_t a = 0; a < after[x].size(); ++a) {
        worst = std::max(worst, std::abs(after[x][a] - expected[x][a]));
      }
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(RunBnnacTest, KuhnImproves) {
  const GameTree t = BuildKuhn();
  const BnnacRun run = RunBnnac(t, BnnacConfig{}, NoiseSpec{}, 3000, 1, 1000);
  EXPECT_LT(run.readings.back().nash_conv, run.readings.front().nash_conv);
}

}  // namespace
}  // namespace bnnlab
