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

#ifndef BNNLAB_BNNAC_H_
#define BNNLAB_BNNAC_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bnnlab/dynamics.h"
#include "bnnlab/game_tree.h"
#include "bnnlab/lyapunov.h"
#include "bnnlab/random.h"

namespace bnnlab {

// Actor-critic realisation of the reach-weighted BNN dynamics with tabular
// actor logits, payoff critic and external-reach estimator. Each player runs
// an independent BnnacLearner; the learners only ever see sampled
// trajectories, never each other's tables.

struct BnnacConfig {
  int k_actor = 10;       // iterations between actor updates
  int batch = 16;         // trajectories per iteration
  double alpha = 0.1;     // critic step
  double beta = 0.1;      // reach-estimator step
  StepSchedule eta;       // actor step
  double policy_floor = 1e-3;
  // Replace the critic and reach tables by their exact values every
  // iteration instead of learning them from samples.
  bool oracle_tables = false;

  void Validate() const;
};

// One decision on a sampled trajectory.
struct Visit {
  int infoset = -1;
  int action = -1;
  Player player = kPlayerOne;
  double payoff = 0.0;  // terminal payoff to the owner, plus any noise
};

struct Trajectory {
  std::vector<Visit> visits;
  double terminal_payoff = 0.0;  // u_1
};

using Dataset = std::vector<Trajectory>;

// Samples `batch` full trajectories. Every visit is credited with the
// owner's terminal payoff plus one draw from `noise`.
Dataset Collect(const GameTree& tree, const BehaviorProfile& joint_policy,
                int batch, Rng& rng, NoiseModel* noise = nullptr);

class BnnacLearner {
 public:
  BnnacLearner(const GameTree& tree, Player player, double policy_floor);

  // Switches to a tree with the same shape and infoset numbering, e.g. the
  // same game with different terminal payoffs.
  void SetTree(const GameTree& tree);

  Player player() const { return player_; }

  // softmax(logits) at one of the learner's infosets.
  Strategy Policy(int infoset) const;
  // Writes the learner's policy into its own infosets of `joint`.
  void WritePolicy(BehaviorProfile& joint) const;

  // Moves Q(x, a) towards every observed return at (x, a).
  void UpdateCritic(const Dataset& data, double alpha);
  // Running estimate of rho_-i(x) as the ratio of visit frequency to the
  // learner's own reach probability of x (its visit opportunity):
  //   N(x) <- N(x) + beta (1{x visited} - N(x))
  //   D(x) <- D(x) + beta (rho_i(x) - D(x))
  //   rho_hat(x) = clamp(N(x) / D(x), 0, 1)
  // with one update per trajectory. Both running sums start at zero, so the
  // ratio carries no start-up bias.
  void UpdateReach(const Dataset& data, double beta);

  struct ActorStats {
    int floor_events = 0;
  };
  // Delta L(a|x) = rho_hat(x) [A(x, a)]_+ / max(pi(a|x), floor),
  // L <- L + eta Delta L, then logits are mean-centred per infoset.
  ActorStats UpdateActor(double eta);

  // The logit update direction at x without applying it.
  std::vector<double> LogitDirection(int infoset, int* floor_events = nullptr) const;

  // Sets critic and reach tables to the exact values for `cf`.
  void LoadOracleTables(const CfValueTable& cf);

  std::span<const double> logits(int infoset) const { return logits_[infoset]; }
  std::span<const double> critic(int infoset) const { return critic_[infoset]; }
  double reach(int infoset) const;
  std::int64_t critic_visits(int infoset, int action) const {
    return visits_[infoset][action];
  }

  void set_logits(int infoset, std::vector<double> logits);
  void set_critic(int infoset, std::vector<double> values);

  // Own reach of every own infoset under the current policy.
  std::vector<double> OwnReach() const;

 private:
  const GameTree* tree_;
  Player player_;
  double policy_floor_;
  std::vector<std::vector<double>> logits_;
  std::vector<std::vector<double>> critic_;
  std::vector<std::vector<std::int64_t>> visits_;
  std::vector<double> visit_rate_;
  std::vector<double> opportunity_;
  std::vector<double> oracle_reach_;  // negative when unset
};

class BnnacTrainer {
 public:
  BnnacTrainer(const GameTree& tree, BnnacConfig config, NoiseSpec noise,
               std::uint64_t seed);

  // See BnnacLearner::SetTree.
  void SetTree(const GameTree& tree);

  // Starts both learners at the given interior policy.
  void SetPolicy(const BehaviorProfile& profile);

  // One iteration: collect, critic and reach updates, and an actor update
  // when t mod K == 0.
  void Iterate();

  // Restarts the actor step-size schedule from its first entry.
  void ResetStepClock() { clock_start_ = t_; }

  std::int64_t iteration() const { return t_; }
  BehaviorProfile JointPolicy() const;
  const BnnacLearner& learner(Player p) const { return learners_[p]; }
  BnnacLearner& mutable_learner(Player p) { return learners_[p]; }
  std::int64_t floor_events() const { return floor_events_; }
  double last_eta() const { return last_eta_; }

 private:
  const GameTree* tree_;
  BnnacConfig config_;
  NoiseModel noise_;
  Rng sampler_;
  std::array<BnnacLearner, kNumPlayers> learners_;
  std::int64_t t_ = 0;
  std::int64_t clock_start_ = 0;
  std::int64_t floor_events_ = 0;
  double last_eta_ = 0.0;
};

struct BnnacRun {
  std::vector<LyapunovReading> readings;
  BehaviorProfile final_policy;
  std::int64_t floor_events = 0;
};

BnnacRun RunBnnac(const GameTree& tree, const BnnacConfig& config,
                  NoiseSpec noise, std::int64_t iterations, std::uint64_t seed,
                  std::int64_t eval_interval = 50);

Strategy Softmax(std::span<const double> logits);

}  // namespace bnnlab

#endif  // BNNLAB_BNNAC_H_
