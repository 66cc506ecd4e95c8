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

#include "bnnlab/bnnac.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bnnlab/errors.h"

namespace bnnlab {
namespace {

int SampleIndex(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cumulative = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    cumulative += probs[a];
    if (u < cumulative) return static_cast<int>(a);
  }
  // Rounding: fall back to the last action with positive mass.
  for (std::size_t a = probs.size(); a-- > 0;) {
    if (probs[a] > 0.0) return static_cast<int>(a);
  }
  return 0;
}

void MeanCenter(std::vector<double>& v) {
  const double mean =
      std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

constexpr std::uint64_t kNoiseStreamSalt = 0x9e3779b97f4a7c15ULL;

}  // namespace

Strategy Softmax(std::span<const double> logits) {
  const double max = *std::max_element(logits.begin(), logits.end());
  Strategy p(logits.size());
  double sum = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    p[a] = std::exp(logits[a] - max);
    sum += p[a];
  }
  for (double& x : p) x /= sum;
  return p;
}

void BnnacConfig::Validate() const {
  if (k_actor < 1) throw ConfigError("k_actor must be >= 1");
  if (batch < 0) throw ConfigError("batch must be >= 0");
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw ConfigError("critic and reach steps must be positive");
  }
  if (!(policy_floor > 0.0) || policy_floor >= 1.0) {
    throw ConfigError("policy_floor must lie in (0, 1)");
  }
}

Dataset Collect(const GameTree& tree, const BehaviorProfile& joint_policy,
                int batch, Rng& rng, NoiseModel* noise) {
  Dataset data;
  data.reserve(std::max(batch, 0));
  for (int k = 0; k < batch; ++k) {
    Trajectory traj;
    int h = GameTree::root();
    while (tree.node(h).actor != kTerminal) {
      const TreeNode& n = tree.node(h);
      if (n.actor == kChance) {
        h = n.children[SampleIndex(n.chance_probs, rng)];
        continue;
      }
      const int a = SampleIndex(joint_policy[n.infoset], rng);
      traj.visits.push_back({n.infoset, a, n.actor, 0.0});
      h = n.children[a];
    }
    traj.terminal_payoff = tree.node(h).payoff;
    for (Visit& v : traj.visits) {
      v.payoff = v.player == kPlayerOne ? traj.terminal_payoff
                                        : -traj.terminal_payoff;
      if (noise != nullptr) v.payoff += noise->Draw();
    }
    data.push_back(std::move(traj));
  }
  return data;
}

BnnacLearner::BnnacLearner(const GameTree& tree, Player player,
                           double policy_floor)
    : tree_(&tree), player_(player), policy_floor_(policy_floor) {
  const int n = tree.num_infosets();
  logits_.resize(n);
  critic_.resize(n);
  visits_.resize(n);
  visit_rate_.assign(n, 0.0);
  opportunity_.assign(n, 0.0);
  oracle_reach_.assign(n, -1.0);
  for (int x : tree.infosets_of(player)) {
    logits_[x].assign(tree.num_actions(x), 0.0);
    critic_[x].assign(tree.num_actions(x), 0.0);
    visits_[x].assign(tree.num_actions(x), 0);
  }
}

Strategy BnnacLearner::Policy(int infoset) const {
  return Softmax(logits_[infoset]);
}

void BnnacLearner::WritePolicy(BehaviorProfile& joint) const {
  for (int x : tree_->infosets_of(player_)) joint[x] = Policy(x);
}

void BnnacLearner::set_logits(int infoset, std::vector<double> logits) {
  if (logits.size() != logits_[infoset].size()) {
    throw ShapeError("logit vector size mismatch");
  }
  logits_[infoset] = std::move(logits);
}

void BnnacLearner::set_critic(int infoset, std::vector<double> values) {
  if (values.size() != critic_[infoset].size()) {
    throw ShapeError("critic vector size mismatch");
  }
  critic_[infoset] = std::move(values);
}

std::vector<double> BnnacLearner::OwnReach() const {
  std::vector<double> own(tree_->num_infosets(), 0.0);
  // Parents have shorter owner sequences, so sort by sequence length.
  std::vector<int> order(tree_->infosets_of(player_).begin(),
                         tree_->infosets_of(player_).end());
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return tree_->infoset(a).sequence_length < tree_->infoset(b).sequence_length;
  });
  for (int x : order) {
    const Infoset& info = tree_->infoset(x);
    own[x] = info.parent_infoset < 0
                 ? 1.0
                 : own[info.parent_infoset] *
                       Policy(info.parent_infoset)[info.parent_action];
  }
  return own;
}

void BnnacLearner::UpdateCritic(const Dataset& data, double alpha) {
  for (const Trajectory& traj : data) {
    for (const Visit& v : traj.visits) {
      if (v.player != player_) continue;
      double& q = critic_[v.infoset][v.action];
      q += alpha * (v.payoff - q);
      ++visits_[v.infoset][v.action];
    }
  }
}

void BnnacLearner::UpdateReach(const Dataset& data, double beta) {
  if (data.empty()) return;
  const std::vector<double> own = OwnReach();
  std::vector<char> seen(tree_->num_infosets(), 0);
  for (const Trajectory& traj : data) {
    for (const Visit& v : traj.visits) {
      if (v.player == player_) seen[v.infoset] = 1;
    }
    for (int x : tree_->infosets_of(player_)) {
      visit_rate_[x] += beta * ((seen[x] ? 1.0 : 0.0) - visit_rate_[x]);
      opportunity_[x] += beta * (own[x] - opportunity_[x]);
      seen[x] = 0;
    }
  }
  std::fill(oracle_reach_.begin(), oracle_reach_.end(), -1.0);
}

double BnnacLearner::reach(int infoset) const {
  if (oracle_reach_[infoset] >= 0.0) return oracle_reach_[infoset];
  if (opportunity_[infoset] <= 0.0) return 1.0;
  return std::clamp(visit_rate_[infoset] / opportunity_[infoset], 0.0, 1.0);
}

void BnnacLearner::LoadOracleTables(const CfValueTable& cf) {
  for (int x : tree_->infosets_of(player_)) {
    const double ext = cf.external_reach[x];
    oracle_reach_[x] = ext;
    for (std::size_t a = 0; a < critic_[x].size(); ++a) {
      critic_[x][a] =
          ext > kMinExternalReach ? cf.action_values[x][a] / ext : 0.0;
    }
  }
}

std::vector<double> BnnacLearner::LogitDirection(int infoset,
                                                 int* floor_events) const {
  const Strategy pi = Policy(infoset);
  const std::vector<double>& q = critic_[infoset];
  const double mean = std::inner_product(q.begin(), q.end(), pi.begin(), 0.0);
  const double rho = reach(infoset);
  std::vector<double> delta(pi.size(), 0.0);
  for (std::size_t a = 0; a < pi.size(); ++a) {
    const double adv = q[a] - mean;
    if (adv <= 0.0) continue;
    double p = pi[a];
    if (p < policy_floor_) {
      p = policy_floor_;
      if (floor_events != nullptr) ++*floor_events;
    }
    delta[a] = rho * adv / p;
  }
  return delta;
}

BnnacLearner::ActorStats BnnacLearner::UpdateActor(double eta) {
  ActorStats stats;
  for (int x : tree_->infosets_of(player_)) {
    const std::vector<double> delta = LogitDirection(x, &stats.floor_events);
    std::vector<double>& l = logits_[x];
    for (std::size_t a = 0; a < l.size(); ++a) l[a] += eta * delta[a];
    MeanCenter(l);
    for (double v : l) {
      if (!std::isfinite(v)) {
        throw NumericalError("non-finite logit at infoset '" +
                             tree_->infoset(x).key + "'");
      }
    }
  }
  return stats;
}

void BnnacLearner::SetTree(const GameTree& tree) {
  if (tree.num_infosets() != tree_->num_infosets()) {
    throw ShapeError("BnnacLearner::SetTree: infoset count differs");
  }
  tree_ = &tree;
}

BnnacTrainer::BnnacTrainer(const GameTree& tree, BnnacConfig config,
                           NoiseSpec noise, std::uint64_t seed)
    : tree_(&tree),
      config_(config),
      noise_(noise, seed ^ kNoiseStreamSalt),
      sampler_(seed),
      learners_{BnnacLearner(tree, kPlayerOne, config.policy_floor),
                BnnacLearner(tree, kPlayerTwo, config.policy_floor)} {
  config_.Validate();
}

void BnnacTrainer::SetTree(const GameTree& tree) {
  if (tree.num_infosets() != tree_->num_infosets() ||
      tree.num_nodes() != tree_->num_nodes()) {
    throw ShapeError("BnnacTrainer::SetTree: tree shape differs");
  }
  tree_ = &tree;
  for (BnnacLearner& learner : learners_) learner.SetTree(tree);
}

void BnnacTrainer::SetPolicy(const BehaviorProfile& profile) {
  CheckBehavior(*tree_, profile);
  for (Player p = 0; p < kNumPlayers; ++p) {
    for (int x : tree_->infosets_of(p)) {
      std::vector<double> l(profile[x].size());
      for (std::size_t a = 0; a < l.size(); ++a) {
        l[a] = std::log(std::max(profile[x][a], 1e-300));
      }
      MeanCenter(l);
      learners_[p].set_logits(x, std::move(l));
    }
  }
}

BehaviorProfile BnnacTrainer::JointPolicy() const {
  BehaviorProfile joint;
  joint.policies.resize(tree_->num_infosets());
  for (const BnnacLearner& learner : learners_) learner.WritePolicy(joint);
  return joint;
}

void BnnacTrainer::Iterate() {
  const BehaviorProfile joint = JointPolicy();
  if (config_.oracle_tables) {
    const CfValueTable cf = ComputeCfValues(*tree_, joint);
    for (BnnacLearner& learner : learners_) learner.LoadOracleTables(cf);
  } else {
    const Dataset data =
        Collect(*tree_, joint, config_.batch, sampler_, &noise_);
    for (BnnacLearner& learner : learners_) {
      learner.UpdateCritic(data, config_.alpha);
      learner.UpdateReach(data, config_.beta);
    }
  }
  if (t_ % config_.k_actor == 0) {
    last_eta_ = config_.eta.Eta((t_ - clock_start_) / config_.k_actor);
    for (BnnacLearner& learner : learners_) {
      floor_events_ += learner.UpdateActor(last_eta_).floor_events;
    }
  }
  ++t_;
}

BnnacRun RunBnnac(const GameTree& tree, const BnnacConfig& config,
                  NoiseSpec noise, std::int64_t iterations, std::uint64_t seed,
                  std::int64_t eval_interval) {
  BnnacTrainer trainer(tree, config, noise, seed);
  BnnacRun run;
  for (std::int64_t t = 0; t <= iterations; ++t) {
    if (eval_interval > 0 && (t % eval_interval == 0 || t == iterations)) {
      run.readings.push_back(ReadEfg(tree, trainer.JointPolicy(), t));
    }
    if (t < iterations) trainer.Iterate();
  }
  run.final_policy = trainer.JointPolicy();
  run.floor_events = trainer.floor_events();
  return run;
}

}  // namespace bnnlab
