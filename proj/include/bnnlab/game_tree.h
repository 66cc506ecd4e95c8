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

#ifndef BNNLAB_GAME_TREE_H_
#define BNNLAB_GAME_TREE_H_

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bnnlab/normal_form.h"
#include "bnnlab/random.h"

namespace bnnlab {

inline constexpr Player kChance = -1;
inline constexpr Player kTerminal = -2;

struct TreeNode {
  int parent = -1;
  int parent_action = -1;  // index into the parent's action list
  Player actor = kTerminal;
  std::vector<std::string> actions;
  std::vector<int> children;
  std::vector<double> chance_probs;  // chance nodes only
  double payoff = 0.0;               // u_1 at terminals; u_2 = -u_1
  int infoset = -1;                  // decision nodes only
};

struct Infoset {
  std::string key;
  Player player = kPlayerOne;
  std::vector<std::string> actions;
  std::vector<int> nodes;
  // The owner's previous decision on any path into this infoset, or -1 at
  // the owner's first decision. Well defined because of perfect recall.
  int parent_infoset = -1;
  int parent_action = -1;
  int sequence_length = 0;
};

// Finite two-player zero-sum game tree with chance and imperfect
// information. Nodes are stored so that every parent precedes its children.
class GameTree {
 public:
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const TreeNode& node(int h) const { return nodes_[h]; }
  static constexpr int root() { return 0; }

  int num_infosets() const { return static_cast<int>(infosets_.size()); }
  const Infoset& infoset(int id) const { return infosets_[id]; }
  std::span<const int> infosets_of(Player p) const { return player_infosets_[p]; }
  int num_actions(int infoset_id) const {
    return static_cast<int>(infosets_[infoset_id].actions.size());
  }
  // -1 when absent.
  int FindInfoset(std::string_view key) const;

  int num_terminals() const;
  int num_decision_nodes() const;
  int num_chance_nodes() const;
  double max_abs_payoff() const { return max_abs_payoff_; }

  // One node per line: id parent actor action infoset_key payoff.
  std::string Dump() const;

 private:
  friend class GameTreeBuilder;

  std::vector<TreeNode> nodes_;
  std::vector<Infoset> infosets_;
  std::array<std::vector<int>, kNumPlayers> player_infosets_;
  std::unordered_map<std::string, int> infoset_index_;
  double max_abs_payoff_ = 0.0;
};

// Builds a GameTree top-down. Pass parent = -1 for the root. For children of
// chance nodes `prob` is the edge probability; otherwise it is ignored.
// Build() checks the structure and throws ConfigError on violations of
// perfect recall, bad chance distributions or dangling nodes.
class GameTreeBuilder {
 public:
  int AddDecision(int parent, std::string_view action, Player player,
                  std::string infoset_key, double prob = 1.0);
  int AddChance(int parent, std::string_view action, double prob = 1.0);
  int AddTerminal(int parent, std::string_view action, double payoff,
                  double prob = 1.0);

  GameTree Build() &&;

 private:
  int Add(int parent, std::string_view action, double prob, TreeNode node);

  GameTree tree_;
  std::vector<std::string> pending_keys_;
};

// Behaviour strategies for both players, one simplex per infoset.
struct BehaviorProfile {
  std::vector<Strategy> policies;

  const Strategy& operator[](int infoset) const { return policies[infoset]; }
  Strategy& operator[](int infoset) { return policies[infoset]; }
  bool operator==(const BehaviorProfile&) const = default;
};

BehaviorProfile UniformBehavior(const GameTree& tree);
// Every action gets probability at least 0.1 / |A(x)|.
BehaviorProfile RandomInteriorBehavior(const GameTree& tree, Rng& rng);

// Throws ConfigError if an infoset has no policy or a malformed one.
void CheckBehavior(const GameTree& tree, const BehaviorProfile& profile);

// Reach probabilities, split by contributor.
struct ReachTable {
  // Per node: player one's, player two's and chance's contributions.
  std::vector<std::array<double, 3>> contribution;
  // Per infoset: external reach of its owner, summed over member histories.
  std::vector<double> infoset_external;

  double Total(int h) const {
    const auto& c = contribution[h];
    return c[0] * c[1] * c[2];
  }
  double Own(int h, Player p) const { return contribution[h][p]; }
  double Chance(int h) const { return contribution[h][2]; }
  // Opponent times chance.
  double External(int h, Player p) const {
    return contribution[h][Opponent(p)] * contribution[h][2];
  }
};

ReachTable ComputeReach(const GameTree& tree, const BehaviorProfile& profile);

// Counterfactual values from each infoset owner's perspective.
//   action_values[x][a] = sum_{h in x} rho_-i(h) * E[u_i | h, a]
//   values[x]           = sum_a pi(a|x) * action_values[x][a]
//   advantages[x][a]    = (action_values[x][a] - values[x]) / rho_-i(x),
//                         or 0 when rho_-i(x) <= 1e-12.
// The advantages are therefore conditional on reaching x.
struct CfValueTable {
  std::vector<std::vector<double>> action_values;
  std::vector<double> values;
  std::vector<std::vector<double>> advantages;
  std::vector<double> external_reach;
};

inline constexpr double kMinExternalReach = 1e-12;

CfValueTable ComputeCfValues(const GameTree& tree,
                             const BehaviorProfile& profile,
                             const ReachTable& reach);
CfValueTable ComputeCfValues(const GameTree& tree,
                             const BehaviorProfile& profile);

// Expected u_1 of the subtree rooted at every node.
std::vector<double> NodeValues(const GameTree& tree,
                               const BehaviorProfile& profile);

// Expected payoff of `player` under the profile.
double ExpectedValue(const GameTree& tree, const BehaviorProfile& profile,
                     Player player);

// Value of the exact best response of `player` against the opponent's
// behaviour strategy in `profile`.
double BestResponseValue(const GameTree& tree, const BehaviorProfile& profile,
                         Player player);

double NashConvEfg(const GameTree& tree, const BehaviorProfile& profile);

struct InfosetPotential {
  Player player = kPlayerOne;
  double gamma = 0.0;  // 1/2 || rho_-i(x) [A(x, .)]_+ ||^2
  double s_mass = 0.0;  // sum_a rho_-i(x) [A(x, a)]_+
};

struct EfgPotential {
  double v = 0.0;
  std::vector<InfosetPotential> per_infoset;  // indexed by infoset id

  double PlayerSum(Player p) const;
  double TotalSMass() const;
};

EfgPotential ComputeEfgPotential(const GameTree& tree,
                                 const BehaviorProfile& profile);
EfgPotential ComputeEfgPotential(const GameTree& tree,
                                 const CfValueTable& cf);

// Smallest rho_-i(x) over all infosets.
double MinExternalReach(const ReachTable& reach);

// Kuhn poker with three cards. Ante 1, a bet adds bet_size; bet_size may be
// negative, in which case the same tree is built and the signed amount is
// transferred at showdown. 55 nodes: one chance root, 24 decision nodes and
// 30 terminals; 12 infosets.
GameTree BuildKuhn(double bet_size = 1.0);

// Leduc hold'em with six cards (three ranks, two suits). Ante 1, raises of 2
// in the first round and 4 in the second, at most two raises per round.
// Infosets are keyed by card rank, so suit-isomorphic histories share one.
GameTree BuildLeduc();

bool IsExtensiveFormGameName(std::string_view name);

}  // namespace bnnlab

#endif  // BNNLAB_GAME_TREE_H_
