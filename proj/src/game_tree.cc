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

#include "bnnlab/game_tree.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "bnnlab/errors.h"

namespace bnnlab {

int GameTree::FindInfoset(std::string_view key) const {
  auto it = infoset_index_.find(std::string(key));
  return it == infoset_index_.end() ? -1 : it->second;
}

int GameTree::num_terminals() const {
  return static_cast<int>(std::count_if(
      nodes_.begin(), nodes_.end(),
      [](const TreeNode& n) { return n.actor == kTerminal; }));
}

int GameTree::num_decision_nodes() const {
  return static_cast<int>(std::count_if(
      nodes_.begin(), nodes_.end(),
      [](const TreeNode& n) { return n.actor >= 0; }));
}

int GameTree::num_chance_nodes() const {
  return static_cast<int>(std::count_if(
      nodes_.begin(), nodes_.end(),
      [](const TreeNode& n) { return n.actor == kChance; }));
}

std::string GameTree::Dump() const {
  std::ostringstream out;
  out.precision(17);
  for (int h = 0; h < num_nodes(); ++h) {
    const TreeNode& n = nodes_[h];
    out << h << ' ' << n.parent << ' ';
    switch (n.actor) {
      case kChance:
        out << "chance";
        break;
      case kTerminal:
        out << "terminal";
        break;
      default:
        out << "p" << n.actor + 1;
    }
    out << ' '
        << (n.parent < 0 ? std::string("-")
                         : nodes_[n.parent].actions[n.parent_action])
        << ' ' << (n.infoset < 0 ? std::string("-") : infosets_[n.infoset].key)
        << ' ' << n.payoff << '\n';
  }
  return out.str();
}

int GameTreeBuilder::Add(int parent, std::string_view action, double prob,
                         TreeNode node) {
  const int id = static_cast<int>(tree_.nodes_.size());
  if (parent < 0) {
    if (id != 0) throw ConfigError("game tree already has a root");
  } else {
    if (parent >= id) throw ConfigError("unknown parent node");
    TreeNode& p = tree_.nodes_[parent];
    if (p.actor == kTerminal) {
      throw ConfigError("terminal node cannot have children");
    }
    node.parent = parent;
    node.parent_action = static_cast<int>(p.children.size());
    p.children.push_back(id);
    p.actions.emplace_back(action);
    if (p.actor == kChance) p.chance_probs.push_back(prob);
  }
  tree_.nodes_.push_back(std::move(node));
  pending_keys_.emplace_back();
  return id;
}

int GameTreeBuilder::AddDecision(int parent, std::string_view action,
                                 Player player, std::string infoset_key,
                                 double prob) {
  if (player != kPlayerOne && player != kPlayerTwo) {
    throw ConfigError("decision nodes belong to player 1 or 2");
  }
  TreeNode node;
  node.actor = player;
  const int id = Add(parent, action, prob, std::move(node));
  pending_keys_[id] = std::move(infoset_key);
  return id;
}

int GameTreeBuilder::AddChance(int parent, std::string_view action,
                               double prob) {
  TreeNode node;
  node.actor = kChance;
  return Add(parent, action, prob, std::move(node));
}

int GameTreeBuilder::AddTerminal(int parent, std::string_view action,
                                 double payoff, double prob) {
  if (!std::isfinite(payoff)) throw ConfigError("non-finite terminal payoff");
  TreeNode node;
  node.actor = kTerminal;
  node.payoff = payoff;
  return Add(parent, action, prob, std::move(node));
}

GameTree GameTreeBuilder::Build() && {
  GameTree& tree = tree_;
  if (tree.nodes_.empty()) throw ConfigError("empty game tree");

  // The owner's most recent (infoset, action) strictly above each node.
  std::vector<std::array<std::pair<int, int>, kNumPlayers>> last(
      tree.nodes_.size());
  for (int h = 0; h < tree.num_nodes(); ++h) {
    TreeNode& n = tree.nodes_[h];
    if (n.actor != kTerminal && n.children.empty()) {
      throw ConfigError("node " + std::to_string(h) + " has no actions");
    }
    if (n.actor == kChance) {
      double sum = 0.0;
      for (double p : n.chance_probs) {
        if (!(p >= 0.0)) throw ConfigError("negative chance probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("chance probabilities at node " + std::to_string(h) +
                          " sum to " + std::to_string(sum));
      }
    }
    if (n.actor == kTerminal) {
      tree.max_abs_payoff_ = std::max(tree.max_abs_payoff_, std::abs(n.payoff));
    }
    if (n.parent >= 0) {
      last[h] = last[n.parent];
      const TreeNode& p = tree.nodes_[n.parent];
      if (p.actor >= 0) last[h][p.actor] = {p.infoset, n.parent_action};
    } else {
      last[h].fill({-1, -1});
    }
    if (n.actor < 0) continue;

    const std::string& key = pending_keys_[h];
    auto [it, inserted] = tree.infoset_index_.try_emplace(
        key, static_cast<int>(tree.infosets_.size()));
    if (inserted) {
      Infoset info;
      info.key = key;
      info.player = n.actor;
      info.actions = n.actions;
      info.parent_infoset = last[h][n.actor].first;
      info.parent_action = last[h][n.actor].second;
      info.sequence_length =
          info.parent_infoset < 0
              ? 0
              : tree.infosets_[info.parent_infoset].sequence_length + 1;
      tree.infosets_.push_back(std::move(info));
      tree.player_infosets_[n.actor].push_back(it->second);
    }
    Infoset& info = tree.infosets_[it->second];
    if (info.player != n.actor) {
      throw ConfigError("infoset '" + key + "' mixes owners");
    }
    if (info.actions != n.actions) {
      throw ConfigError("infoset '" + key + "' has inconsistent actions");
    }
    if (info.parent_infoset != last[h][n.actor].first ||
        info.parent_action != last[h][n.actor].second) {
      throw ConfigError("perfect recall violated at infoset '" + key + "'");
    }
    info.nodes.push_back(h);
    n.infoset = it->second;
  }
  return std::move(tree_);
}

BehaviorProfile UniformBehavior(const GameTree& tree) {
  BehaviorProfile profile;
  profile.policies.resize(tree.num_infosets());
  for (int x = 0; x < tree.num_infosets(); ++x) {
    const int n = tree.num_actions(x);
    profile[x].assign(n, 1.0 / n);
  }
  return profile;
}

BehaviorProfile RandomInteriorBehavior(const GameTree& tree, Rng& rng) {
  BehaviorProfile profile;
  profile.policies.resize(tree.num_infosets());
  for (int x = 0; x < tree.num_infosets(); ++x) {
    profile[x] = RandomInteriorSimplex(tree.num_actions(x), rng);
  }
  return profile;
}

void CheckBehavior(const GameTree& tree, const BehaviorProfile& profile) {
  if (static_cast<int>(profile.policies.size()) != tree.num_infosets()) {
    throw ConfigError("behaviour profile covers " +
                      std::to_string(profile.policies.size()) + " of " +
                      std::to_string(tree.num_infosets()) + " infosets");
  }
  for (int x = 0; x < tree.num_infosets(); ++x) {
    if (static_cast<int>(profile[x].size()) != tree.num_actions(x) ||
        !IsValidSimplex(profile[x], 1e-9)) {
      throw ConfigError("malformed policy at infoset '" +
                        tree.infoset(x).key + "'");
    }
  }
}

ReachTable ComputeReach(const GameTree& tree, const BehaviorProfile& profile) {
  CheckBehavior(tree, profile);
  ReachTable reach;
  reach.contribution.resize(tree.num_nodes());
  reach.contribution[GameTree::root()] = {1.0, 1.0, 1.0};
  for (int h = 1; h < tree.num_nodes(); ++h) {
    const TreeNode& n = tree.node(h);
    const TreeNode& p = tree.node(n.parent);
    auto c = reach.contribution[n.parent];
    if (p.actor == kChance) {
      c[2] *= p.chance_probs[n.parent_action];
    } else {
      c[p.actor] *= profile[p.infoset][n.parent_action];
    }
    reach.contribution[h] = c;
  }
  reach.infoset_external.assign(tree.num_infosets(), 0.0);
  for (int x = 0; x < tree.num_infosets(); ++x) {
    const Infoset& info = tree.infoset(x);
    for (int h : info.nodes) {
      reach.infoset_external[x] += reach.External(h, info.player);
    }
  }
  return reach;
}

std::vector<double> NodeValues(const GameTree& tree,
                               const BehaviorProfile& profile) {
  std::vector<double> value(tree.num_nodes(), 0.0);
  for (int h = tree.num_nodes() - 1; h >= 0; --h) {
    const TreeNode& n = tree.node(h);
    if (n.actor == kTerminal) {
      value[h] = n.payoff;
      continue;
    }
    const std::span<const double> probs =
        n.actor == kChance ? std::span<const double>(n.chance_probs)
                           : std::span<const double>(profile[n.infoset]);
    double v = 0.0;
    for (std::size_t a = 0; a < n.children.size(); ++a) {
      v += probs[a] * value[n.children[a]];
    }
    value[h] = v;
  }
  return value;
}

CfValueTable ComputeCfValues(const GameTree& tree,
                             const BehaviorProfile& profile,
                             const ReachTable& reach) {
  const std::vector<double> value = NodeValues(tree, profile);
  CfValueTable cf;
  const int num_infosets = tree.num_infosets();
  cf.action_values.resize(num_infosets);
  cf.values.assign(num_infosets, 0.0);
  cf.advantages.resize(num_infosets);
  cf.external_reach = reach.infoset_external;
  for (int x = 0; x < num_infosets; ++x) {
    const Infoset& info = tree.infoset(x);
    const double sign = info.player == kPlayerOne ? 1.0 : -1.0;
    const int num_actions = tree.num_actions(x);
    std::vector<double>& q = cf.action_values[x];
    q.assign(num_actions, 0.0);
    for (int h : info.nodes) {
      const double ext = reach.External(h, info.player);
      const TreeNode& n = tree.node(h);
      for (int a = 0; a < num_actions; ++a) {
        q[a] += ext * sign * value[n.children[a]];
      }
    }
    double v = 0.0;
    for (int a = 0; a < num_actions; ++a) v += profile[x][a] * q[a];
    cf.values[x] = v;
    std::vector<double>& adv = cf.advantages[x];
    adv.assign(num_actions, 0.0);
    const double ext = cf.external_reach[x];
    if (ext > kMinExternalReach) {
      for (int a = 0; a < num_actions; ++a) adv[a] = (q[a] - v) / ext;
    }
  }
  return cf;
}

CfValueTable ComputeCfValues(const GameTree& tree,
                             const BehaviorProfile& profile) {
  return ComputeCfValues(tree, profile, ComputeReach(tree, profile));
}

double ExpectedValue(const GameTree& tree, const BehaviorProfile& profile,
                     Player player) {
  CheckBehavior(tree, profile);
  const double v = NodeValues(tree, profile)[GameTree::root()];
  return player == kPlayerOne ? v : -v;
}

namespace {

// Best response by backward induction over the responder's infosets, deepest
// owner sequences first. Perfect recall guarantees that every responder
// infoset below x has a strictly longer sequence, so its action is already
// fixed when x is decided and memoised subtree values stay valid.
class BestResponder {
 public:
  BestResponder(const GameTree& tree, const BehaviorProfile& profile,
                Player player)
      : tree_(tree),
        profile_(profile),
        player_(player),
        reach_(ComputeReach(tree, profile)),
        memo_(tree.num_nodes(), std::numeric_limits<double>::quiet_NaN()),
        choice_(tree.num_infosets(), -1) {}

  double Solve() {
    std::vector<int> order(tree_.infosets_of(player_).begin(),
                           tree_.infosets_of(player_).end());
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return tree_.infoset(a).sequence_length >
             tree_.infoset(b).sequence_length;
    });
    for (int x : order) {
      const Infoset& info = tree_.infoset(x);
      const int num_actions = tree_.num_actions(x);
      int best = 0;
      double best_value = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < num_actions; ++a) {
        double q = 0.0;
        for (int h : info.nodes) {
          q += reach_.External(h, player_) *
               Value(tree_.node(h).children[a]);
        }
        if (q > best_value) {
          best_value = q;
          best = a;
        }
      }
      choice_[x] = best;
    }
    return Value(GameTree::root());
  }

 private:
  double Value(int h) {
    if (!std::isnan(memo_[h])) return memo_[h];
    const TreeNode& n = tree_.node(h);
    double v = 0.0;
    if (n.actor == kTerminal) {
      v = player_ == kPlayerOne ? n.payoff : -n.payoff;
    } else if (n.actor == player_) {
      v = Value(n.children[choice_[n.infoset]]);
    } else {
      const std::span<const double> probs =
          n.actor == kChance ? std::span<const double>(n.chance_probs)
                             : std::span<const double>(profile_[n.infoset]);
      for (std::size_t a = 0; a < n.children.size(); ++a) {
        if (probs[a] == 0.0) continue;
        v += probs[a] * Value(n.children[a]);
      }
    }
    memo_[h] = v;
    return v;
  }

  const GameTree& tree_;
  const BehaviorProfile& profile_;
  Player player_;
  ReachTable reach_;
  std::vector<double> memo_;
  std::vector<int> choice_;
};

}  // namespace

double BestResponseValue(const GameTree& tree, const BehaviorProfile& profile,
                         Player player) {
  return BestResponder(tree, profile, player).Solve();
}

double NashConvEfg(const GameTree& tree, const BehaviorProfile& profile) {
  const double v1 = ExpectedValue(tree, profile, kPlayerOne);
  const double gain1 = BestResponseValue(tree, profile, kPlayerOne) - v1;
  const double gain2 = BestResponseValue(tree, profile, kPlayerTwo) + v1;
  return std::max(0.0, gain1) + std::max(0.0, gain2);
}

double EfgPotential::PlayerSum(Player p) const {
  double sum = 0.0;
  for (const InfosetPotential& x : per_infoset) {
    if (x.player == p) sum += x.gamma;
  }
  return sum;
}

double EfgPotential::TotalSMass() const {
  double sum = 0.0;
  for (const InfosetPotential& x : per_infoset) sum += x.s_mass;
  return sum;
}

EfgPotential ComputeEfgPotential(const GameTree& tree, const CfValueTable& cf) {
  EfgPotential potential;
  potential.per_infoset.resize(tree.num_infosets());
  for (int x = 0; x < tree.num_infosets(); ++x) {
    InfosetPotential& entry = potential.per_infoset[x];
    entry.player = tree.infoset(x).player;
    const double ext = cf.external_reach[x];
    for (double adv : cf.advantages[x]) {
      const double r = ext * std::max(0.0, adv);
      entry.gamma += 0.5 * r * r;
      entry.s_mass += r;
    }
    potential.v += entry.gamma;
  }
  return potential;
}

EfgPotential ComputeEfgPotential(const GameTree& tree,
                                 const BehaviorProfile& profile) {
  return ComputeEfgPotential(tree, ComputeCfValues(tree, profile));
}

double MinExternalReach(const ReachTable& reach) {
  if (reach.infoset_external.empty()) return 0.0;
  return *std::min_element(reach.infoset_external.begin(),
                           reach.infoset_external.end());
}

bool IsExtensiveFormGameName(std::string_view name) {
  return name == "kuhn" || name == "leduc";
}

}  // namespace bnnlab
