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

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "bnnlab/errors.h"
#include "bnnlab/game_tree.h"

namespace bnnlab {
namespace {

constexpr std::array<char, 3> kRankNames = {'J', 'Q', 'K'};

std::string InfosetKey(Player player, char private_card,
                       std::string_view public_card,
                       std::string_view history) {
  std::string key = "p";
  key += static_cast<char>('1' + player);
  key += '|';
  key += private_card;
  key += '|';
  key += public_card;
  key += '|';
  key += history;
  return key;
}

// ---------------------------------------------------------------------------
// Kuhn

void AddKuhnBetting(GameTreeBuilder& b, int root, std::string_view deal_label,
                    std::array<int, 2> ranks, double bet) {
  const double win = ranks[0] > ranks[1] ? 1.0 : -1.0;
  auto key = [&](Player p, std::string_view history) {
    return InfosetKey(p, kRankNames[ranks[p]], "", history);
  };
  const int first = b.AddDecision(root, deal_label, kPlayerOne,
                                  key(kPlayerOne, ""), 1.0 / 6.0);
  // check
  const int checked = b.AddDecision(first, "c", kPlayerTwo, key(kPlayerTwo, "c"));
  b.AddTerminal(checked, "c", win);
  const int check_bet =
      b.AddDecision(checked, "b", kPlayerOne, key(kPlayerOne, "cb"));
  b.AddTerminal(check_bet, "f", -1.0);
  b.AddTerminal(check_bet, "c", win * (1.0 + bet));
  // bet
  const int bet_node = b.AddDecision(first, "b", kPlayerTwo, key(kPlayerTwo, "b"));
  b.AddTerminal(bet_node, "f", 1.0);
  b.AddTerminal(bet_node, "c", win * (1.0 + bet));
}

// ---------------------------------------------------------------------------
// Leduc

constexpr int kLeducCards = 6;
constexpr int kLeducMaxRaises = 2;
constexpr std::array<double, 2> kLeducRaise = {2.0, 4.0};

int LeducRank(int card) { return card / 2; }

struct LeducState {
  std::array<int, 2> cards{};
  int public_card = -1;
  int round = 0;
  std::array<double, 2> contributed = {1.0, 1.0};
  Player to_act = kPlayerOne;
  int raises = 0;
  int actions_this_round = 0;
  std::string history;  // rounds separated by '/'
};

double LeducShowdown(const LeducState& s) {
  const int pub = LeducRank(s.public_card);
  const std::array<int, 2> r = {LeducRank(s.cards[0]), LeducRank(s.cards[1])};
  // A pair with the public card beats everything; otherwise high card.
  auto strength = [&](int rank) { return rank == pub ? 10 + rank : rank; };
  const int s1 = strength(r[0]);
  const int s2 = strength(r[1]);
  if (s1 == s2) return 0.0;
  return s1 > s2 ? s.contributed[1] : -s.contributed[0];
}

class LeducBuilder {
 public:
  GameTree Build() && {
    const int root = b_.AddChance(-1, "");
    for (int c1 = 0; c1 < kLeducCards; ++c1) {
      for (int c2 = 0; c2 < kLeducCards; ++c2) {
        if (c1 == c2) continue;
        LeducState s;
        s.cards = {c1, c2};
        std::string label = std::to_string(c1) + std::to_string(c2);
        AddDecisionNode(root, label, s, 1.0 / (kLeducCards * (kLeducCards - 1)));
      }
    }
    return std::move(b_).Build();
  }

 private:
  std::string Key(const LeducState& s) const {
    const std::string pub =
        s.public_card < 0 ? "" : std::string(1, kRankNames[LeducRank(s.public_card)]);
    return InfosetKey(s.to_act, kRankNames[LeducRank(s.cards[s.to_act])], pub,
                      s.history);
  }

  void AddDecisionNode(int parent, std::string_view label, const LeducState& s,
                       double prob) {
    const int node = b_.AddDecision(parent, label, s.to_act, Key(s), prob);
    const Player me = s.to_act;
    const Player other = Opponent(me);
    const bool facing_bet = s.contributed[other] > s.contributed[me];

    if (facing_bet) {
      // Fold: the opponent takes what the folder has put in.
      b_.AddTerminal(node, "f",
                     me == kPlayerOne ? -s.contributed[0] : s.contributed[1]);
    }
    // Check or call.
    {
      LeducState next = s;
      next.contributed[me] = s.contributed[other];
      next.history += 'c';
      ++next.actions_this_round;
      const bool round_over = facing_bet || next.actions_this_round >= 2;
      if (!round_over) {
        next.to_act = other;
        AddDecisionNode(node, "c", next, 1.0);
      } else if (s.round == 0) {
        AddPublicCard(node, next);
      } else {
        b_.AddTerminal(node, "c", LeducShowdown(next));
      }
    }
    if (s.raises < kLeducMaxRaises) {
      LeducState next = s;
      next.contributed[me] = s.contributed[other] + kLeducRaise[s.round];
      next.history += 'r';
      ++next.raises;
      ++next.actions_this_round;
      next.to_act = other;
      AddDecisionNode(node, "r", next, 1.0);
    }
  }

  void AddPublicCard(int parent, const LeducState& s) {
    const int chance = b_.AddChance(parent, "c");
    for (int card = 0; card < kLeducCards; ++card) {
      if (card == s.cards[0] || card == s.cards[1]) continue;
      LeducState next = s;
      next.public_card = card;
      next.round = 1;
      next.raises = 0;
      next.actions_this_round = 0;
      next.to_act = kPlayerOne;
      next.history += '/';
      AddDecisionNode(chance, std::to_string(card), next, 1.0 / 4.0);
    }
  }

  GameTreeBuilder b_;
};

}  // namespace

GameTree BuildKuhn(double bet_size) {
  if (!std::isfinite(bet_size)) throw ConfigError("bet size must be finite");
  GameTreeBuilder b;
  const int root = b.AddChance(-1, "");
  for (int c1 = 0; c1 < 3; ++c1) {
    for (int c2 = 0; c2 < 3; ++c2) {
      if (c1 == c2) continue;
      const std::string label{kRankNames[c1], kRankNames[c2]};
      AddKuhnBetting(b, root, label, {c1, c2}, bet_size);
    }
  }
  return std::move(b).Build();
}

GameTree BuildLeduc() { return LeducBuilder().Build(); }

}  // namespace bnnlab
