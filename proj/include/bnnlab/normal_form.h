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

#ifndef BNNLAB_NORMAL_FORM_H_
#define BNNLAB_NORMAL_FORM_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnnlab/schedule.h"

namespace bnnlab {

using Strategy = std::vector<double>;

// Two-player zero-sum game in normal form. Only player one's payoffs are
// stored; player two's payoff is always the negation.
class NormalFormGame {
 public:
  // `payoff` is row-major: payoff[a1 * cols + a2] = u_1(a1, a2).
  NormalFormGame(int rows, int cols, std::vector<double> payoff);

  int NumActions(Player player) const {
    return player == kPlayerOne ? rows_ : cols_;
  }
  double Payoff(Player player, int a1, int a2) const {
    const double u = payoff_[static_cast<std::size_t>(a1) * cols_ + a2];
    return player == kPlayerOne ? u : -u;
  }
  // Largest absolute payoff.
  double u_max() const { return u_max_; }
  std::span<const double> payoff_matrix() const { return payoff_; }

  // Same game with every payoff multiplied by c.
  NormalFormGame Scaled(double c) const;

 private:
  int rows_;
  int cols_;
  std::vector<double> payoff_;
  double u_max_ = 0.0;
};

// One mixed strategy per player.
struct MixedProfile {
  std::array<Strategy, kNumPlayers> strategies;

  const Strategy& operator[](Player p) const { return strategies[p]; }
  Strategy& operator[](Player p) { return strategies[p]; }
  bool operator==(const MixedProfile&) const = default;
};

bool IsValidSimplex(std::span<const double> p, double tol = 1e-12);

// Throws ShapeError unless both strategies are valid simplices with the
// game's dimensions.
void CheckProfile(const NormalFormGame& game, const MixedProfile& profile);

MixedProfile UniformProfile(const NormalFormGame& game);

double ExpectedPayoff(const NormalFormGame& game, const MixedProfile& profile,
                      Player player);

// u_i(a) against the opponent's mixed strategy, for every a in A_i.
std::vector<double> ActionPayoffs(const NormalFormGame& game,
                                  const MixedProfile& profile, Player player);

// u_i(a) - u_i(pi). The pi_i-weighted mean of the result is zero.
std::vector<double> Advantages(const NormalFormGame& game,
                               const MixedProfile& profile, Player player);

// Sum over players of the best-response gain. Zero exactly at equilibria.
double NashConv(const NormalFormGame& game, const MixedProfile& profile);

// Weighted rock-paper-scissors. Actions are ordered Rock, Paper, Scissors
// (and W when with_fourth_action is set). The winner of each matchup gets
// the matchup weight from the loser:
//   a_rp: Paper beats Rock,  a_ps: Scissors beats Paper,
//   a_sr: Rock beats Scissors.
// The interior equilibrium is (a_ps, a_sr, a_rp) / (a_rp + a_ps + a_sr).
// W scores zero against everything.
struct RpsParams {
  double a_rp = 1.0;
  double a_ps = 1.0;
  double a_sr = 1.0;
  bool with_fourth_action = false;

  bool operator==(const RpsParams&) const = default;
};

RpsParams Interpolate(const RpsParams& from, const RpsParams& to, double w);

NormalFormGame BuildRps(const RpsParams& params);

using ParamSchedule = StagedSchedule<RpsParams>;

// The instantaneous game at iteration t.
NormalFormGame GameAt(const ParamSchedule& schedule, std::int64_t t);

// "rps" -> (1, 1, 1); "brps" -> (12, 1, 1); "brps_w" -> (12, 1, 1) plus W.
RpsParams NamedRpsParams(std::string_view name);
bool IsNormalFormGameName(std::string_view name);

}  // namespace bnnlab

#endif  // BNNLAB_NORMAL_FORM_H_
