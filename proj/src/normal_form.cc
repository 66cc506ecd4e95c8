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

#include "bnnlab/normal_form.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bnnlab/errors.h"

namespace bnnlab {

std::string ScheduleModeName(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::kStatic:
      return "static";
    case ScheduleMode::kDirect:
      return "direct";
    case ScheduleMode::kContinuous:
      return "continuous";
  }
  return "unknown";
}

NormalFormGame::NormalFormGame(int rows, int cols, std::vector<double> payoff)
    : rows_(rows), cols_(cols), payoff_(std::move(payoff)) {
  if (rows <= 0 || cols <= 0 ||
      payoff_.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("payoff matrix does not match " + std::to_string(rows) +
                     "x" + std::to_string(cols));
  }
  for (double u : payoff_) {
    if (!std::isfinite(u)) throw ConfigError("non-finite payoff entry");
    u_max_ = std::max(u_max_, std::abs(u));
  }
}

NormalFormGame NormalFormGame::Scaled(double c) const {
  std::vector<double> scaled = payoff_;
  for (double& u : scaled) u *= c;
  return NormalFormGame(rows_, cols_, std::move(scaled));
}

bool IsValidSimplex(std::span<const double> p, double tol) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= tol;
}

void CheckProfile(const NormalFormGame& game, const MixedProfile& profile) {
  for (Player p = 0; p < kNumPlayers; ++p) {
    if (static_cast<int>(profile[p].size()) != game.NumActions(p)) {
      throw ShapeError("strategy of player " + std::to_string(p + 1) +
                       " has " + std::to_string(profile[p].size()) +
                       " entries, game has " +
                       std::to_string(game.NumActions(p)) + " actions");
    }
    if (!IsValidSimplex(profile[p], 1e-9)) {
      throw ShapeError("strategy of player " + std::to_string(p + 1) +
                       " is not a probability vector");
    }
  }
}

MixedProfile UniformProfile(const NormalFormGame& game) {
  MixedProfile profile;
  for (Player p = 0; p < kNumPlayers; ++p) {
    const int n = game.NumActions(p);
    profile[p].assign(n, 1.0 / n);
  }
  return profile;
}

std::vector<double> ActionPayoffs(const NormalFormGame& game,
                                  const MixedProfile& profile, Player player) {
  CheckProfile(game, profile);
  const int n = game.NumActions(player);
  const Strategy& opp = profile[Opponent(player)];
  std::vector<double> u(n, 0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < static_cast<int>(opp.size()); ++b) {
      u[a] += opp[b] * (player == kPlayerOne ? game.Payoff(player, a, b)
                                             : game.Payoff(player, b, a));
    }
  }
  return u;
}

double ExpectedPayoff(const NormalFormGame& game, const MixedProfile& profile,
                      Player player) {
  // Always evaluate player one's bilinear form so the two players' values
  // are exact negations of each other.
  const std::vector<double> u = ActionPayoffs(game, profile, kPlayerOne);
  const double v = std::inner_product(u.begin(), u.end(),
                                      profile[kPlayerOne].begin(), 0.0);
  return player == kPlayerOne ? v : -v;
}

std::vector<double> Advantages(const NormalFormGame& game,
                               const MixedProfile& profile, Player player) {
  std::vector<double> u = ActionPayoffs(game, profile, player);
  const Strategy& pi = profile[player];
  const double mean = std::inner_product(u.begin(), u.end(), pi.begin(), 0.0);
  for (double& x : u) x -= mean;
  return u;
}

double NashConv(const NormalFormGame& game, const MixedProfile& profile) {
  double total = 0.0;
  for (Player p = 0; p < kNumPlayers; ++p) {
    const std::vector<double> u = ActionPayoffs(game, profile, p);
    const double best = *std::max_element(u.begin(), u.end());
    const double value =
        std::inner_product(u.begin(), u.end(), profile[p].begin(), 0.0);
    total += std::max(0.0, best - value);
  }
  return total;
}

RpsParams Interpolate(const RpsParams& from, const RpsParams& to, double w) {
  if (from.with_fourth_action != to.with_fourth_action) {
    throw ConfigError("cannot interpolate between RPS and RPS-W stages");
  }
  return {std::lerp(from.a_rp, to.a_rp, w), std::lerp(from.a_ps, to.a_ps, w),
          std::lerp(from.a_sr, to.a_sr, w), from.with_fourth_action};
}

NormalFormGame BuildRps(const RpsParams& params) {
  if (!std::isfinite(params.a_rp) || !std::isfinite(params.a_ps) ||
      !std::isfinite(params.a_sr)) {
    throw ConfigError("RPS parameters must be finite");
  }
  constexpr int kRock = 0, kPaper = 1, kScissors = 2;
  const int n = params.with_fourth_action ? 4 : 3;
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  auto set = [&](int winner, int loser, double weight) {
    m[winner * n + loser] = weight;
    m[loser * n + winner] = -weight;
  };
  set(kPaper, kRock, params.a_rp);
  set(kScissors, kPaper, params.a_ps);
  set(kRock, kScissors, params.a_sr);
  return NormalFormGame(n, n, std::move(m));
}

NormalFormGame GameAt(const ParamSchedule& schedule, std::int64_t t) {
  return BuildRps(schedule.ParamsAt(t));
}

RpsParams NamedRpsParams(std::string_view name) {
  if (name == "rps") return {1.0, 1.0, 1.0, false};
  if (name == "brps") return {12.0, 1.0, 1.0, false};
  if (name == "brps_w") return {12.0, 1.0, 1.0, true};
  throw ConfigError("unknown normal-form game '" + std::string(name) + "'");
}

bool IsNormalFormGameName(std::string_view name) {
  return name == "rps" || name == "brps" || name == "brps_w";
}

}  // namespace bnnlab
