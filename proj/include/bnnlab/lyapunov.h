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

#ifndef BNNLAB_LYAPUNOV_H_
#define BNNLAB_LYAPUNOV_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bnnlab/dynamics.h"
#include "bnnlab/game_tree.h"
#include "bnnlab/normal_form.h"

namespace bnnlab {

// Gamma = 1/2 sum_a [adv(a)]_+^2 and S = sum_a [adv(a)]_+ for one player.
double GammaNfg(const NormalFormGame& game, const MixedProfile& profile,
                Player player);
double SMass(const NormalFormGame& game, const MixedProfile& profile,
             Player player);

struct LyapunovReading {
  std::int64_t t = 0;
  std::array<double, kNumPlayers> gamma{};
  std::array<double, kNumPlayers> s_mass{};
  double gamma_total = 0.0;  // sum over players, or V for trees
  double s_total = 0.0;
  double nash_conv = 0.0;
  double min_external_reach = 1.0;  // trees only
};

LyapunovReading ReadNfg(const NormalFormGame& game, const MixedProfile& profile,
                        std::int64_t t = 0);
LyapunovReading ReadEfg(const GameTree& tree, const BehaviorProfile& profile,
                        std::int64_t t = 0);

// Finite-difference check of dGamma/dt = -2 sum_i S_i Gamma_i along the
// noiseless flow: advances by one Euler step of length h and returns
// |fd - rhs| / |rhs| (0 when both vanish). Throws ConfigError for profiles
// with an entry below 1e-6.
double DissipationCheck(const NormalFormGame& game, const MixedProfile& profile,
                        double h);
// Extensive-form analogue with V and -sum_x 2 S^x Gamma^x.
double DissipationCheck(const GameTree& tree, const BehaviorProfile& profile,
                        double h);

struct MeanWithError {
  double mean = 0.0;
  double se = 0.0;
};

struct BiasEstimate {
  std::vector<MeanWithError> beta;          // E[H_hat] - H per action
  std::vector<MeanWithError> jensen_gap;    // delta(a)
  // beta(a) - (delta(a) - pi(a) sum_b delta(b)).
  std::vector<MeanWithError> identity_residual;
  std::int64_t n_samples = 0;
  double sigma = 0.0;
};

// Monte-Carlo estimate of the structural bias of the noisy BNN field. The
// Jensen gap uses the advantage noise eps(a) = xi(a) - sum_b pi(b) xi(b)
// and the control variate [x + eps]_+ - [x]_+ - 1{x > 0} eps, which has the
// same mean and is non-negative sample by sample.
BiasEstimate EstimateBias(const NormalFormGame& game,
                          const MixedProfile& profile, Player player,
                          NoiseModel& noise, std::int64_t n_samples);

// E[[adv + eps]_+] - [adv]_+ for eps drawn directly from `noise`.
MeanWithError EstimateJensenGap(double advantage, NoiseModel& noise,
                                std::int64_t n_samples);

struct DriftReport {
  // g_{t+1} - [g_t - 2 sqrt2 eta g^{3/2} + (|A|-1) sqrt(2|A|) sigma eta g^{1/2}]
  std::vector<double> residuals;
  // Smallest C3 with residual <= C3 eta^2 at 95% of the steps.
  double c3 = 0.0;
  double conforming_fraction = 0.0;
  bool too_few_seeds = false;
};

inline constexpr int kMinDriftSeeds = 30;

// `g` is the seed-mean Gamma of one player at consecutive iterations and
// `eta` the step used to go from g[t] to g[t+1].
DriftReport DriftCheck(std::span<const double> g, std::span<const double> eta,
                       double sigma, int num_actions, int num_seeds);

struct RateFit {
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double floor_estimate = 0.0;  // mean of the last 10% of the series
  bool window_shrunk = false;
};

struct FitWindow {
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
};

// Least-squares slope of log g against log t. Without an explicit window
// the fit uses [t_last / 10, t_f], t_f being the last t before the series
// first drops below three times its tail floor. Non-positive values shrink
// the window to the leading positive run.
RateFit FitRate(std::span<const std::int64_t> t, std::span<const double> g,
                std::optional<FitWindow> window = std::nullopt);

struct CentroidShiftResult {
  MixedProfile centroid;
  double gamma = 0.0;  // Gamma_1 + Gamma_2 at the centroid
  std::array<double, kNumPlayers> gamma_per_player{};
  bool stationary = true;
};

// Averages the given tail iterates (pooled over seeds if the caller passes
// several runs) and evaluates Gamma at the average. `stationary` is false
// when the first and second halves of `tail_gamma` differ by more than 25%.
CentroidShiftResult CentroidShift(std::span<const MixedProfile> tail,
                                  const NormalFormGame& game,
                                  std::span<const double> tail_gamma = {});

}  // namespace bnnlab

#endif  // BNNLAB_LYAPUNOV_H_
