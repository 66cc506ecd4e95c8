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

#ifndef BNNLAB_DYNAMICS_H_
#define BNNLAB_DYNAMICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bnnlab/game_tree.h"
#include "bnnlab/normal_form.h"
#include "bnnlab/random.h"

namespace bnnlab {

// ---------------------------------------------------------------------------
// Noise and step sizes

enum class NoiseDistribution { kGaussian, kUniform };

// Payoff noise: zero mean, variance sigma^2. The uniform variant draws from
// [-sqrt(3) sigma, sqrt(3) sigma] so both have the same variance.
struct NoiseSpec {
  NoiseDistribution distribution = NoiseDistribution::kGaussian;
  double sigma = 0.0;

  // "none", "gauss:0.1" or "uniform:0.1".
  static NoiseSpec Parse(std::string_view text);
  std::string ToString() const;
};

// A noise source bound to one seeded stream. With sigma == 0 no random
// numbers are consumed.
class NoiseModel {
 public:
  explicit NoiseModel(NoiseSpec spec = {}, std::uint64_t seed = 0);

  double sigma() const { return spec_.sigma; }
  const NoiseSpec& spec() const { return spec_; }
  double Draw();
  Rng& rng() { return rng_; }

 private:
  NoiseSpec spec_;
  Rng rng_;
  std::normal_distribution<double> gaussian_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{-1.0, 1.0};
};

// eta(t) = c / (t + t0)^(2/3), or the constant c.
struct StepSchedule {
  enum class Kind { kConstant, kPower };
  static constexpr double kExponent = 2.0 / 3.0;

  Kind kind = Kind::kPower;
  double c = 1.0;
  double t0 = 10.0;

  double Eta(std::int64_t t) const;

  // "power:c=1,t0=10" or "const:0.05".
  static StepSchedule Parse(std::string_view text);
  std::string ToString() const;
};

// ---------------------------------------------------------------------------
// Normal form

// A noisy (or exact) field for one player's simplex.
struct FieldSample {
  std::vector<double> direction;
  std::vector<double> bias_free_direction;
  std::vector<double> noise_draws;
};

// r - pi * sum(r) with r = [advantages]_+.
std::vector<double> BnnDirection(std::span<const double> advantages,
                                 std::span<const double> pi);

// Exact BNN field for one player.
std::vector<double> BnnField(const NormalFormGame& game,
                             const MixedProfile& profile, Player player);

// One noise draw per action is added to the action payoffs; the noisy
// advantages are taken against the pi-weighted mean of the noisy payoffs.
FieldSample NoisyBnnField(const NormalFormGame& game,
                          const MixedProfile& profile, Player player,
                          NoiseModel& noise);

std::vector<double> ReplicatorField(const NormalFormGame& game,
                                    const MixedProfile& profile, Player player);

// Replicator dynamics on payoffs perturbed towards a reference policy:
// u(a) - lambda * log(pi(a) / ref(a)), recentred by its pi-weighted mean.
// The caller resets the reference every k_ref iterations.
struct RegRdConfig {
  double lambda = 0.1;
  std::int64_t k_ref = 100;
  MixedProfile reference;
};

std::vector<double> RegularizedReplicatorField(const NormalFormGame& game,
                                               const MixedProfile& profile,
                                               Player player,
                                               const RegRdConfig& config);

// Rest point of the regularized replicator for a fixed reference, found by
// iterating the discrete flow with step `eta` until the largest field
// component drops below `tol`.
struct FixedPointResult {
  MixedProfile profile;
  std::int64_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

FixedPointResult FindRegRdFixedPoint(const NormalFormGame& game,
                                     const MixedProfile& start,
                                     const RegRdConfig& config,
                                     double eta = 0.01,
                                     std::int64_t max_iterations = 1000000,
                                     double tol = 1e-12);

// Replicator variants with noisy payoffs (one draw per action).
std::vector<double> NoisyReplicatorField(const NormalFormGame& game,
                                         const MixedProfile& profile,
                                         Player player, NoiseModel& noise,
                                         const RegRdConfig* reg = nullptr);

// ---------------------------------------------------------------------------
// Simplex step

inline constexpr double kSimplexFloor = 1e-9;

struct StepResult {
  std::vector<double> next;
  bool floored = false;
};

// pi + eta * direction; entries below `floor` are pinned at it and the rest
// are rescaled to restore unit mass. Throws NumericalError with a dump of
// the state if anything is not finite.
StepResult Step(std::span<const double> pi, std::span<const double> direction,
                double eta, double floor = kSimplexFloor);

// ---------------------------------------------------------------------------
// Extensive form

// Per-infoset vectors indexed by infoset id. Entries for infosets not owned
// by the player in question are zero vectors.
using EfgField = std::vector<std::vector<double>>;

// rho_-i(x) * ([A(x, .)]_+ - pi(.|x) * sum_b [A(x, b)]_+) at each of the
// player's infosets.
EfgField EfgBnnField(const GameTree& tree, const BehaviorProfile& profile,
                     const CfValueTable& cf, Player player);

// Same, with one noise draw per (infoset, action) added to the conditional
// counterfactual advantages before the positive part.
std::vector<FieldSample> NoisyEfgBnnField(const GameTree& tree,
                                          const BehaviorProfile& profile,
                                          const CfValueTable& cf,
                                          Player player, NoiseModel& noise);
std::vector<FieldSample> NoisyEfgBnnField(const GameTree& tree,
                                          const BehaviorProfile& profile,
                                          Player player, NoiseModel& noise);

// Reach-weighted replicator on noisy conditional action values perturbed
// towards a reference behaviour profile; the extensive-form baseline.
struct EfgRegRdConfig {
  double lambda = 0.1;
  std::int64_t k_ref = 100;
  BehaviorProfile reference;
};

EfgField EfgRegularizedReplicatorField(const GameTree& tree,
                                       const BehaviorProfile& profile,
                                       const CfValueTable& cf, Player player,
                                       const EfgRegRdConfig& config,
                                       NoiseModel& noise);

// Applies Step at every infoset where field is non-empty. Returns the number
// of infosets where flooring kicked in.
int StepBehavior(BehaviorProfile& profile, const EfgField& field, double eta,
                 double floor = kSimplexFloor);

}  // namespace bnnlab

#endif  // BNNLAB_DYNAMICS_H_
