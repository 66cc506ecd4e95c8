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

#include "bnnlab/dynamics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "bnnlab/errors.h"

namespace bnnlab {
namespace {

double ParseNumber(std::string_view text, std::string_view what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError(fmt::format("bad number '{}' in {}", text, what));
  }
  return value;
}

double Mean(std::span<const double> values, std::span<const double> weights) {
  return std::inner_product(values.begin(), values.end(), weights.begin(), 0.0);
}

std::vector<double> Centered(std::vector<double> u, std::span<const double> pi) {
  const double mean = Mean(u, pi);
  for (double& x : u) x -= mean;
  return u;
}

std::vector<double> NoisyPayoffs(const NormalFormGame& game,
                                 const MixedProfile& profile, Player player,
                                 NoiseModel& noise,
                                 std::vector<double>* draws) {
  std::vector<double> u = ActionPayoffs(game, profile, player);
  if (noise.sigma() > 0.0) {
    for (double& x : u) {
      const double xi = noise.Draw();
      if (draws != nullptr) draws->push_back(xi);
      x += xi;
    }
  }
  return u;
}

std::vector<double> ReplicatorOn(std::vector<double> u,
                                 std::span<const double> pi,
                                 const RegRdConfig* reg, Player player) {
  if (reg != nullptr && reg->lambda != 0.0) {
    const Strategy& ref = reg->reference[player];
    if (ref.size() != pi.size() || !IsValidSimplex(ref, 1e-9) ||
        *std::min_element(ref.begin(), ref.end()) <= 0.0) {
      throw ConfigError("reg-rd reference must be an interior profile");
    }
    for (std::size_t a = 0; a < u.size(); ++a) {
      u[a] -= reg->lambda * std::log(pi[a] / ref[a]);
    }
  }
  const std::vector<double> adv = Centered(std::move(u), pi);
  std::vector<double> field(pi.size());
  for (std::size_t a = 0; a < pi.size(); ++a) field[a] = pi[a] * adv[a];
  return field;
}

}  // namespace

NoiseSpec NoiseSpec::Parse(std::string_view text) {
  if (text == "none" || text.empty()) return {};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError(fmt::format("bad noise spec '{}'", text));
  }
  const std::string_view kind = text.substr(0, colon);
  NoiseSpec spec;
  if (kind == "gauss") {
    spec.distribution = NoiseDistribution::kGaussian;
  } else if (kind == "uniform") {
    spec.distribution = NoiseDistribution::kUniform;
  } else {
    throw ConfigError(fmt::format("unknown noise distribution '{}'", kind));
  }
  spec.sigma = ParseNumber(text.substr(colon + 1), "noise spec");
  if (spec.sigma < 0.0) throw ConfigError("noise sigma must be >= 0");
  return spec;
}

std::string NoiseSpec::ToString() const {
  if (sigma == 0.0) return "none";
  return fmt::format("{}:{}",
                     distribution == NoiseDistribution::kGaussian ? "gauss"
                                                                   : "uniform",
                     sigma);
}

NoiseModel::NoiseModel(NoiseSpec spec, std::uint64_t seed)
    : spec_(spec), rng_(seed) {}

double NoiseModel::Draw() {
  if (spec_.sigma == 0.0) return 0.0;
  if (spec_.distribution == NoiseDistribution::kGaussian) {
    return spec_.sigma * gaussian_(rng_);
  }
  return spec_.sigma * std::sqrt(3.0) * uniform_(rng_);
}

double StepSchedule::Eta(std::int64_t t) const {
  if (kind == Kind::kConstant) return c;
  return c / std::pow(static_cast<double>(t) + t0, kExponent);
}

StepSchedule StepSchedule::Parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError(fmt::format("bad step schedule '{}'", text));
  }
  const std::string_view kind = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);
  StepSchedule s;
  if (kind == "const") {
    s.kind = Kind::kConstant;
    s.c = ParseNumber(rest, "step schedule");
  } else if (kind == "power") {
    s.kind = Kind::kPower;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(fmt::format("bad step schedule item '{}'", item));
      }
      const std::string_view name = item.substr(0, eq);
      const double value = ParseNumber(item.substr(eq + 1), "step schedule");
      if (name == "c") {
        s.c = value;
      } else if (name == "t0") {
        s.t0 = value;
      } else {
        throw ConfigError(fmt::format("unknown step schedule key '{}'", name));
      }
      rest = comma == std::string_view::npos ? std::string_view()
                                             : rest.substr(comma + 1);
    }
    if (s.t0 < 1.0) throw ConfigError("power schedule needs t0 >= 1");
  } else {
    throw ConfigError(fmt::format("unknown step schedule kind '{}'", kind));
  }
  if (!(s.c > 0.0)) throw ConfigError("step size constant must be positive");
  return s;
}

std::string StepSchedule::ToString() const {
  if (kind == Kind::kConstant) return fmt::format("const:{}", c);
  return fmt::format("power:c={},t0={}", c, t0);
}

std::vector<double> BnnDirection(std::span<const double> advantages,
                                 std::span<const double> pi) {
  if (advantages.size() != pi.size()) {
    throw ShapeError("advantage and policy sizes differ");
  }
  std::vector<double> r(advantages.size());
  double s = 0.0;
  for (std::size_t a = 0; a < r.size(); ++a) {
    r[a] = std::max(0.0, advantages[a]);
    s += r[a];
  }
  for (std::size_t a = 0; a < r.size(); ++a) r[a] -= pi[a] * s;
  return r;
}

std::vector<double> BnnField(const NormalFormGame& game,
                             const MixedProfile& profile, Player player) {
  return BnnDirection(Advantages(game, profile, player), profile[player]);
}

FieldSample NoisyBnnField(const NormalFormGame& game,
                          const MixedProfile& profile, Player player,
                          NoiseModel& noise) {
  FieldSample sample;
  const Strategy& pi = profile[player];
  sample.bias_free_direction = BnnField(game, profile, player);
  std::vector<double> u =
      NoisyPayoffs(game, profile, player, noise, &sample.noise_draws);
  sample.direction = BnnDirection(Centered(std::move(u), pi), pi);
  return sample;
}

std::vector<double> ReplicatorField(const NormalFormGame& game,
                                    const MixedProfile& profile, Player player) {
  return ReplicatorOn(ActionPayoffs(game, profile, player), profile[player],
                      nullptr, player);
}

std::vector<double> RegularizedReplicatorField(const NormalFormGame& game,
                                               const MixedProfile& profile,
                                               Player player,
                                               const RegRdConfig& config) {
  return ReplicatorOn(ActionPayoffs(game, profile, player), profile[player],
                      &config, player);
}

std::vector<double> NoisyReplicatorField(const NormalFormGame& game,
                                         const MixedProfile& profile,
                                         Player player, NoiseModel& noise,
                                         const RegRdConfig* reg) {
  return ReplicatorOn(NoisyPayoffs(game, profile, player, noise, nullptr),
                      profile[player], reg, player);
}

FixedPointResult FindRegRdFixedPoint(const NormalFormGame& game,
                                     const MixedProfile& start,
                                     const RegRdConfig& config, double eta,
                                     std::int64_t max_iterations, double tol) {
  FixedPointResult result;
  result.profile = start;
  for (std::int64_t k = 0; k < max_iterations; ++k) {
    MixedProfile next = result.profile;
    double residual = 0.0;
    for (Player p = 0; p < kNumPlayers; ++p) {
      const std::vector<double> field =
          RegularizedReplicatorField(game, result.profile, p, config);
      for (double f : field) residual = std::max(residual, std::abs(f));
      next[p] = Step(result.profile[p], field, eta).next;
    }
    result.residual = residual;
    result.iterations = k;
    if (residual < tol) {
      result.converged = true;
      return result;
    }
    result.profile = std::move(next);
  }
  return result;
}

StepResult Step(std::span<const double> pi, std::span<const double> direction,
                double eta, double floor) {
  if (pi.size() != direction.size()) {
    throw ShapeError("direction does not match the simplex dimension");
  }
  StepResult result;
  result.next.resize(pi.size());
  bool finite = std::isfinite(eta);
  for (std::size_t a = 0; a < pi.size(); ++a) {
    result.next[a] = pi[a] + eta * direction[a];
    finite = finite && std::isfinite(result.next[a]);
  }
  if (!finite) {
    std::ostringstream dump;
    dump.precision(17);
    dump << "non-finite simplex step: eta=" << eta << " pi=[";
    for (double x : pi) dump << ' ' << x;
    dump << " ] direction=[";
    for (double x : direction) dump << ' ' << x;
    dump << " ]";
    throw NumericalError(dump.str());
  }
  // Entries below the floor are pinned at it and the remaining mass is
  // shared among the others in proportion; pinning can cascade.
  std::vector<bool> pinned(pi.size(), false);
  const double n = static_cast<double>(pi.size());
  for (bool changed = true; changed;) {
    changed = false;
    double free_mass = 0.0;
    double pinned_count = 0.0;
    for (std::size_t a = 0; a < pi.size(); ++a) {
      if (!pinned[a] && result.next[a] < floor) {
        pinned[a] = true;
        result.floored = true;
        changed = true;
      }
      if (pinned[a]) {
        result.next[a] = floor;
        pinned_count += 1.0;
      } else {
        free_mass += result.next[a];
      }
    }
    const double target = 1.0 - pinned_count * floor;
    if (pinned_count == n || !(free_mass > 0.0) || target <= 0.0) {
      for (double& x : result.next) x = 1.0 / n;
      return result;
    }
    const double scale = target / free_mass;
    for (std::size_t a = 0; a < pi.size(); ++a) {
      if (!pinned[a]) result.next[a] *= scale;
    }
  }
  double sum = 0.0;
  for (double x : result.next) sum += x;
  for (double& x : result.next) x /= sum;
  return result;
}

EfgField EfgBnnField(const GameTree& tree, const BehaviorProfile& profile,
                     const CfValueTable& cf, Player player) {
  EfgField field(tree.num_infosets());
  for (int x = 0; x < tree.num_infosets(); ++x) {
    field[x].assign(tree.num_actions(x), 0.0);
  }
  for (int x : tree.infosets_of(player)) {
    const double ext = cf.external_reach[x];
    if (ext <= kMinExternalReach) continue;
    field[x] = BnnDirection(cf.advantages[x], profile[x]);
    for (double& d : field[x]) d *= ext;
  }
  return field;
}

std::vector<FieldSample> NoisyEfgBnnField(const GameTree& tree,
                                          const BehaviorProfile& profile,
                                          const CfValueTable& cf,
                                          Player player, NoiseModel& noise) {
  const EfgField exact = EfgBnnField(tree, profile, cf, player);
  std::vector<FieldSample> samples(tree.num_infosets());
  for (int x = 0; x < tree.num_infosets(); ++x) {
    samples[x].bias_free_direction = exact[x];
    samples[x].direction = exact[x];
  }
  if (noise.sigma() == 0.0) return samples;
  for (int x : tree.infosets_of(player)) {
    FieldSample& s = samples[x];
    std::vector<double> adv = cf.advantages[x];
    for (double& a : adv) {
      const double xi = noise.Draw();
      s.noise_draws.push_back(xi);
      a += xi;
    }
    const double ext = cf.external_reach[x];
    if (ext <= kMinExternalReach) continue;
    s.direction = BnnDirection(adv, profile[x]);
    for (double& d : s.direction) d *= ext;
  }
  return samples;
}

std::vector<FieldSample> NoisyEfgBnnField(const GameTree& tree,
                                          const BehaviorProfile& profile,
                                          Player player, NoiseModel& noise) {
  return NoisyEfgBnnField(tree, profile, ComputeCfValues(tree, profile),
                          player, noise);
}

EfgField EfgRegularizedReplicatorField(const GameTree& tree,
                                       const BehaviorProfile& profile,
                                       const CfValueTable& cf, Player player,
                                       const EfgRegRdConfig& config,
                                       NoiseModel& noise) {
  EfgField field(tree.num_infosets());
  for (int x = 0; x < tree.num_infosets(); ++x) {
    field[x].assign(tree.num_actions(x), 0.0);
  }
  for (int x : tree.infosets_of(player)) {
    const Strategy& pi = profile[x];
    std::vector<double> q = cf.advantages[x];
    for (double& v : q) v += noise.Draw();
    if (config.lambda != 0.0) {
      const Strategy& ref = config.reference[x];
      for (std::size_t a = 0; a < q.size(); ++a) {
        if (!(ref[a] > 0.0)) {
          throw ConfigError("reg-rd reference must be an interior profile");
        }
        q[a] -= config.lambda * std::log(pi[a] / ref[a]);
      }
    }
    const std::vector<double> adv = Centered(std::move(q), pi);
    const double ext = cf.external_reach[x];
    for (std::size_t a = 0; a < pi.size(); ++a) {
      field[x][a] = ext * pi[a] * adv[a];
    }
  }
  return field;
}

int StepBehavior(BehaviorProfile& profile, const EfgField& field, double eta,
                 double floor) {
  int floored = 0;
  for (std::size_t x = 0; x < field.size(); ++x) {
    if (field[x].empty()) continue;
    StepResult r = Step(profile[x], field[x], eta, floor);
    profile[x] = std::move(r.next);
    floored += r.floored ? 1 : 0;
  }
  return floored;
}

}  // namespace bnnlab
