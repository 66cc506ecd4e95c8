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

#include "bnnlab/lyapunov.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bnnlab/errors.h"

namespace bnnlab {
namespace {

// Streaming mean and standard error.
class Accumulator {
 public:
  void Add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  MeanWithError Get() const {
    if (n_ < 2) return {mean_, 0.0};
    const double var = m2_ / static_cast<double>(n_ - 1);
    return {mean_, std::sqrt(var / static_cast<double>(n_))};
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double Positive(double x) { return x > 0.0 ? x : 0.0; }

double JensenSample(double x, double eps) {
  // Case split of [x + eps]_+ - [x]_+ - 1{x > 0} eps, exact in floating point.
  if (x > 0.0) return x + eps > 0.0 ? 0.0 : -(x + eps);
  return Positive(x + eps);
}

double RelativeError(double fd, double rhs) {
  if (rhs == 0.0) return std::abs(fd);
  return std::abs(fd - rhs) / std::abs(rhs);
}

void RequireInterior(std::span<const double> pi) {
  if (*std::min_element(pi.begin(), pi.end()) < 1e-6) {
    throw ConfigError("dissipation check needs an interior profile");
  }
}

double TotalGamma(const NormalFormGame& game, const MixedProfile& profile) {
  return GammaNfg(game, profile, kPlayerOne) +
         GammaNfg(game, profile, kPlayerTwo);
}

}  // namespace

double GammaNfg(const NormalFormGame& game, const MixedProfile& profile,
                Player player) {
  double gamma = 0.0;
  for (double adv : Advantages(game, profile, player)) {
    const double r = Positive(adv);
    gamma += 0.5 * r * r;
  }
  return gamma;
}

double SMass(const NormalFormGame& game, const MixedProfile& profile,
             Player player) {
  double s = 0.0;
  for (double adv : Advantages(game, profile, player)) s += Positive(adv);
  return s;
}

LyapunovReading ReadNfg(const NormalFormGame& game, const MixedProfile& profile,
                        std::int64_t t) {
  LyapunovReading r;
  r.t = t;
  for (Player p = 0; p < kNumPlayers; ++p) {
    r.gamma[p] = GammaNfg(game, profile, p);
    r.s_mass[p] = SMass(game, profile, p);
    r.gamma_total += r.gamma[p];
    r.s_total += r.s_mass[p];
  }
  r.nash_conv = NashConv(game, profile);
  return r;
}

LyapunovReading ReadEfg(const GameTree& tree, const BehaviorProfile& profile,
                        std::int64_t t) {
  LyapunovReading r;
  r.t = t;
  const ReachTable reach = ComputeReach(tree, profile);
  const EfgPotential potential =
      ComputeEfgPotential(tree, ComputeCfValues(tree, profile, reach));
  for (Player p = 0; p < kNumPlayers; ++p) {
    r.gamma[p] = potential.PlayerSum(p);
  }
  for (const InfosetPotential& x : potential.per_infoset) {
    r.s_mass[x.player] += x.s_mass;
  }
  r.gamma_total = potential.v;
  r.s_total = r.s_mass[0] + r.s_mass[1];
  r.nash_conv = NashConvEfg(tree, profile);
  r.min_external_reach = MinExternalReach(reach);
  return r;
}

double DissipationCheck(const NormalFormGame& game, const MixedProfile& profile,
                        double h) {
  CheckProfile(game, profile);
  double rhs = 0.0;
  MixedProfile next = profile;
  for (Player p = 0; p < kNumPlayers; ++p) {
    RequireInterior(profile[p]);
    rhs -= 2.0 * SMass(game, profile, p) * GammaNfg(game, profile, p);
    const std::vector<double> field = BnnField(game, profile, p);
    for (std::size_t a = 0; a < field.size(); ++a) next[p][a] += h * field[a];
  }
  const double fd = (TotalGamma(game, next) - TotalGamma(game, profile)) / h;
  return RelativeError(fd, rhs);
}

double DissipationCheck(const GameTree& tree, const BehaviorProfile& profile,
                        double h) {
  CheckBehavior(tree, profile);
  for (const Strategy& pi : profile.policies) RequireInterior(pi);
  const CfValueTable cf = ComputeCfValues(tree, profile);
  const EfgPotential potential = ComputeEfgPotential(tree, cf);
  double rhs = 0.0;
  for (const InfosetPotential& x : potential.per_infoset) {
    rhs -= 2.0 * x.s_mass * x.gamma;
  }
  BehaviorProfile next = profile;
  for (Player p = 0; p < kNumPlayers; ++p) {
    const EfgField field = EfgBnnField(tree, profile, cf, p);
    for (int x : tree.infosets_of(p)) {
      for (std::size_t a = 0; a < field[x].size(); ++a) {
        next[x][a] += h * field[x][a];
      }
    }
  }
  const double fd = (ComputeEfgPotential(tree, next).v - potential.v) / h;
  return RelativeError(fd, rhs);
}

BiasEstimate EstimateBias(const NormalFormGame& game,
                          const MixedProfile& profile, Player player,
                          NoiseModel& noise, std::int64_t n_samples) {
  const Strategy& pi = profile[player];
  const std::size_t n = pi.size();
  BiasEstimate est;
  est.sigma = noise.sigma();
  if (noise.sigma() == 0.0) {
    est.beta.assign(n, {});
    est.jensen_gap.assign(n, {});
    est.identity_residual.assign(n, {});
    return est;
  }
  est.n_samples = n_samples;
  const std::vector<double> adv = Advantages(game, profile, player);
  const std::vector<double> exact = BnnField(game, profile, player);
  std::vector<Accumulator> beta(n), gap(n), residual(n);
  std::vector<double> eps(n), d(n);
  for (std::int64_t k = 0; k < n_samples; ++k) {
    const FieldSample s = NoisyBnnField(game, profile, player, noise);
    const double mean_noise = std::inner_product(
        s.noise_draws.begin(), s.noise_draws.end(), pi.begin(), 0.0);
    double d_sum = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      eps[a] = s.noise_draws[a] - mean_noise;
      d[a] = JensenSample(adv[a], eps[a]);
      d_sum += d[a];
    }
    for (std::size_t a = 0; a < n; ++a) {
      const double b = s.direction[a] - exact[a];
      beta[a].Add(b);
      gap[a].Add(d[a]);
      residual[a].Add(b - (d[a] - pi[a] * d_sum));
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    est.beta.push_back(beta[a].Get());
    est.jensen_gap.push_back(gap[a].Get());
    est.identity_residual.push_back(residual[a].Get());
  }
  return est;
}

MeanWithError EstimateJensenGap(double advantage, NoiseModel& noise,
                                std::int64_t n_samples) {
  if (noise.sigma() == 0.0) return {};
  Accumulator acc;
  for (std::int64_t k = 0; k < n_samples; ++k) {
    acc.Add(JensenSample(advantage, noise.Draw()));
  }
  return acc.Get();
}

DriftReport DriftCheck(std::span<const double> g, std::span<const double> eta,
                       double sigma, int num_actions, int num_seeds) {
  if (g.size() < 2 || eta.size() + 1 < g.size()) {
    throw ShapeError("drift check needs g_0..g_T and eta_0..eta_{T-1}");
  }
  DriftReport report;
  report.too_few_seeds = num_seeds < kMinDriftSeeds;
  const double n = num_actions;
  const double bias_coeff = (n - 1.0) * std::sqrt(2.0 * n) * sigma;
  std::vector<double> ratios;
  for (std::size_t t = 0; t + 1 < g.size(); ++t) {
    const double gt = std::max(0.0, g[t]);
    const double predicted = gt - 2.0 * std::sqrt(2.0) * eta[t] * gt * std::sqrt(gt) +
                             bias_coeff * eta[t] * std::sqrt(gt);
    const double r = g[t + 1] - predicted;
    report.residuals.push_back(r);
    ratios.push_back(r / (eta[t] * eta[t]));
  }
  std::vector<double> sorted = ratios;
  const std::size_t k = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(sorted.size()))) - 1;
  std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
  report.c3 = std::max(0.0, sorted[k]);
  std::size_t ok = 0;
  for (double r : ratios) ok += r <= report.c3 ? 1 : 0;
  report.conforming_fraction =
      static_cast<double>(ok) / static_cast<double>(ratios.size());
  return report;
}

RateFit FitRate(std::span<const std::int64_t> t, std::span<const double> g,
                std::optional<FitWindow> window) {
  if (t.size() != g.size() || t.empty()) {
    throw ShapeError("rate fit needs matching non-empty series");
  }
  RateFit fit;
  const std::size_t n = g.size();
  const std::size_t tail_begin = n - std::max<std::size_t>(1, n / 10);
  fit.floor_estimate =
      std::accumulate(g.begin() + tail_begin, g.end(), 0.0) /
      static_cast<double>(n - tail_begin);

  if (window) {
    fit.t_start = window->t_start;
    fit.t_end = window->t_end;
  } else {
    fit.t_start = t.back() / 10;
    fit.t_end = t.back();
    if (fit.floor_estimate > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        if (g[i] < 3.0 * fit.floor_estimate) {
          fit.t_end = i > 0 ? t[i - 1] : t[0];
          break;
        }
      }
    }
    if (fit.t_end <= fit.t_start) fit.t_start = std::max<std::int64_t>(1, t.front());
  }

  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] < fit.t_start || t[i] > fit.t_end || t[i] <= 0) continue;
    if (!(g[i] > 0.0)) {
      // Keep the leading positive run only.
      fit.window_shrunk = true;
      fit.t_end = i > 0 ? t[i - 1] : t[i];
      break;
    }
    xs.push_back(std::log(static_cast<double>(t[i])));
    ys.push_back(std::log(g[i]));
  }
  if (xs.size() < 2) {
    fit.window_shrunk = true;
    return fit;
  }
  const double m = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0)
                            : 1.0;
  return fit;
}

CentroidShiftResult CentroidShift(std::span<const MixedProfile> tail,
                                  const NormalFormGame& game,
                                  std::span<const double> tail_gamma) {
  if (tail.empty()) throw ShapeError("centroid shift needs a non-empty tail");
  CentroidShiftResult result;
  for (Player p = 0; p < kNumPlayers; ++p) {
    Strategy& c = result.centroid[p];
    c.assign(game.NumActions(p), 0.0);
    for (const MixedProfile& profile : tail) {
      for (std::size_t a = 0; a < c.size(); ++a) c[a] += profile[p][a];
    }
    const double sum = std::accumulate(c.begin(), c.end(), 0.0);
    for (double& x : c) x /= sum;
  }
  for (Player p = 0; p < kNumPlayers; ++p) {
    result.gamma_per_player[p] = GammaNfg(game, result.centroid, p);
    result.gamma += result.gamma_per_player[p];
  }
  if (tail_gamma.size() >= 4) {
    const std::size_t half = tail_gamma.size() / 2;
    const double first =
        std::accumulate(tail_gamma.begin(), tail_gamma.begin() + half, 0.0) /
        static_cast<double>(half);
    const double second =
        std::accumulate(tail_gamma.begin() + half, tail_gamma.end(), 0.0) /
        static_cast<double>(tail_gamma.size() - half);
    const double scale = std::max(std::abs(first), std::abs(second));
    result.stationary = scale == 0.0 || std::abs(first - second) <= 0.25 * scale;
  }
  return result;
}

}  // namespace bnnlab
