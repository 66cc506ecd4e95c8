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


#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <memory>
#include <sstream>
#include <thread>

#include "bnnlab/errors.h"
#include "bnnlab/harness.h"
#include "bnnlab/lyapunov.h"
#include "bnnlab/random.h"
#include "fmt/format.h"

namespace bnnlab {
namespace {

constexpr std::uint64_t kInitStreamSalt = 0xd1b54a32d192ed03ULL;

NoiseSpec MakeNoiseSpec(const ExperimentConfig& c) {
  NoiseSpec spec;
  spec.distribution = c.noise == "uniform" ? NoiseDistribution::kUniform
                                           : NoiseDistribution::kGaussian;
  spec.sigma = c.sigma;
  return spec;
}

double SimplexError(std::span<const double> pi) {
  double sum = 0.0;
  double err = 0.0;
  for (double p : pi) {
    sum += p;
    if (p < 0.0) err = std::max(err, -p);
  }
  return std::max(err, std::abs(sum - 1.0));
}

std::string DumpStrategy(std::span<const double> pi) {
  std::string out = "[";
  for (std::size_t a = 0; a < pi.size(); ++a) {
    out += fmt::format("{}{:.17g}", a ? ", " : "", pi[a]);
  }
  return out + "]";
}

[[noreturn]] void RethrowWithState(const NumericalError& e,
                                   const std::string& where,
                                   const std::string& state) {
  throw NumericalError(fmt::format("{}: {}\nstate:\n{}", where, e.what(), state));
}

std::string DumpProfile(const MixedProfile& p) {
  return fmt::format("player 1: {}\nplayer 2: {}\n", DumpStrategy(p[0]),
                     DumpStrategy(p[1]));
}

std::string DumpBehavior(const GameTree& tree, const BehaviorProfile& b) {
  std::string out;
  for (int x = 0; x < tree.num_infosets(); ++x) {
    out += fmt::format("{} {}\n", tree.infoset(x).key, DumpStrategy(b[x]));
  }
  return out;
}

void CheckFinite(std::span<const double> v, const char* what) {
  for (double d : v) {
    if (!std::isfinite(d)) {
      throw NumericalError(fmt::format("non-finite {}", what));
    }
  }
}

class TailAccumulator {
 public:
  void Add(const MixedProfile& p) {
    if (count_ == 0) sum_ = p;
    else {
      for (Player q = 0; q < kNumPlayers; ++q) {
        for (std::size_t a = 0; a < p[q].size(); ++a) sum_[q][a] += p[q][a];
      }
    }
    ++count_;
  }
  MixedProfile Mean() const {
    MixedProfile m = sum_;
    for (Player q = 0; q < kNumPlayers; ++q) {
      for (double& v : m[q]) v /= static_cast<double>(count_);
    }
    return m;
  }

 private:
  MixedProfile sum_;
  std::int64_t count_ = 0;
};

SeedResult RunNormalForm(const ExperimentConfig& c, const GameSpec& spec,
                         std::uint64_t seed) {
  const Algorithm algo = ParseAlgorithm(c.algo);
  const StepSchedule step = StepSchedule::Parse(c.eta);
  const bool stationary = spec.nfg.mode == ScheduleMode::kStatic;
  NormalFormGame game = GameAt(spec.nfg, 0);
  Rng init_rng(seed ^ kInitStreamSalt);
  NoiseModel noise(MakeNoiseSpec(c), seed);

  MixedProfile p;
  if (c.init == "uniform") {
    p = UniformProfile(game);
  } else {
    p[0] = RandomInteriorSimplex(game.NumActions(kPlayerOne), init_rng);
    p[1] = RandomInteriorSimplex(game.NumActions(kPlayerTwo), init_rng);
  }
  RegRdConfig reg;
  reg.lambda = algo == Algorithm::kReplicator ? 0.0 : c.lambda;
  reg.k_ref = c.k_ref;
  reg.reference = UniformProfile(game);

  SeedResult result;
  result.seed = seed;
  if (stationary) {
    result.gamma_one.reserve(static_cast<std::size_t>(c.iters) + 1);
    result.gamma_one.push_back(GammaNfg(game, p, kPlayerOne));
  }
  const std::int64_t tail_start = c.iters - c.iters / 5;
  const std::int64_t gamma_tail_start = c.iters - c.iters / 10;
  std::array<double, kNumPlayers> tail_gamma_sum{};
  std::int64_t tail_gamma_count = 0;
  TailAccumulator tail;
  std::int64_t floor_events = 0;

  auto record = [&](std::int64_t t) {
    const LyapunovReading r = ReadNfg(game, p, t);
    TraceRecord rec;
    rec.t = t;
    rec.seed = seed;
    rec.nash_conv = r.nash_conv;
    rec.gamma = r.gamma_total;
    rec.s_mass = r.s_total;
    rec.sigma = c.sigma;
    rec.eta_t = step.Eta(StepIndex(c, spec, t));
    rec.floor_events = floor_events;
    rec.min_external_reach = 1.0;
    rec.stage_id = spec.nfg.StageAt(t);
    result.trace.push_back(rec);
    if (t >= gamma_tail_start) {
      for (Player q = 0; q < kNumPlayers; ++q) tail_gamma_sum[q] += r.gamma[q];
      ++tail_gamma_count;
    }
  };

  for (std::int64_t t = 0; t < c.iters; ++t) {
    if (!stationary) game = GameAt(spec.nfg, t);
    if (t % c.eval_interval == 0) record(t);
    if (algo == Algorithm::kRegRd && t > 0 && t % c.k_ref == 0) {
      reg.reference = p;
    }
    const double eta = step.Eta(StepIndex(c, spec, t));
    MixedProfile next = p;
    try {
      for (Player q = 0; q < kNumPlayers; ++q) {
        std::vector<double> dir;
        if (algo == Algorithm::kBnn) {
          dir = noise.sigma() == 0.0 ? BnnField(game, p, q)
                                     : NoisyBnnField(game, p, q, noise).direction;
        } else {
          dir = NoisyReplicatorField(game, p, q, noise,
                                     reg.lambda > 0.0 ? &reg : nullptr);
        }
        CheckFinite(dir, "field");
        StepResult s = Step(p[q], dir, eta, c.simplex_floor);
        floor_events += s.floored ? 1 : 0;
        next[q] = std::move(s.next);
        result.max_simplex_error =
            std::max(result.max_simplex_error, SimplexError(next[q]));
      }
    } catch (const NumericalError& e) {
      RethrowWithState(e, fmt::format("seed {} iteration {}", seed, t),
                       DumpProfile(p));
    }
    p = std::move(next);
    if (stationary) result.gamma_one.push_back(GammaNfg(game, p, kPlayerOne));
    if (t + 1 >= tail_start) tail.Add(p);
  }
  if (!stationary) game = GameAt(spec.nfg, c.iters);
  record(c.iters);
  result.final_profile = p;
  result.tail_mean = tail.Mean();
  for (Player q = 0; q < kNumPlayers; ++q) {
    result.tail_gamma[q] = tail_gamma_sum[q] / static_cast<double>(tail_gamma_count);
  }
  return result;
}

GameTree BuildTree(const GameSpec& spec, double bet) {
  return spec.name == "kuhn" ? BuildKuhn(bet) : BuildLeduc();
}

SeedResult RunExtensiveForm(const ExperimentConfig& c, const GameSpec& spec,
                            std::uint64_t seed) {
  const Algorithm algo = ParseAlgorithm(c.algo);
  const StepSchedule step = StepSchedule::Parse(c.eta);
  double bet = spec.bet.ParamsAt(0);
  auto tree = std::make_unique<GameTree>(BuildTree(spec, bet));
  Rng init_rng(seed ^ kInitStreamSalt);
  BehaviorProfile profile = c.init == "uniform"
                                ? UniformBehavior(*tree)
                                : RandomInteriorBehavior(*tree, init_rng);

  std::unique_ptr<BnnacTrainer> trainer;
  std::unique_ptr<NoiseModel> noise;
  if (algo == Algorithm::kBnnac) {
    BnnacConfig b;
    b.k_actor = static_cast<int>(c.k_actor);
    b.batch = c.batch;
    b.alpha = c.alpha;
    b.beta = c.beta;
    b.eta = step;
    b.policy_floor = c.policy_floor;
    b.oracle_tables = c.oracle_tables;
    trainer = std::make_unique<BnnacTrainer>(*tree, b, MakeNoiseSpec(c), seed);
    trainer->SetPolicy(profile);
  } else {
    noise = std::make_unique<NoiseModel>(MakeNoiseSpec(c), seed);
  }
  EfgRegRdConfig reg;
  reg.lambda = algo == Algorithm::kReplicator ? 0.0 : c.lambda;
  reg.k_ref = c.k_ref;
  reg.reference = UniformBehavior(*tree);

  SeedResult result;
  result.seed = seed;
  std::int64_t floor_events = 0;
  double last_eta = 0.0;

  auto record = [&](std::int64_t t) {
    const LyapunovReading r = ReadEfg(*tree, profile, t);
    TraceRecord rec;
    rec.t = t;
    rec.seed = seed;
    rec.nash_conv = r.nash_conv;
    rec.gamma = r.gamma_total;
    rec.s_mass = r.s_total;
    rec.sigma = c.sigma;
    rec.eta_t =
        algo == Algorithm::kBnnac ? last_eta : step.Eta(StepIndex(c, spec, t));
    rec.floor_events = floor_events;
    rec.min_external_reach = r.min_external_reach;
    rec.stage_id = spec.bet.StageAt(t);
    result.min_external_reach =
        std::min(result.min_external_reach, r.min_external_reach);
    result.trace.push_back(rec);
  };

  auto sync_tree = [&](std::int64_t t) {
    const double b = spec.bet.ParamsAt(t);
    if (b == bet) return;
    bet = b;
    auto rebuilt = std::make_unique<GameTree>(BuildTree(spec, bet));
    if (trainer) trainer->SetTree(*rebuilt);
    tree = std::move(rebuilt);
  };

  int stage = spec.bet.StageAt(0);
  for (std::int64_t t = 0; t < c.iters; ++t) {
    sync_tree(t);
    if (trainer && c.eta_clock == "stage" && spec.bet.StageAt(t) != stage) {
      trainer->ResetStepClock();
    }
    stage = spec.bet.StageAt(t);
    if (t % c.eval_interval == 0) record(t);
    try {
      if (trainer) {
        trainer->Iterate();
        last_eta = trainer->last_eta();
        floor_events = trainer->floor_events();
        profile = trainer->JointPolicy();
        for (const Strategy& s : profile.policies) CheckFinite(s, "policy");
      } else {
        const CfValueTable cf = ComputeCfValues(*tree, profile);
        if (algo == Algorithm::kRegRd && t > 0 && t % c.k_ref == 0) {
          reg.reference = profile;
        }
        EfgField field(tree->num_infosets());
        for (Player q = 0; q < kNumPlayers; ++q) {
          if (algo == Algorithm::kBnn) {
            std::vector<FieldSample> s =
                NoisyEfgBnnField(*tree, profile, cf, q, *noise);
            for (int x : tree->infosets_of(q)) field[x] = std::move(s[x].direction);
          } else {
            EfgField f =
                EfgRegularizedReplicatorField(*tree, profile, cf, q, reg, *noise);
            for (int x : tree->infosets_of(q)) field[x] = std::move(f[x]);
          }
        }
        for (const auto& d : field) CheckFinite(d, "field");
        floor_events +=
            StepBehavior(profile, field, step.Eta(StepIndex(c, spec, t)),
                         c.simplex_floor);
      }
    } catch (const NumericalError& e) {
      RethrowWithState(e, fmt::format("seed {} iteration {}", seed, t),
                       DumpBehavior(*tree, profile));
    }
    for (const Strategy& s : profile.policies) {
      result.max_simplex_error = std::max(result.max_simplex_error, SimplexError(s));
    }
  }
  sync_tree(c.iters);
  record(c.iters);
  result.final_behavior = profile;
  return result;
}

}  // namespace

std::int64_t StepIndex(const ExperimentConfig& config, const GameSpec& game,
                       std::int64_t t) {
  if (config.eta_clock != "stage") return t;
  const bool stationary = game.extensive
                              ? game.bet.mode == ScheduleMode::kStatic
                              : game.nfg.mode == ScheduleMode::kStatic;
  if (stationary) return t;
  const std::vector<std::int64_t> starts =
      game.extensive ? game.bet.StageStarts() : game.nfg.StageStarts();
  return t - starts[game.StageAt(t)];
}

SeedResult RunSeed(const ExperimentConfig& resolved, const GameSpec& game,
                   std::uint64_t seed) {
  return game.extensive ? RunExtensiveForm(resolved, game, seed)
                        : RunNormalForm(resolved, game, seed);
}

int ThreadBudget() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BNNLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = cap;
  }
  return std::max(1, n);
}

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  ExperimentResult result;
  result.config = ResolveConfig(config);
  result.game = ParseGameSpec(result.config.game, result.config.schedule);
  const ExperimentConfig& c = result.config;
  const std::size_t n = c.seeds.size();
  result.seeds.resize(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        result.seeds[i] = RunSeed(c, result.game, c.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(ThreadBudget(), static_cast<int>(n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.mean = MeanTrace(result.seeds);
  const StepSchedule step = StepSchedule::Parse(c.eta);
  if (!result.game.extensive) {
    result.eta_per_step.reserve(static_cast<std::size_t>(c.iters));
    for (std::int64_t t = 0; t < c.iters; ++t) {
      result.eta_per_step.push_back(step.Eta(StepIndex(c, result.game, t)));
    }
  }
  return result;
}

std::vector<MeanRecord> MeanTrace(const std::vector<SeedResult>& seeds) {
  std::vector<MeanRecord> mean;
  if (seeds.empty()) return mean;
  const std::size_t len = seeds.front().trace.size();
  for (const SeedResult& s : seeds) {
    if (s.trace.size() != len) {
      throw ShapeError("MeanTrace: seeds have traces of different length");
    }
  }
  const double n = static_cast<double>(seeds.size());
  auto stats = [&](std::size_t k, auto field) {
    double sum = 0.0;
    for (const SeedResult& s : seeds) sum += field(s.trace[k]);
    const double m = sum / n;
    if (seeds.size() < 2) return std::pair{m, 0.0};
    double ss = 0.0;
    for (const SeedResult& s : seeds) {
      const double d = field(s.trace[k]) - m;
      ss += d * d;
    }
    return std::pair{m, std::sqrt(ss / (n - 1.0) / n)};
  };
  mean.reserve(len);
  for (std::size_t k = 0; k < len; ++k) {
    const TraceRecord& first = seeds.front().trace[k];
    MeanRecord r;
    r.t = first.t;
    std::tie(r.nash_conv, r.nash_conv_stderr) =
        stats(k, [](const TraceRecord& x) { return x.nash_conv; });
    std::tie(r.gamma, r.gamma_stderr) =
        stats(k, [](const TraceRecord& x) { return x.gamma; });
    std::tie(r.s_mass, r.s_mass_stderr) =
        stats(k, [](const TraceRecord& x) { return x.s_mass; });
    r.floor_events =
        stats(k, [](const TraceRecord& x) {
          return static_cast<double>(x.floor_events);
        }).first;
    r.sigma = first.sigma;
    r.eta_t = first.eta_t;
    r.stage_id = first.stage_id;
    r.min_external_reach = first.min_external_reach;
    for (const SeedResult& s : seeds) {
      r.min_external_reach =
          std::min(r.min_external_reach, s.trace[k].min_external_reach);
    }
    mean.push_back(r);
  }
  return mean;
}

std::vector<StageSummary> SummarizeStages(const ExperimentResult& result) {
  const GameSpec& g = result.game;
  const bool stationary = g.extensive ? g.bet.mode == ScheduleMode::kStatic
                                      : g.nfg.mode == ScheduleMode::kStatic;
  std::vector<std::int64_t> starts =
      stationary ? std::vector<std::int64_t>{0}
                 : (g.extensive ? g.bet.StageStarts() : g.nfg.StageStarts());
  std::vector<StageSummary> out;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    StageSummary s;
    s.stage_id = static_cast<int>(k);
    s.t_start = starts[k];
    s.t_end = k + 1 < starts.size() ? starts[k + 1]
                                    : std::max(result.config.iters + 1, starts[k]);
    std::vector<const MeanRecord*> rows;
    for (const MeanRecord& r : result.mean) {
      if (r.t >= s.t_start && r.t < s.t_end) rows.push_back(&r);
    }
    if (rows.empty()) break;
    double sum = 0.0;
    for (const MeanRecord* r : rows) sum += r->nash_conv;
    s.mean_nash_conv = sum / static_cast<double>(rows.size());
    const std::size_t tail =
        std::max<std::size_t>(1, rows.size() / 10);
    double tail_sum = 0.0;
    for (std::size_t i = rows.size() - tail; i < rows.size(); ++i) {
      tail_sum += rows[i]->nash_conv;
    }
    s.floor_estimate = tail_sum / static_cast<double>(tail);
    if (!out.empty()) {
      const double threshold =
          result.config.recovery_factor * out.back().floor_estimate;
      for (const MeanRecord* r : rows) {
        if (r->nash_conv < threshold) {
          s.recovery_time = r->t - s.t_start;
          break;
        }
      }
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace bnnlab
