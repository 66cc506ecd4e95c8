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
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bnnlab/errors.h"
#include "bnnlab/harness.h"
#include "bnnlab/lyapunov.h"
#include "fmt/format.h"
#include "json.hpp"

namespace bnnlab {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::uint64_t kBiasStreamSalt = 0x2545f4914f6cdd1dULL;

// Shortest round-trip representation, so reruns are byte-identical and no
// precision is lost.
std::string Num(double v) { return fmt::format("{}", v); }

void WriteFile(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << bytes;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

MeanWithError MeanAndStderr(const std::vector<double>& v) {
  MeanWithError out;
  if (v.empty()) return out;
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    const double n = static_cast<double>(v.size());
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

Json StagesJson(const std::vector<StageSummary>& stages) {
  Json arr = Json::array();
  for (const StageSummary& s : stages) {
    Json j;
    j["stage_id"] = s.stage_id;
    j["t_start"] = s.t_start;
    j["t_end"] = s.t_end;
    j["mean_nash_conv"] = s.mean_nash_conv;
    j["floor_estimate"] = s.floor_estimate;
    j["recovery_time"] =
        s.recovery_time ? Json(*s.recovery_time) : Json(nullptr);
    arr.push_back(j);
  }
  return arr;
}

Json ProfileJson(const MixedProfile& p) {
  return Json::array({Json(p[0]), Json(p[1])});
}

Json SummaryObject(const ExperimentResult& result) {
  const ExperimentConfig& c = result.config;
  Json j;
  j["schema"] = "bnnlab-summary-v1";
  Json config;
  for (const std::string& key : ConfigKeys()) {
    config[key] = ConfigEntries(c).at(key);
  }
  j["config"] = config;

  Json game;
  game["name"] = result.game.name;
  game["extensive"] = result.game.extensive;
  game["schedule_mode"] = ScheduleModeName(
      result.game.extensive ? result.game.bet.mode : result.game.nfg.mode);
  game["num_stages"] = result.game.num_stages();
  if (result.game.extensive) game["negative_bet"] = result.game.negative_bet;
  j["game"] = game;

  std::vector<std::int64_t> ts;
  std::vector<double> gs;
  for (const MeanRecord& r : result.mean) {
    if (r.t <= 0) continue;
    ts.push_back(r.t);
    gs.push_back(r.gamma);
  }
  if (ts.size() >= 3) {
    const RateFit fit = FitRate(ts, gs);
    Json f;
    f["t_start"] = fit.t_start;
    f["t_end"] = fit.t_end;
    f["slope"] = fit.slope;
    f["intercept"] = fit.intercept;
    f["r_squared"] = fit.r_squared;
    f["window_shrunk"] = fit.window_shrunk;
    j["rate_fit"] = f;
    j["floor_estimate"] = fit.floor_estimate;
  }

  std::vector<double> tail_gamma;
  std::vector<double> tail_nc;
  std::vector<double> final_nc;
  double max_simplex_error = 0.0;
  std::int64_t floor_events = 0;
  for (const SeedResult& s : result.seeds) {
    const std::size_t n = s.trace.size();
    const std::size_t tail = std::max<std::size_t>(1, n / 10);
    double g = 0.0;
    double nc = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) {
      g += s.trace[i].gamma;
      nc += s.trace[i].nash_conv;
    }
    tail_gamma.push_back(g / static_cast<double>(tail));
    tail_nc.push_back(nc / static_cast<double>(tail));
    final_nc.push_back(s.trace.back().nash_conv);
    max_simplex_error = std::max(max_simplex_error, s.max_simplex_error);
    floor_events += s.trace.back().floor_events;
  }
  const MeanWithError tg = MeanAndStderr(tail_gamma);
  const MeanWithError tn = MeanAndStderr(tail_nc);
  const MeanWithError fn = MeanAndStderr(final_nc);
  j["tail"] = {{"gamma_mean", tg.mean},
               {"gamma_stderr", tg.se},
               {"nash_conv_mean", tn.mean},
               {"nash_conv_stderr", tn.se}};
  j["final"] = {{"nash_conv_mean", fn.mean}, {"nash_conv_stderr", fn.se}};
  j["stages"] = StagesJson(SummarizeStages(result));
  j["floor_events_total"] = floor_events;
  j["max_simplex_error"] = max_simplex_error;

  if (result.game.extensive) {
    double min_reach = 1.0;
    for (const SeedResult& s : result.seeds) {
      min_reach = std::min(min_reach, s.min_external_reach);
    }
    j["min_external_reach"] = min_reach;
    return j;
  }

  const NormalFormGame game_end = GameAt(result.game.nfg, c.iters);
  const bool stationary = result.game.nfg.mode == ScheduleMode::kStatic;
  if (stationary) {
    std::vector<MixedProfile> tails;
    std::array<std::vector<double>, kNumPlayers> per_player;
    for (const SeedResult& s : result.seeds) {
      tails.push_back(s.tail_mean);
      for (Player q = 0; q < kNumPlayers; ++q) {
        per_player[q].push_back(s.tail_gamma[q]);
      }
    }
    const CentroidShiftResult cs = CentroidShift(tails, game_end);
    j["centroid"] = {{"profile", ProfileJson(cs.centroid)},
                     {"gamma", cs.gamma},
                     {"gamma_per_player", cs.gamma_per_player}};
    Json pp = Json::array();
    for (Player q = 0; q < kNumPlayers; ++q) {
      const MeanWithError m = MeanAndStderr(per_player[q]);
      pp.push_back({{"mean", m.mean}, {"stderr", m.se}});
    }
    j["tail_gamma_per_player"] = pp;

    std::vector<double> g(result.seeds.front().gamma_one.size(), 0.0);
    for (const SeedResult& s : result.seeds) {
      for (std::size_t t = 0; t < g.size(); ++t) g[t] += s.gamma_one[t];
    }
    for (double& v : g) v /= static_cast<double>(result.seeds.size());
    const DriftReport drift =
        DriftCheck(g, result.eta_per_step, c.sigma,
                   game_end.NumActions(kPlayerOne),
                   static_cast<int>(result.seeds.size()));
    j["drift"] = {{"c3", drift.c3},
                  {"conforming_fraction", drift.conforming_fraction},
                  {"too_few_seeds", drift.too_few_seeds}};
  }

  if (c.bias_table) {
    Json table = Json::array();
    NoiseSpec spec;
    spec.distribution = c.noise == "uniform" ? NoiseDistribution::kUniform
                                             : NoiseDistribution::kGaussian;
    spec.sigma = c.sigma;
    NoiseModel noise(spec, c.seeds.front() ^ kBiasStreamSalt);
    const MixedProfile& at = result.seeds.front().final_profile;
    for (Player q = 0; q < kNumPlayers; ++q) {
      const BiasEstimate b =
          EstimateBias(game_end, at, q, noise, c.bias_samples);
      for (std::size_t a = 0; a < b.beta.size(); ++a) {
        table.push_back({{"player", q + 1},
                         {"action", a},
                         {"beta", b.beta[a].mean},
                         {"beta_stderr", b.beta[a].se},
                         {"jensen_gap", b.jensen_gap[a].mean},
                         {"jensen_gap_stderr", b.jensen_gap[a].se},
                         {"identity_residual", b.identity_residual[a].mean}});
      }
    }
    j["bias_table"] = {{"profile", ProfileJson(at)},
                       {"n_samples", c.bias_samples},
                       {"rows", table}};
  }
  return j;
}

std::string Sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' ||
                    ch == '-' || ch == '_';
    out += ok ? ch : '_';
  }
  return out;
}

}  // namespace

std::string TraceCsv(const std::vector<TraceRecord>& trace) {
  std::string out = fmt::format("# schema: {}\n", kTraceSchema);
  out +=
      "t,seed,nash_conv,gamma,s_mass,sigma,eta_t,floor_events,"
      "min_external_reach,stage_id\n";
  for (const TraceRecord& r : trace) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.t, r.seed,
                       Num(r.nash_conv), Num(r.gamma), Num(r.s_mass),
                       Num(r.sigma), Num(r.eta_t), r.floor_events,
                       Num(r.min_external_reach), r.stage_id);
  }
  return out;
}

std::string MeanTraceCsv(const std::vector<MeanRecord>& mean) {
  std::string out = fmt::format("# schema: {}-mean\n", kTraceSchema);
  out +=
      "t,nash_conv,nash_conv_stderr,gamma,gamma_stderr,s_mass,s_mass_stderr,"
      "sigma,eta_t,floor_events,min_external_reach,stage_id\n";
  for (const MeanRecord& r : mean) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.t,
                       Num(r.nash_conv), Num(r.nash_conv_stderr), Num(r.gamma),
                       Num(r.gamma_stderr), Num(r.s_mass), Num(r.s_mass_stderr),
                       Num(r.sigma), Num(r.eta_t), Num(r.floor_events),
                       Num(r.min_external_reach), r.stage_id);
  }
  return out;
}

std::string SummaryJson(const ExperimentResult& result) {
  return SummaryObject(result).dump(2) + "\n";
}

void WriteExperiment(const ExperimentResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  for (const SeedResult& s : result.seeds) {
    WriteFile(dir / fmt::format("trace_seed{}.csv", s.seed), TraceCsv(s.trace));
  }
  WriteFile(dir / "trace_mean.csv", MeanTraceCsv(result.mean));
  WriteFile(dir / "summary.json", SummaryJson(result));
}

// ---------------------------------------------------------------------------
// Comparison

Comparison Compare(
    const std::vector<std::pair<std::string, ExperimentConfig>>& configs) {
  if (configs.size() < 2) {
    throw ConfigError("compare: needs at least two algorithm specs");
  }
  std::vector<ExperimentConfig> resolved;
  std::set<std::string> labels;
  for (const auto& [label, config] : configs) {
    if (!labels.insert(label).second) {
      throw ConfigError(fmt::format("compare: duplicate label '{}'", label));
    }
    resolved.push_back(ResolveConfig(config));
  }
  const ExperimentConfig& ref = resolved.front();
  for (const ExperimentConfig& c : resolved) {
    if (c.game != ref.game || c.schedule != ref.schedule) {
      throw ConfigError(fmt::format(
          "compare: mismatched games ('{}' with schedule '{}' vs '{}' with "
          "schedule '{}')",
          ref.game, ref.schedule, c.game, c.schedule));
    }
    if (c.iters != ref.iters || c.seeds != ref.seeds ||
        c.eval_interval != ref.eval_interval) {
      throw ConfigError(
          "compare: iterations, eval_interval and seeds must be shared");
    }
  }
  Comparison out;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    ComparisonEntry e;
    e.label = configs[i].first;
    e.result = RunExperiment(resolved[i]);
    e.stages = SummarizeStages(e.result);
    out.entries.push_back(std::move(e));
  }
  return out;
}

std::vector<std::pair<std::string, ExperimentConfig>> RegRdGrid(
    const ExperimentConfig& base, const std::vector<double>& lambdas,
    const std::vector<std::int64_t>& k_refs) {
  std::vector<std::pair<std::string, ExperimentConfig>> out;
  for (double lambda : lambdas) {
    for (std::int64_t k : k_refs) {
      ExperimentConfig c = base;
      c.algo = "reg-rd";
      c.lambda = lambda;
      c.k_ref = k;
      out.emplace_back(fmt::format("reg-rd_lambda{}_k{}", Num(lambda), k), c);
    }
  }
  return out;
}

std::string ComparisonJson(const Comparison& comparison) {
  Json j;
  j["schema"] = "bnnlab-comparison-v1";
  Json entries = Json::array();
  for (const ComparisonEntry& e : comparison.entries) {
    Json x;
    x["label"] = e.label;
    x["algo"] = e.result.config.algo;
    x["lambda"] = e.result.config.lambda;
    x["k_ref"] = e.result.config.k_ref;
    x["stages"] = StagesJson(e.stages);
    x["final_stage_mean_nash_conv"] =
        e.stages.empty() ? 0.0 : e.stages.back().mean_nash_conv;
    entries.push_back(x);
  }
  j["entries"] = entries;
  return j.dump(2) + "\n";
}

std::string ComparisonCsv(const Comparison& comparison) {
  std::string out =
      "label,algo,lambda,k_ref,stage,mean_nash_conv,recovery_time\n";
  for (const ComparisonEntry& e : comparison.entries) {
    for (const StageSummary& s : e.stages) {
      out += fmt::format(
          "{},{},{},{},{},{},{}\n", e.label, e.result.config.algo,
          Num(e.result.config.lambda), e.result.config.k_ref, s.stage_id,
          Num(s.mean_nash_conv),
          s.recovery_time ? std::to_string(*s.recovery_time) : "");
    }
  }
  return out;
}

namespace {

std::string GridCsv(const Comparison& comparison) {
  std::string out =
      "lambda,k_ref,final_stage_mean_nash_conv,max_recovery_time\n";
  for (const ComparisonEntry& e : comparison.entries) {
    if (e.result.config.algo != "reg-rd") continue;
    std::optional<std::int64_t> worst = 0;
    for (std::size_t k = 1; k < e.stages.size(); ++k) {
      if (!e.stages[k].recovery_time) {
        worst.reset();
        break;
      }
      worst = std::max(*worst, *e.stages[k].recovery_time);
    }
    out += fmt::format("{},{},{},{}\n", Num(e.result.config.lambda),
                       e.result.config.k_ref,
                       Num(e.stages.empty() ? 0.0
                                            : e.stages.back().mean_nash_conv),
                       worst ? std::to_string(*worst) : "inf");
  }
  return out;
}

}  // namespace

void WriteComparison(const Comparison& comparison, const fs::path& dir) {
  fs::create_directories(dir);
  for (const ComparisonEntry& e : comparison.entries) {
    WriteExperiment(e.result, dir / Sanitize(e.label));
  }
  WriteFile(dir / "comparison.json", ComparisonJson(comparison));
  WriteFile(dir / "comparison.csv", ComparisonCsv(comparison));
  WriteFile(dir / "grid.csv", GridCsv(comparison));
}

// ---------------------------------------------------------------------------
// Plot data

std::vector<fs::path> EmitPlotData(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ConfigError(fmt::format("plot-data: '{}' is not a directory",
                                  dir.string()));
  }
  const fs::path plot_dir = dir / "plot";
  std::vector<fs::path> runs;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().filename() != "summary.json") {
      continue;
    }
    const fs::path run = entry.path().parent_path();
    if (fs::exists(run / "trace_mean.csv")) runs.push_back(run);
  }
  std::sort(runs.begin(), runs.end());
  if (runs.empty()) {
    throw ConfigError(
        fmt::format("plot-data: no traces found under '{}'", dir.string()));
  }
  fs::create_directories(plot_dir);
  std::vector<fs::path> written;
  std::set<std::string> used;
  std::string script =
      "# gnuplot script stub\nset logscale y\nset xlabel 't'\n"
      "set ylabel 'NashConv'\nplot \\\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Json summary = Json::parse(ReadFile(runs[i] / "summary.json"));
    const Json& cfg = summary.at("config");
    const std::string schedule = cfg.at("schedule").get<std::string>();
    std::string name = fmt::format(
        "{}{}_{}_sigma{}", cfg.at("game").get<std::string>(),
        schedule == "static" ? "" : "_" + schedule,
        cfg.at("algo").get<std::string>(), cfg.at("sigma").get<std::string>());
    if (!used.insert(name).second) {
      name += "_" + Sanitize(fs::relative(runs[i], dir).string());
      used.insert(name);
    }
    name = Sanitize(name);
    std::string data = std::string(kPlotHeader) + "\n";
    std::istringstream csv(ReadFile(runs[i] / "trace_mean.csv"));
    std::string line;
    while (std::getline(csv, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 't') continue;
      std::istringstream fields(line);
      std::string t, mean, se;
      std::getline(fields, t, ',');
      std::getline(fields, mean, ',');
      std::getline(fields, se, ',');
      const double m = std::stod(mean);
      const double s = std::stod(se);
      data += fmt::format("{} {} {} {} {}\n", t, mean, se, Num(m - s),
                          Num(m + s));
    }
    const fs::path out = plot_dir / (name + ".dat");
    WriteFile(out, data);
    written.push_back(out);
    script += fmt::format("  '{}.dat' using 1:2:3 with yerrorlines title '{}'{}\n",
                          name, name, i + 1 < runs.size() ? ", \\" : "");
  }
  WriteFile(plot_dir / "plot.gp", script);
  return written;
}

// ---------------------------------------------------------------------------
// Figures preset

namespace {

struct FigureScale {
  double factor;
  std::int64_t Iters(std::int64_t full) const {
    return std::max<std::int64_t>(10, std::llround(full * factor));
  }
  std::vector<std::uint64_t> Seeds(std::uint64_t full) const {
    const auto n = std::max<std::uint64_t>(
        2, static_cast<std::uint64_t>(std::llround(full * factor)));
    std::vector<std::uint64_t> s(n);
    for (std::uint64_t i = 0; i < n; ++i) s[i] = i;
    return s;
  }
};

void RunAndWrite(const ExperimentConfig& c, const fs::path& dir) {
  WriteExperiment(RunExperiment(c), dir);
}

void CompareAndWrite(const ExperimentConfig& base,
                     const std::vector<std::string>& algos,
                     const fs::path& dir) {
  std::vector<std::pair<std::string, ExperimentConfig>> configs;
  for (const std::string& a : algos) {
    ExperimentConfig c = base;
    c.algo = a;
    configs.emplace_back(a, c);
  }
  WriteComparison(Compare(configs), dir);
}

}  // namespace

void RunFiguresPreset(const std::string& preset, const fs::path& out,
                      double scale) {
  if (preset != "appendix") {
    throw ConfigError(fmt::format("figures: unknown preset '{}'", preset));
  }
  if (!(scale > 0.0 && scale <= 1.0)) {
    throw ConfigError("figures: scale must lie in (0, 1]");
  }
  const FigureScale fs_{scale};
  Json index = Json::array();
  auto note = [&](const std::string& fig, const std::string& what) {
    index.push_back({{"figure", fig}, {"description", what}});
  };

  // Stationary BRPS / BRPS-W without noise.
  for (const std::string game : {"brps", "brps_w"}) {
    for (const std::string algo : {"bnn", "reg-rd"}) {
      ExperimentConfig c;
      c.game = game;
      c.algo = algo;
      c.iters = fs_.Iters(20000);
      c.seeds = fs_.Seeds(10);
      RunAndWrite(c, out / "fig1" / fmt::format("{}_{}", game, algo));
    }
  }
  note("fig1", "stationary BRPS and BRPS-W, no noise");

  // Nonstationary BRPS, without and with noise.
  for (int k = 1; k <= 4; ++k) {
    ExperimentConfig c;
    c.game = "brps";
    c.schedule = fmt::format("case{}", k);
    c.iters = ParseGameSpec(c.game, c.schedule).nfg.TotalDuration();
    c.seeds = fs_.Seeds(10);
    CompareAndWrite(c, {"bnn", "reg-rd"}, out / "fig2" / c.schedule);
    for (double sigma : {0.1, 0.2}) {
      c.sigma = sigma;
      CompareAndWrite(c, {"bnn", "reg-rd"},
                      out / "fig3" / fmt::format("{}_sigma{}", c.schedule, sigma));
    }
  }
  note("fig2", "nonstationary BRPS cases 1-4, no noise");
  note("fig3", "nonstationary BRPS cases 1-4, sigma in {0.1, 0.2}");

  // Stationary poker.
  for (const std::string game : {"leduc", "kuhn"}) {
    const bool leduc = game == "leduc";
    for (double sigma : {0.0, 0.1}) {
      for (const std::string algo : {"bnnac", "reg-rd"}) {
        ExperimentConfig c;
        c.game = game;
        c.algo = algo;
        c.sigma = sigma;
        c.iters = fs_.Iters(leduc ? 2000 : 20000);
        c.eval_interval = leduc ? 100 : 200;
        c.seeds = fs_.Seeds(leduc ? 3 : 5);
        RunAndWrite(c, out / (leduc ? "fig4" : "fig5") /
                           fmt::format("{}_sigma{}", algo, sigma));
      }
    }
  }
  note("fig4", "stationary Leduc, sigma in {0, 0.1}");
  note("fig5", "stationary Kuhn, sigma in {0, 0.1}");

  // Nonstationary Kuhn bet schedules with noise.
  for (const std::string mode : {"continuous", "direct"}) {
    ExperimentConfig c;
    c.game = "kuhn";
    const std::int64_t stage = fs_.Iters(5000);
    c.schedule = fmt::format("bets-{}@{}", mode, stage);
    c.iters = ParseGameSpec(c.game, c.schedule).bet.TotalDuration();
    c.eval_interval = std::max<std::int64_t>(1, stage / 50);
    c.sigma = 0.1;
    c.seeds = fs_.Seeds(5);
    CompareAndWrite(c, {"bnnac", "reg-rd"},
                    out / (mode == "continuous" ? "fig6" : "fig7"));
  }
  note("fig6", "Kuhn, bet size 1 -> 2 -> -2 -> 6 -> 1, continuous, sigma 0.1");
  note("fig7", "Kuhn, bet size 1 -> 2 -> -2 -> 6, direct, sigma 0.1");

  for (const char* fig : {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"}) {
    EmitPlotData(out / fig);
  }
  Json j;
  j["preset"] = preset;
  j["scale"] = scale;
  j["figures"] = index;
  WriteFile(out / "figures.json", j.dump(2) + "\n");
}

}  // namespace bnnlab
