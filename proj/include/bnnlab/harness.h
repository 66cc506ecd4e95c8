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


#ifndef BNNLAB_HARNESS_H_
#define BNNLAB_HARNESS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bnnlab/bnnac.h"
#include "bnnlab/dynamics.h"
#include "bnnlab/game_tree.h"
#include "bnnlab/normal_form.h"
#include "bnnlab/schedule.h"

namespace bnnlab {

inline constexpr char kTraceSchema[] = "bnnlab-trace-v1";

enum class Algorithm { kBnn, kReplicator, kRegRd, kBnnac };

Algorithm ParseAlgorithm(const std::string& name);
std::string AlgorithmName(Algorithm algo);

// Every field has a default; "eta" and "eval_interval" are resolved per game
// family when left empty / zero.
struct ExperimentConfig {
  std::string game = "brps";
  std::string schedule = "static";
  std::string algo = "bnn";
  std::string noise = "gauss";
  double sigma = 0.0;
  std::string eta;
  // "global": the step schedule runs on the iteration count; "stage": it
  // restarts whenever the game schedule enters a new stage.
  std::string eta_clock = "stage";
  std::int64_t iters = 10000;
  std::int64_t eval_interval = 0;
  std::vector<std::uint64_t> seeds = {0};
  std::string out = "bnnlab_out";
  std::string init = "random";
  double lambda = 0.1;
  std::int64_t k_ref = 100;
  std::int64_t k_actor = 10;
  int batch = 16;
  double alpha = 0.1;
  double beta = 0.1;
  double policy_floor = 1e-3;
  bool oracle_tables = false;
  double simplex_floor = kSimplexFloor;
  bool bias_table = false;
  std::int64_t bias_samples = 10000;
  double recovery_factor = 1.5;
};

// Keys accepted by SetConfigValue, in documentation order.
const std::vector<std::string>& ConfigKeys();

// Sets one key from its textual value. Throws ConfigError naming the field.
void SetConfigValue(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

// Parses a flat "key = value" file ('#' starts a comment). Errors carry
// "<source>:<line>: <field>: <reason>".
ExperimentConfig ParseConfigText(const std::string& text,
                                 const std::string& source = "<config>",
                                 ExperimentConfig base = {});
ExperimentConfig LoadConfigFile(const std::filesystem::path& path,
                                ExperimentConfig base = {});

// "0..29", "1,5,9" or a mix such as "0..3,10".
std::vector<std::uint64_t> ParseSeedList(const std::string& text);

// Fills family-dependent defaults and checks every field; throws ConfigError.
ExperimentConfig ResolveConfig(ExperimentConfig config);

// Key/value rendering of a resolved config, used for provenance.
std::map<std::string, std::string> ConfigEntries(const ExperimentConfig& config);

// Game side of an experiment: exactly one of the two schedules is used.
struct GameSpec {
  bool extensive = false;
  std::string name;
  ParamSchedule nfg;
  ScalarSchedule bet;  // Kuhn bet size; unused for Leduc
  bool negative_bet = false;
  int num_stages() const;
  int StageAt(std::int64_t t) const;
};

// Builds the game schedule from `game` and `schedule`. Accepted schedules:
// "static"; "case1".."case4" (BRPS stages of 2500/1250 steps);
// "bets-direct[@N]" and "bets-continuous[@N]" (Kuhn bet stages of N steps);
// "direct:<stage>;..." and "continuous:<stage>;..." where a stage is
// "a_rp,a_ps,a_sr@N" for normal-form games or "bet@N" for Kuhn.
GameSpec ParseGameSpec(const std::string& game, const std::string& schedule);

// Index fed to the step-size schedule at iteration t under the config's
// eta_clock.
std::int64_t StepIndex(const ExperimentConfig& config, const GameSpec& game,
                       std::int64_t t);

struct TraceRecord {
  std::int64_t t = 0;
  std::uint64_t seed = 0;
  double nash_conv = 0.0;
  double gamma = 0.0;
  double s_mass = 0.0;
  double sigma = 0.0;
  double eta_t = 0.0;
  std::int64_t floor_events = 0;
  double min_external_reach = 1.0;
  int stage_id = 0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<TraceRecord> trace;
  // Normal-form runs only.
  MixedProfile final_profile;
  MixedProfile tail_mean;  // average iterate over the last 20% of steps
  std::array<double, kNumPlayers> tail_gamma{};  // mean over last 10% of records
  std::vector<double> gamma_one;  // Gamma of player one after every step
  // Extensive-form runs only.
  BehaviorProfile final_behavior;
  double min_external_reach = 1.0;
  // Largest simplex-invariant violation seen after any step.
  double max_simplex_error = 0.0;
};

struct MeanRecord {
  std::int64_t t = 0;
  double nash_conv = 0.0;
  double nash_conv_stderr = 0.0;
  double gamma = 0.0;
  double gamma_stderr = 0.0;
  double s_mass = 0.0;
  double s_mass_stderr = 0.0;
  double sigma = 0.0;
  double eta_t = 0.0;
  double floor_events = 0.0;
  double min_external_reach = 1.0;
  int stage_id = 0;
};

struct StageSummary {
  int stage_id = 0;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  double mean_nash_conv = 0.0;
  double floor_estimate = 0.0;  // seed-mean NashConv over the last 10%
  // First t after the stage start where seed-mean NashConv is below
  // recovery_factor times the previous stage's floor estimate; empty for
  // the first stage or when never reached.
  std::optional<std::int64_t> recovery_time;
};

struct ExperimentResult {
  ExperimentConfig config;  // resolved
  GameSpec game;
  std::vector<SeedResult> seeds;  // in config seed order
  std::vector<MeanRecord> mean;
  std::vector<double> eta_per_step;  // eta used at step t
};

// Runs one seed. Throws NumericalError with a state dump on a non-finite
// update.
SeedResult RunSeed(const ExperimentConfig& resolved, const GameSpec& game,
                   std::uint64_t seed);

// Runs every seed (in parallel, capped by BNNLAB_THREADS) and aggregates.
ExperimentResult RunExperiment(const ExperimentConfig& config);

std::vector<MeanRecord> MeanTrace(const std::vector<SeedResult>& seeds);
std::vector<StageSummary> SummarizeStages(const ExperimentResult& result);

// Thread count for seed-parallel work: BNNLAB_THREADS if set and positive,
// otherwise the hardware concurrency.
int ThreadBudget();

// Serialization. All functions return the exact bytes written to disk.
std::string TraceCsv(const std::vector<TraceRecord>& trace);
std::string MeanTraceCsv(const std::vector<MeanRecord>& mean);
std::string SummaryJson(const ExperimentResult& result);

// Writes trace_seed<k>.csv, trace_mean.csv and summary.json into `dir`.
void WriteExperiment(const ExperimentResult& result,
                     const std::filesystem::path& dir);

struct ComparisonEntry {
  std::string label;
  ExperimentResult result;
  std::vector<StageSummary> stages;
};

struct Comparison {
  std::vector<ComparisonEntry> entries;
};

// Runs every config; all must share game, schedule, iterations and seeds.
Comparison Compare(const std::vector<std::pair<std::string, ExperimentConfig>>&
                       labelled_configs);

// Expands a config into the reg-rd grid lambda x k_ref.
std::vector<std::pair<std::string, ExperimentConfig>> RegRdGrid(
    const ExperimentConfig& base, const std::vector<double>& lambdas = {0.05, 0.1, 0.2},
    const std::vector<std::int64_t>& k_refs = {100, 500});

std::string ComparisonJson(const Comparison& comparison);
// One row per (entry, stage): label,algo,lambda,k_ref,stage,mean_nash_conv,
// recovery_time.
std::string ComparisonCsv(const Comparison& comparison);
void WriteComparison(const Comparison& comparison,
                     const std::filesystem::path& dir);

// Scans `dir` recursively for run outputs and writes one whitespace-separated
// .dat file per (game, algorithm, sigma) plus a gnuplot script into
// `dir`/plot. Returns the written data files. Throws ConfigError when no
// traces are found.
std::vector<std::filesystem::path> EmitPlotData(const std::filesystem::path& dir);
inline constexpr char kPlotHeader[] =
    "# t mean stderr mean_minus_stderr mean_plus_stderr";

// Desk-scale run of the seven-figure experiment matrix ("appendix" preset),
// one sub-directory per figure. `scale` multiplies iteration budgets and seed
// counts (>0, <=1).
void RunFiguresPreset(const std::string& preset, const std::filesystem::path& out,
                      double scale = 1.0);

}  // namespace bnnlab

#endif  // BNNLAB_HARNESS_H_
