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
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "bnnlab/errors.h"
#include "bnnlab/harness.h"
#include "fmt/format.h"

namespace bnnlab {
namespace {

std::string Trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> Split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(Trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double ToDouble(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, value));
  }
  return v;
}

std::int64_t ToInt(const std::string& key, const std::string& value) {
  std::int64_t v = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError(
        fmt::format("{}: expected an integer, got '{}'", key, value));
  }
  return v;
}

std::uint64_t ToUnsigned(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ConfigError(
        fmt::format("{}: expected a non-negative integer, got '{}'", key, value));
  }
  return v;
}

bool ToBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(fmt::format("{}: expected true/false, got '{}'", key, value));
}

std::string FormatDouble(double v) { return fmt::format("{}", v); }

}  // namespace

Algorithm ParseAlgorithm(const std::string& name) {
  if (name == "bnn") return Algorithm::kBnn;
  if (name == "replicator") return Algorithm::kReplicator;
  if (name == "reg-rd") return Algorithm::kRegRd;
  if (name == "bnnac") return Algorithm::kBnnac;
  throw ConfigError(fmt::format("algo: unknown algorithm '{}'", name));
}

std::string AlgorithmName(Algorithm algo) {
  switch (algo) {
    case Algorithm::kBnn:
      return "bnn";
    case Algorithm::kReplicator:
      return "replicator";
    case Algorithm::kRegRd:
      return "reg-rd";
    case Algorithm::kBnnac:
      return "bnnac";
  }
  return "?";
}

const std::vector<std::string>& ConfigKeys() {
  static const std::vector<std::string> keys = {
      "game",          "schedule",     "algo",          "noise",
      "sigma",         "eta",          "eta_clock",          "iters",         "eval_interval",
      "seeds",         "out",          "init",          "lambda",
      "k_ref",         "k_actor",      "batch",         "alpha",
      "beta",          "policy_floor", "oracle_tables", "simplex_floor",
      "bias_table",    "bias_samples", "recovery_factor"};
  return keys;
}

std::vector<std::uint64_t> ParseSeedList(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& part : Split(text, ',')) {
    const std::size_t dots = part.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(ToUnsigned("seeds", part));
      continue;
    }
    const std::uint64_t lo = ToUnsigned("seeds", Trim(part.substr(0, dots)));
    const std::uint64_t hi = ToUnsigned("seeds", Trim(part.substr(dots + 2)));
    if (hi < lo) {
      throw ConfigError(fmt::format("seeds: empty range '{}'", part));
    }
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  std::vector<std::uint64_t> sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("seeds: duplicate seed");
  }
  return seeds;
}

void SetConfigValue(ExperimentConfig& c, const std::string& key,
                    const std::string& raw) {
  const std::string value = Trim(raw);
  if (key == "game") {
    c.game = value;
  } else if (key == "schedule") {
    c.schedule = value;
  } else if (key == "algo") {
    ParseAlgorithm(value);
    c.algo = value;
  } else if (key == "noise") {
    if (value.find(':') != std::string::npos || value == "none") {
      NoiseSpec spec;
      try {
        spec = NoiseSpec::Parse(value);
      } catch (const std::exception& e) {
        throw ConfigError(fmt::format("noise: {}", e.what()));
      }
      c.noise = spec.distribution == NoiseDistribution::kUniform ? "uniform"
                                                                 : "gauss";
      c.sigma = spec.sigma;
    } else if (value == "gauss" || value == "uniform") {
      c.noise = value;
    } else {
      throw ConfigError(fmt::format("noise: unknown distribution '{}'", value));
    }
  } else if (key == "sigma") {
    c.sigma = ToDouble(key, value);
  } else if (key == "eta") {
    if (!value.empty()) {
      try {
        StepSchedule::Parse(value);
      } catch (const std::exception& e) {
        throw ConfigError(fmt::format("eta: {}", e.what()));
      }
    }
    c.eta = value;
  } else if (key == "eta_clock") {
    if (value != "global" && value != "stage") {
      throw ConfigError(
          fmt::format("eta_clock: expected global or stage, got '{}'", value));
    }
    c.eta_clock = value;
  } else if (key == "iters") {
    c.iters = ToInt(key, value);
  } else if (key == "eval_interval") {
    c.eval_interval = ToInt(key, value);
  } else if (key == "seeds") {
    c.seeds = ParseSeedList(value);
  } else if (key == "out") {
    c.out = value;
  } else if (key == "init") {
    c.init = value;
  } else if (key == "lambda") {
    c.lambda = ToDouble(key, value);
  } else if (key == "k_ref") {
    c.k_ref = ToInt(key, value);
  } else if (key == "k_actor") {
    c.k_actor = ToInt(key, value);
  } else if (key == "batch") {
    c.batch = static_cast<int>(ToInt(key, value));
  } else if (key == "alpha") {
    c.alpha = ToDouble(key, value);
  } else if (key == "beta") {
    c.beta = ToDouble(key, value);
  } else if (key == "policy_floor") {
    c.policy_floor = ToDouble(key, value);
  } else if (key == "oracle_tables") {
    c.oracle_tables = ToBool(key, value);
  } else if (key == "simplex_floor") {
    c.simplex_floor = ToDouble(key, value);
  } else if (key == "bias_table") {
    c.bias_table = ToBool(key, value);
  } else if (key == "bias_samples") {
    c.bias_samples = ToInt(key, value);
  } else if (key == "recovery_factor") {
    c.recovery_factor = ToDouble(key, value);
  } else {
    throw ConfigError(fmt::format("{}: unknown key", key));
  }
}

ExperimentConfig ParseConfigText(const std::string& text,
                                 const std::string& source,
                                 ExperimentConfig base) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string body = Trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: {}: expected 'key = value'",
                                    source, line_no, body));
    }
    const std::string key = Trim(body.substr(0, eq));
    try {
      SetConfigValue(base, key, body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
  }
  return base;
}

ExperimentConfig LoadConfigFile(const std::filesystem::path& path,
                                ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("{}: cannot open config file", path.string()));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseConfigText(buffer.str(), path.string(), std::move(base));
}

ExperimentConfig ResolveConfig(ExperimentConfig c) {
  const GameSpec spec = ParseGameSpec(c.game, c.schedule);
  const Algorithm algo = ParseAlgorithm(c.algo);
  if (algo == Algorithm::kBnnac && !spec.extensive) {
    throw ConfigError("algo: bnnac requires an extensive-form game");
  }
  if (c.eta.empty()) {
    c.eta = spec.extensive && algo != Algorithm::kBnnac ? "power:c=10,t0=10"
                                                        : "power:c=1,t0=10";
  }
  try {
    StepSchedule::Parse(c.eta);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("eta: {}", e.what()));
  }
  if (c.eta_clock != "global" && c.eta_clock != "stage") {
    throw ConfigError(fmt::format("eta_clock: expected global or stage, got '{}'",
                                  c.eta_clock));
  }
  if (c.eval_interval == 0) c.eval_interval = spec.extensive ? 50 : 10;
  if (c.iters <= 0) throw ConfigError("iters: must be positive");
  if (c.eval_interval < 0) throw ConfigError("eval_interval: must be positive");
  if (c.seeds.empty()) throw ConfigError("seeds: empty seed list");
  {
    std::vector<std::uint64_t> sorted = c.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("seeds: duplicate seed");
    }
  }
  if (!(c.sigma >= 0.0)) throw ConfigError("sigma: must be non-negative");
  if (c.noise != "gauss" && c.noise != "uniform") {
    throw ConfigError(fmt::format("noise: unknown distribution '{}'", c.noise));
  }
  if (c.init != "random" && c.init != "uniform") {
    throw ConfigError(fmt::format("init: expected random or uniform, got '{}'",
                                  c.init));
  }
  if (!(c.lambda >= 0.0)) throw ConfigError("lambda: must be non-negative");
  if (c.k_ref <= 0) throw ConfigError("k_ref: must be positive");
  if (!(c.simplex_floor > 0.0 && c.simplex_floor < 0.1)) {
    throw ConfigError("simplex_floor: must lie in (0, 0.1)");
  }
  if (c.bias_samples <= 0) throw ConfigError("bias_samples: must be positive");
  if (!(c.recovery_factor > 0.0)) {
    throw ConfigError("recovery_factor: must be positive");
  }
  if (algo == Algorithm::kBnnac) {
    BnnacConfig b;
    b.k_actor = c.k_actor;
    b.batch = c.batch;
    b.alpha = c.alpha;
    b.beta = c.beta;
    b.policy_floor = c.policy_floor;
    b.Validate();
  }
  return c;
}

std::map<std::string, std::string> ConfigEntries(const ExperimentConfig& c) {
  std::string seeds;
  for (std::size_t i = 0; i < c.seeds.size(); ++i) {
    if (i > 0) seeds += ',';
    seeds += std::to_string(c.seeds[i]);
  }
  return {
      {"game", c.game},
      {"schedule", c.schedule},
      {"algo", c.algo},
      {"noise", c.noise},
      {"sigma", FormatDouble(c.sigma)},
      {"eta", c.eta},
      {"eta_clock", c.eta_clock},
      {"iters", std::to_string(c.iters)},
      {"eval_interval", std::to_string(c.eval_interval)},
      {"seeds", seeds},
      {"out", c.out},
      {"init", c.init},
      {"lambda", FormatDouble(c.lambda)},
      {"k_ref", std::to_string(c.k_ref)},
      {"k_actor", std::to_string(c.k_actor)},
      {"batch", std::to_string(c.batch)},
      {"alpha", FormatDouble(c.alpha)},
      {"beta", FormatDouble(c.beta)},
      {"policy_floor", FormatDouble(c.policy_floor)},
      {"oracle_tables", c.oracle_tables ? "true" : "false"},
      {"simplex_floor", FormatDouble(c.simplex_floor)},
      {"bias_table", c.bias_table ? "true" : "false"},
      {"bias_samples", std::to_string(c.bias_samples)},
      {"recovery_factor", FormatDouble(c.recovery_factor)},
  };
}

// ---------------------------------------------------------------------------
// Game specs

namespace {

std::int64_t ParseDuration(const std::string& text) {
  const std::int64_t n = ToInt("schedule", text);
  if (n <= 0) throw ConfigError("schedule: stage durations must be positive");
  return n;
}

ParamSchedule BrpsCase(int which, bool fourth) {
  const std::int64_t len = which <= 2 ? 2500 : 1250;
  ParamSchedule s;
  s.mode = which % 2 == 1 ? ScheduleMode::kDirect : ScheduleMode::kContinuous;
  for (const auto& p : {std::array<double, 3>{12, 1, 1},
                        std::array<double, 3>{6.5, 6.5, 1},
                        std::array<double, 3>{1, 12, 1}}) {
    s.stages.push_back({RpsParams{p[0], p[1], p[2], fourth}, len});
  }
  return s;
}

}  // namespace

int GameSpec::num_stages() const {
  return static_cast<int>(extensive ? bet.stages.size() : nfg.stages.size());
}

int GameSpec::StageAt(std::int64_t t) const {
  return extensive ? bet.StageAt(t) : nfg.StageAt(t);
}

GameSpec ParseGameSpec(const std::string& game, const std::string& schedule) {
  GameSpec spec;
  spec.name = game;
  if (IsNormalFormGameName(game)) {
    const RpsParams base = NamedRpsParams(game);
    if (schedule == "static") {
      spec.nfg = ParamSchedule::Constant(base);
    } else if (schedule.size() == 5 && schedule.rfind("case", 0) == 0 &&
               schedule[4] >= '1' && schedule[4] <= '4') {
      spec.nfg = BrpsCase(schedule[4] - '0', base.with_fourth_action);
    } else {
      const std::size_t colon = schedule.find(':');
      const std::string mode = schedule.substr(0, colon);
      if (colon == std::string::npos || (mode != "direct" && mode != "continuous")) {
        throw ConfigError(fmt::format("schedule: unknown schedule '{}'", schedule));
      }
      spec.nfg.mode = mode == "direct" ? ScheduleMode::kDirect
                                       : ScheduleMode::kContinuous;
      for (const std::string& stage : Split(schedule.substr(colon + 1), ';')) {
        const std::size_t at = stage.find('@');
        if (at == std::string::npos) {
          throw ConfigError(fmt::format("schedule: stage '{}' lacks '@N'", stage));
        }
        const std::vector<std::string> v = Split(stage.substr(0, at), ',');
        if (v.size() != 3) {
          throw ConfigError(fmt::format(
              "schedule: stage '{}' needs three payoff parameters", stage));
        }
        RpsParams p{ToDouble("schedule", v[0]), ToDouble("schedule", v[1]),
                    ToDouble("schedule", v[2]), base.with_fourth_action};
        spec.nfg.stages.push_back({p, ParseDuration(stage.substr(at + 1))});
      }
    }
    spec.nfg.Validate();
    return spec;
  }
  if (!IsExtensiveFormGameName(game)) {
    throw ConfigError(fmt::format("game: unknown game '{}'", game));
  }
  spec.extensive = true;
  if (schedule == "static") {
    spec.bet = ScalarSchedule::Constant(1.0);
    return spec;
  }
  if (game != "kuhn") {
    throw ConfigError("schedule: only kuhn supports bet-size schedules");
  }
  const std::size_t at_pos = schedule.find('@');
  const std::string head = schedule.substr(0, at_pos);
  if (head == "bets-direct" || head == "bets-continuous") {
    const std::int64_t len = at_pos == std::string::npos
                                 ? 25000
                                 : ParseDuration(schedule.substr(at_pos + 1));
    const bool continuous = head == "bets-continuous";
    spec.bet.mode =
        continuous ? ScheduleMode::kContinuous : ScheduleMode::kDirect;
    std::vector<double> bets = {1.0, 2.0, -2.0, 6.0};
    if (continuous) bets.push_back(1.0);
    for (double b : bets) spec.bet.stages.push_back({b, len});
  } else {
    const std::size_t colon = schedule.find(':');
    const std::string mode = schedule.substr(0, colon);
    if (colon == std::string::npos || (mode != "direct" && mode != "continuous")) {
      throw ConfigError(fmt::format("schedule: unknown schedule '{}'", schedule));
    }
    spec.bet.mode =
        mode == "direct" ? ScheduleMode::kDirect : ScheduleMode::kContinuous;
    for (const std::string& stage : Split(schedule.substr(colon + 1), ';')) {
      const std::size_t at = stage.find('@');
      if (at == std::string::npos) {
        throw ConfigError(fmt::format("schedule: stage '{}' lacks '@N'", stage));
      }
      spec.bet.stages.push_back({ToDouble("schedule", Trim(stage.substr(0, at))),
                                 ParseDuration(stage.substr(at + 1))});
    }
  }
  spec.bet.Validate();
  for (const auto& stage : spec.bet.stages) {
    if (stage.params < 0.0) spec.negative_bet = true;
  }
  return spec;
}

}  // namespace bnnlab
