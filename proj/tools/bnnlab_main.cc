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


// Command-line front end: run, compare, figures and plot-data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bnnlab/errors.h"
#include "bnnlab/harness.h"
#include "fmt/format.h"

namespace {

using bnnlab::ConfigError;
using bnnlab::ExperimentConfig;

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

// Options shared by `run` and `compare`: a config file plus one flag per key.
struct ConfigOptions {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;

  void Register(CLI::App* app) {
    app->add_option("--config", config_file, "key=value config file");
    for (const std::string& key : bnnlab::ConfigKeys()) {
      std::string flag = key;
      for (char& ch : flag) {
        if (ch == '_') ch = '-';
      }
      app->add_option("--" + flag, values[key], "override '" + key + "'");
    }
    app->add_option("--set", sets, "extra key=value override (repeatable)");
  }

  ExperimentConfig Build(CLI::App* app) const {
    ExperimentConfig c;
    if (!config_file.empty()) c = bnnlab::LoadConfigFile(config_file);
    for (const std::string& key : bnnlab::ConfigKeys()) {
      std::string flag = key;
      for (char& ch : flag) {
        if (ch == '_') ch = '-';
      }
      if (app->count("--" + flag) > 0) {
        bnnlab::SetConfigValue(c, key, values.at(key));
      }
    }
    for (const std::string& kv : sets) {
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(fmt::format("--set: expected key=value, got '{}'", kv));
      }
      bnnlab::SetConfigValue(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return c;
  }
};

// "reg-rd:lambda=0.05:k_ref=500" -> label and config.
std::pair<std::string, ExperimentConfig> ParseAlgoSpec(
    const std::string& spec, const ExperimentConfig& base) {
  ExperimentConfig c = base;
  std::size_t start = 0;
  std::size_t colon = spec.find(':');
  c.algo = spec.substr(0, colon);
  bnnlab::ParseAlgorithm(c.algo);
  while (colon != std::string::npos) {
    start = colon + 1;
    colon = spec.find(':', start);
    const std::string kv = spec.substr(start, colon - start);
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(
          fmt::format("--algos: expected key=value in '{}'", spec));
    }
    bnnlab::SetConfigValue(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return {spec, c};
}

std::vector<std::string> SplitComma(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(',', start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

void ReportNumericalError(const std::string& out_dir,
                          const bnnlab::NumericalError& e) {
  std::fprintf(stderr, "numerical error: %s\n", e.what());
  if (out_dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream dump(std::filesystem::path(out_dir) / "nan_dump.txt");
  dump << e.what() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bnnlab: Brown-von Neumann-Nash learning dynamics laboratory"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "run one experiment");
  ConfigOptions run_opts;
  run_opts.Register(run);

  CLI::App* compare = app.add_subcommand("compare", "compare algorithms");
  ConfigOptions cmp_opts;
  cmp_opts.Register(compare);
  std::string algos = "bnn,reg-rd";
  bool grid = false;
  compare->add_option("--algos", algos,
                      "comma-separated algorithm specs, e.g. "
                      "bnn,reg-rd:lambda=0.2:k_ref=500");
  compare->add_flag("--grid", grid,
                    "expand reg-rd into the lambda x k_ref grid");

  CLI::App* figures = app.add_subcommand("figures", "desk-scale figure matrix");
  std::string preset = "appendix";
  std::string figures_out = "figures";
  double scale = 1.0;
  figures->add_option("--preset", preset, "preset name")->required();
  figures->add_option("--out", figures_out, "output directory");
  figures->add_option("--scale", scale, "budget multiplier in (0, 1]");

  CLI::App* plot = app.add_subcommand("plot-data", "emit gnuplot data");
  std::string plot_dir;
  plot->add_option("dir", plot_dir, "directory holding run outputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  std::string out_dir;
  try {
    if (run->parsed()) {
      const ExperimentConfig c = run_opts.Build(run);
      out_dir = c.out;
      const bnnlab::ExperimentResult result = bnnlab::RunExperiment(c);
      bnnlab::WriteExperiment(result, c.out);
      std::printf("wrote %s\n", c.out.c_str());
    } else if (compare->parsed()) {
      const ExperimentConfig base = cmp_opts.Build(compare);
      out_dir = base.out;
      std::vector<std::pair<std::string, ExperimentConfig>> configs;
      for (const std::string& spec : SplitComma(algos)) {
        auto entry = ParseAlgoSpec(spec, base);
        if (grid && entry.second.algo == "reg-rd") {
          for (auto& cell : bnnlab::RegRdGrid(entry.second)) {
            configs.push_back(std::move(cell));
          }
        } else {
          configs.push_back(std::move(entry));
        }
      }
      const bnnlab::Comparison cmp = bnnlab::Compare(configs);
      bnnlab::WriteComparison(cmp, base.out);
      std::fputs(bnnlab::ComparisonCsv(cmp).c_str(), stdout);
    } else if (figures->parsed()) {
      out_dir = figures_out;
      bnnlab::RunFiguresPreset(preset, figures_out, scale);
      std::printf("wrote %s\n", figures_out.c_str());
    } else if (plot->parsed()) {
      for (const auto& path : bnnlab::EmitPlotData(plot_dir)) {
        std::printf("%s\n", path.string().c_str());
      }
    }
  } catch (const bnnlab::NumericalError& e) {
    ReportNumericalError(out_dir, e);
    return kExitNumericalError;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const bnnlab::ShapeError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  }
  return 0;
}
