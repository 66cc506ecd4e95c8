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

#ifndef BNNLAB_SCHEDULE_H_
#define BNNLAB_SCHEDULE_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bnnlab/errors.h"

namespace bnnlab {

using Player = int;
inline constexpr Player kPlayerOne = 0;
inline constexpr Player kPlayerTwo = 1;
inline constexpr int kNumPlayers = 2;

inline constexpr Player Opponent(Player p) { return 1 - p; }

// How a game's parameters evolve over iterations.
//   kStatic:     the first stage's parameters, forever.
//   kDirect:     piecewise constant, stage k active for its duration.
//   kContinuous: stage 0 is held for its duration; during stage k >= 1 the
//                parameters move linearly from stage k-1 to stage k, so
//                stage k's parameters are reached at the end of its window.
// Past the last stage the final parameters are held.
enum class ScheduleMode { kStatic, kDirect, kContinuous };

std::string ScheduleModeName(ScheduleMode mode);

inline double Interpolate(double from, double to, double w) {
  return std::lerp(from, to, w);
}

template <typename Params>
struct StagedSchedule {
  struct Stage {
    Params params;
    std::int64_t duration = 0;
  };

  ScheduleMode mode = ScheduleMode::kStatic;
  std::vector<Stage> stages;

  static StagedSchedule Constant(const Params& params) {
    StagedSchedule s;
    s.stages.push_back({params, 1});
    return s;
  }

  void Validate() const {
    if (stages.empty()) throw ConfigError("schedule has no stages");
    for (const Stage& stage : stages) {
      if (stage.duration <= 0) {
        throw ConfigError("schedule stage durations must be positive");
      }
    }
  }

  // Index of the stage active at iteration t (clamped to the last stage).
  int StageAt(std::int64_t t) const {
    Validate();
    if (mode == ScheduleMode::kStatic) return 0;
    std::int64_t end = 0;
    for (int k = 0; k < static_cast<int>(stages.size()); ++k) {
      end += stages[k].duration;
      if (t < end) return k;
    }
    return static_cast<int>(stages.size()) - 1;
  }

  // First iteration of every stage.
  std::vector<std::int64_t> StageStarts() const {
    std::vector<std::int64_t> starts;
    std::int64_t t = 0;
    for (const Stage& stage : stages) {
      starts.push_back(t);
      t += stage.duration;
    }
    return starts;
  }

  std::int64_t TotalDuration() const {
    std::int64_t total = 0;
    for (const Stage& stage : stages) total += stage.duration;
    return total;
  }

  Params ParamsAt(std::int64_t t) const {
    Validate();
    if (mode == ScheduleMode::kStatic) return stages.front().params;
    const int k = StageAt(t);
    if (mode == ScheduleMode::kDirect || k == 0) return stages[k].params;
    const std::int64_t start = StageStarts()[k];
    const double w = std::clamp(
        static_cast<double>(t - start) / static_cast<double>(stages[k].duration),
        0.0, 1.0);
    return Interpolate(stages[k - 1].params, stages[k].params, w);
  }
};

using ScalarSchedule = StagedSchedule<double>;

}  // namespace bnnlab

#endif  // BNNLAB_SCHEDULE_H_
