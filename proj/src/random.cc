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

#include "bnnlab/random.h"

namespace bnnlab {

std::vector<double> RandomSimplex(int n, Rng& rng) {
  std::exponential_distribution<double> exp_dist(1.0);
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& x : p) {
    x = exp_dist(rng);
    sum += x;
  }
  for (double& x : p) x /= sum;
  return p;
}

std::vector<double> RandomInteriorSimplex(int n, Rng& rng) {
  std::vector<double> p = RandomSimplex(n, rng);
  for (double& x : p) x = 0.9 * x + 0.1 / n;
  return p;
}

}  // namespace bnnlab
