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

#ifndef BNNLAB_RANDOM_H_
#define BNNLAB_RANDOM_H_

#include <cstdint>
#include <random>
#include <vector>

namespace bnnlab {

// Every run owns exactly one of these.
using Rng = std::mt19937_64;

// Uniform draw from the simplex of dimension n (flat Dirichlet).
std::vector<double> RandomSimplex(int n, Rng& rng);

// Mixture 0.9 * flat Dirichlet + 0.1 * uniform, so every entry is at least
// 0.1 / n.
std::vector<double> RandomInteriorSimplex(int n, Rng& rng);

}  // namespace bnnlab

#endif  // BNNLAB_RANDOM_H_
