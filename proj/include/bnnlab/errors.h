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

#ifndef BNNLAB_ERRORS_H_
#define BNNLAB_ERRORS_H_

#include <stdexcept>
#include <string>

namespace bnnlab {

// Dimension mismatch between a game and a profile or vector.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad or missing configuration (unparseable spec string, empty schedule,
// non-interior reference policy, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A NaN or infinity showed up in the learning state. The message carries a
// dump of the offending state.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace bnnlab

#endif  // BNNLAB_ERRORS_H_
