// Copyright 2026 The BPTA Authors
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

#pragma once

#include <memory>
#include <string>

#include "bpta/envs/matrix_game.hpp"
#include "bpta/envs/quadratic.hpp"

namespace bpta::envs {

// Environment selected by config key: climbing | penalty | quadratic.
inline std::unique_ptr<DecPomdpEnv> make_env(const std::string& key, std::size_t episode_length,
                                             double quadratic_target = 0.0) {
  if (key == "climbing") return std::make_unique<MatrixGame>(climbing(episode_length));
  if (key == "penalty") return std::make_unique<MatrixGame>(penalty(episode_length));
  if (key == "quadratic") return std::make_unique<QuadraticTeamGame>(quadratic_target);
  throw ConfigError("env", "unknown environment '" + key + "'");
}

}  // namespace bpta::envs
