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

#include <cstddef>
#include <string>
#include <vector>

#include "bpta/autodiff/matrix.hpp"
#include "bpta/error.hpp"

namespace bpta {

struct ActionSpace {
  enum class Kind { kDiscrete, kContinuous };

  Kind kind = Kind::kDiscrete;
  // Number of choices (discrete) or dimensions (continuous).
  std::size_t size = 0;

  static ActionSpace discrete(std::size_t n) { return {Kind::kDiscrete, n}; }
  static ActionSpace continuous(std::size_t d) { return {Kind::kContinuous, d}; }

  bool is_discrete() const noexcept { return kind == Kind::kDiscrete; }
  // Width of the action's vector encoding (one-hot or raw).
  std::size_t encoded_dim() const noexcept { return size; }

  friend bool operator==(const ActionSpace&, const ActionSpace&) = default;
};

// A batch of concrete actions for one agent: indices for discrete spaces,
// an (rows x dims) matrix for continuous ones.
struct ActionBatch {
  std::vector<std::size_t> indices;
  ad::Matrix values;

  std::size_t rows() const noexcept { return indices.empty() ? values.rows() : indices.size(); }

  ad::Matrix encoded(const ActionSpace& space) const {
    if (space.is_discrete()) return ad::one_hot(indices, space.size);
    if (values.cols() != space.size) throw ShapeError("ActionBatch::encoded", "dimension mismatch");
    return values;
  }

  ActionBatch slice(std::size_t begin, std::size_t end) const {
    ActionBatch out;
    if (!indices.empty()) out.indices.assign(indices.begin() + begin, indices.begin() + end);
    if (!values.empty()) out.values = values.slice_rows(begin, end);
    return out;
  }
};

}  // namespace bpta
