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

#include <cmath>
#include <numbers>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "bpta/autodiff/matrix.hpp"

namespace bpta {

// Seeded random stream. Streams with the same seed but different stream ids
// are independent, which lets each rollout worker own one.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0) { reseed(seed, stream); }

  void reseed(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    engine_.seed(seq);
  }

  // Uniform on the open interval (0, 1).
  double uniform_open() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  // Standard normal via Box-Muller on open uniforms, so results do not
  // depend on the standard library's distribution implementation.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Standard Gumbel(0, 1).
  double gumbel() { return -std::log(-std::log(uniform_open())); }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_open() * static_cast<double>(n)) % n; }

  ad::Matrix normal_matrix(std::size_t rows, std::size_t cols) {
    ad::Matrix m(rows, cols);
    for (double& v : m.data()) v = normal();
    return m;
  }

  ad::Matrix gumbel_matrix(std::size_t rows, std::size_t cols) {
    ad::Matrix m(rows, cols);
    for (double& v : m.data()) v = gumbel();
    return m;
  }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_ << ' ' << has_spare_ << ' ' << std::hexfloat << spare_;
    return os.str();
  }

  void deserialize(const std::string& text) {
    std::istringstream is(text);
    is >> engine_ >> has_spare_;
    std::string spare;
    is >> spare;
    spare_ = std::strtod(spare.c_str(), nullptr);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bpta
