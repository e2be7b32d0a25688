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
#include <string>
#include <vector>

#include "bpta/autodiff/ops.hpp"
#include "bpta/random.hpp"

namespace bpta::policy {

using ad::Matrix;
using ad::Tape;
using ad::Tensor;

// (rows x cols) matrix whose columns (or rows, when rows < cols) are
// orthonormal, scaled by gain.
inline Matrix orthogonal(std::size_t rows, std::size_t cols, double gain, Rng& rng) {
  const bool tall = rows >= cols;
  const std::size_t n = tall ? rows : cols;  // long side
  const std::size_t k = tall ? cols : rows;  // number of orthonormal vectors
  std::vector<std::vector<double>> basis;
  basis.reserve(k);
  while (basis.size() < k) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    // Modified Gram-Schmidt, twice for stability.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += v[i] * b[i];
        for (std::size_t i = 0; i < n; ++i) v[i] -= dot * b[i];
      }
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-10) continue;
    for (double& x : v) x /= norm;
    basis.push_back(std::move(v));
  }
  Matrix out(rows, cols);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      if (tall) out(i, j) = gain * basis[j][i];
      else out(j, i) = gain * basis[j][i];
    }
  return out;
}

struct MlpShape {
  std::size_t hidden_layers = 1;
  std::size_t hidden_dim = 64;
};

// ReLU multilayer perceptron. Weights are (in x out), biases (1 x out).
// hidden_layers = 0 gives a single affine map.
struct MlpParams {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;

  static MlpParams init(std::size_t input_dim, std::size_t output_dim, MlpShape shape,
                        double output_gain, Rng& rng) {
    MlpParams p;
    std::size_t in = input_dim;
    for (std::size_t l = 0; l < shape.hidden_layers; ++l) {
      p.weights.push_back(orthogonal(in, shape.hidden_dim, std::sqrt(2.0), rng));
      p.biases.emplace_back(1, shape.hidden_dim);
      in = shape.hidden_dim;
    }
    p.weights.push_back(orthogonal(in, output_dim, output_gain, rng));
    p.biases.emplace_back(1, output_dim);
    return p;
  }

  std::size_t input_dim() const { return weights.front().rows(); }
  std::size_t output_dim() const { return weights.back().cols(); }
  std::size_t hidden_layers() const { return weights.size() - 1; }

  void validate() const {
    if (weights.empty() || weights.size() != biases.size()) {
      throw ShapeError("MlpParams", "weights and biases must pair up");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
      if (biases[l].rows() != 1 || biases[l].cols() != weights[l].cols()) {
        throw ShapeError("MlpParams", "bias shape does not match layer " + std::to_string(l));
      }
      if (l > 0 && weights[l].rows() != weights[l - 1].cols()) {
        throw ShapeError("MlpParams", "layer " + std::to_string(l) + " does not chain");
      }
      if (!weights[l].all_finite() || !biases[l].all_finite()) {
        throw DomainError("MlpParams", "non-finite parameter");
      }
    }
  }

  // Flat list in (W0, b0, W1, b1, ...) order.
  std::vector<Matrix*> parameters() {
    std::vector<Matrix*> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      out.push_back(&weights[l]);
      out.push_back(&biases[l]);
    }
    return out;
  }
  std::vector<const Matrix*> parameters() const {
    std::vector<const Matrix*> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      out.push_back(&weights[l]);
      out.push_back(&biases[l]);
    }
    return out;
  }
};

struct MlpGraph {
  std::vector<Tensor> params;  // same order as MlpParams::parameters()
  Tensor output;
};

inline MlpGraph mlp_forward(Tape& tape, const MlpParams& p, Tensor input) {
  if (input.shape().cols != p.input_dim()) {
    throw ShapeError("mlp_forward", "input width " + std::to_string(input.shape().cols) +
                                        " vs expected " + std::to_string(p.input_dim()));
  }
  MlpGraph g;
  Tensor h = input;
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    Tensor w = tape.variable(p.weights[l]);
    Tensor b = tape.variable(p.biases[l]);
    g.params.push_back(w);
    g.params.push_back(b);
    h = ad::add(ad::matmul(h, w), b);
    if (l + 1 < p.weights.size()) h = ad::relu(h);
  }
  g.output = h;
  return g;
}

}  // namespace bpta::policy
