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
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "bpta/autodiff/matrix.hpp"
#include "bpta/error.hpp"

namespace bpta::ad {

class Tape;

// Lightweight handle to a node on a tape. Copying a Tensor copies the handle,
// not the data. A Tensor must not outlive its tape.
class Tensor {
 public:
  Tensor() = default;

  const Matrix& value() const;
  // Accumulated gradient from backward(); zeros if nothing reached this node.
  Matrix grad() const;
  Shape shape() const { return value().shape(); }
  bool requires_grad() const;
  std::size_t node_id() const noexcept { return id_; }
  Tape& tape() const noexcept { return *tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Tensor(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Result of differentiating one node with respect to another.
struct GradResult {
  Matrix grad;
  // False when `wrt` is not a differentiable ancestor of the output; grad is
  // then all zeros.
  bool has_path = false;
};

// View given to each node's backward rule.
class BackwardContext {
 public:
  BackwardContext(const Tape& tape, std::size_t id, const Matrix& adjoint,
                  std::vector<std::optional<Matrix>>& adjoints)
      : tape_(tape), id_(id), adjoint_(adjoint), adjoints_(adjoints) {}

  const Matrix& adjoint() const noexcept { return adjoint_; }
  const Matrix& output() const;
  const Matrix& input(std::size_t k) const;
  bool needs(std::size_t k) const;
  // Adjoint buffer for parent k, zero-initialised on first touch.
  Matrix& input_adjoint(std::size_t k);

 private:
  const Tape& tape_;
  std::size_t id_;
  const Matrix& adjoint_;
  std::vector<std::optional<Matrix>>& adjoints_;
};

using BackwardFn = std::function<void(BackwardContext&)>;

// Append-only record of operations. Nodes are stored in creation order, which
// is a topological order of the graph. Single-threaded.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf that receives gradients.
  Tensor variable(Matrix value) { return push(std::move(value), {}, nullptr, true, "variable"); }
  // Leaf that never receives gradients.
  Tensor constant(Matrix value) { return push(std::move(value), {}, nullptr, false, "constant"); }

  // Records an operation. The node requires grad iff any parent does.
  Tensor record(std::string_view op, Matrix value, std::vector<Tensor> parents, BackwardFn fn) {
    if (!value.all_finite()) throw DomainError(std::string(op), "non-finite result");
    std::vector<std::size_t> ids;
    ids.reserve(parents.size());
    bool rg = false;
    for (const auto& p : parents) {
      if (p.tape_ != this) throw InternalError(std::string(op), "operand from a different tape");
      ids.push_back(p.id_);
      rg = rg || nodes_[p.id_].requires_grad;
    }
    return push(std::move(value), std::move(ids), rg ? std::move(fn) : BackwardFn{}, rg, op);
  }

  // Accumulates d(root)/d(node) into the stored gradient of every
  // differentiable ancestor of the scalar root.
  void backward(Tensor root) {
    check_owned(root, "backward");
    if (nodes_[root.id_].value.shape() != Shape{1, 1}) {
      throw ShapeError("backward", "root must be scalar, got " + nodes_[root.id_].value.shape().str());
    }
    auto adjoints = propagate(root.id_, Matrix::scalar(1.0));
    for (std::size_t i = 0; i <= root.id_; ++i) {
      if (!adjoints[i] || !nodes_[i].requires_grad) continue;
      auto& g = nodes_[i].grad;
      if (g.empty()) g = Matrix(adjoints[i]->rows(), adjoints[i]->cols());
      g += *adjoints[i];
    }
  }

  // Gradient of sum(output) with respect to `wrt`, which may be any
  // intermediate node. Leaves stored gradients untouched.
  GradResult grad_of(Tensor output, Tensor wrt) const {
    check_owned(output, "grad_of");
    check_owned(wrt, "grad_of");
    const auto& out_node = nodes_[output.id_];
    GradResult result{Matrix(nodes_[wrt.id_].value.rows(), nodes_[wrt.id_].value.cols()), false};
    if (wrt.id_ > output.id_ || !nodes_[wrt.id_].requires_grad || !out_node.requires_grad) {
      return result;
    }
    auto adjoints = propagate(output.id_, Matrix(out_node.value.rows(), out_node.value.cols(), 1.0));
    if (adjoints[wrt.id_]) {
      result.grad = std::move(*adjoints[wrt.id_]);
      result.has_path = true;
    }
    return result;
  }

  void zero_grad() {
    for (auto& n : nodes_) n.grad = Matrix();
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const Matrix& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::string_view op_name(std::size_t id) const { return nodes_.at(id).op; }
  Matrix grad(std::size_t id) const {
    const auto& n = nodes_.at(id);
    return n.grad.empty() ? Matrix(n.value.rows(), n.value.cols()) : n.grad;
  }

 private:
  friend class Tensor;
  friend class BackwardContext;

  struct Node {
    Matrix value;
    Matrix grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    bool requires_grad = false;
    std::string_view op;
  };

  Tensor push(Matrix value, std::vector<std::size_t> parents, BackwardFn fn, bool rg,
              std::string_view op) {
    nodes_.push_back(Node{std::move(value), Matrix(), std::move(parents), std::move(fn), rg, op});
    return Tensor(this, nodes_.size() - 1);
  }

  void check_owned(const Tensor& t, const char* where) const {
    if (t.tape_ != this || t.id_ >= nodes_.size()) throw InternalError(where, "tensor not on this tape");
  }

  // Reverse sweep from `root` with a fresh adjoint buffer. Each node is
  // visited at most once, in reverse creation order.
  std::vector<std::optional<Matrix>> propagate(std::size_t root, Matrix seed) const {
    std::vector<std::optional<Matrix>> adjoints(root + 1);
    adjoints[root] = std::move(seed);
    for (std::size_t i = root + 1; i-- > 0;) {
      if (!adjoints[i] || !nodes_[i].backward) continue;
      for (std::size_t pid : nodes_[i].parents) {
        if (nodes_[pid].requires_grad && !adjoints[pid]) {
          adjoints[pid] = Matrix(nodes_[pid].value.rows(), nodes_[pid].value.cols());
        }
      }
      BackwardContext ctx(*this, i, *adjoints[i], adjoints);
      nodes_[i].backward(ctx);
    }
    return adjoints;
  }

  std::vector<Node> nodes_;
};

inline const Matrix& Tensor::value() const { return tape_->nodes_.at(id_).value; }
inline Matrix Tensor::grad() const { return tape_->grad(id_); }
inline bool Tensor::requires_grad() const { return tape_->nodes_.at(id_).requires_grad; }

inline const Matrix& BackwardContext::output() const { return tape_.nodes_[id_].value; }
inline const Matrix& BackwardContext::input(std::size_t k) const {
  return tape_.nodes_[tape_.nodes_[id_].parents.at(k)].value;
}
inline bool BackwardContext::needs(std::size_t k) const {
  return tape_.nodes_[tape_.nodes_[id_].parents.at(k)].requires_grad;
}
inline Matrix& BackwardContext::input_adjoint(std::size_t k) {
  const std::size_t pid = tape_.nodes_[id_].parents.at(k);
  auto& slot = adjoints_[pid];
  if (!slot) {
    const auto& v = tape_.nodes_[pid].value;
    slot = Matrix(v.rows(), v.cols());
  }
  return *slot;
}

}  // namespace bpta::ad
