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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bpta/autodiff/matrix.hpp"
#include "bpta/autodiff/tape.hpp"
#include "bpta/error.hpp"

// Differentiable operations over 2-D batch-major tensors.
//
// Broadcasting is limited to the leading (batch) axis: a binary operation
// accepts two equal shapes, or a 1xC row against an RxC operand.

namespace bpta::ad {

namespace detail {

inline Tape& same_tape(const Tensor& a, const Tensor& b, const char* op) {
  if (&a.tape() != &b.tape()) throw InternalError(op, "operands live on different tapes");
  return a.tape();
}

inline Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  if (a == b) return a;
  if (a.rows == 1 && a.cols == b.cols) return b;
  if (b.rows == 1 && a.cols == b.cols) return a;
  throw ShapeError(op, a.str() + " vs " + b.str());
}

// Index of the element of `m` that pairs with output element (r, c).
inline double at_bcast(const Matrix& m, std::size_t r, std::size_t c) {
  return m.rows() == 1 ? m(0, c) : m(r, c);
}

// Adds `g` into `acc`, summing over rows when `acc` was broadcast.
inline void reduce_into(Matrix& acc, const Matrix& g) {
  if (acc.shape() == g.shape()) {
    acc += g;
    return;
  }
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) acc(0, c) += g(r, c);
}

template <class F>
Matrix zip(const Matrix& a, const Matrix& b, Shape s, F f) {
  Matrix out(s.rows, s.cols);
  for (std::size_t r = 0; r < s.rows; ++r)
    for (std::size_t c = 0; c < s.cols; ++c) out(r, c) = f(at_bcast(a, r, c), at_bcast(b, r, c));
  return out;
}

template <class F>
Matrix map(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Binary elementwise

inline Tensor add(Tensor a, Tensor b) {
  Tape& t = detail::same_tape(a, b, "add");
  const Shape s = detail::broadcast_shape(a.shape(), b.shape(), "add");
  auto v = detail::zip(a.value(), b.value(), s, [](double x, double y) { return x + y; });
  return t.record("add", std::move(v), {a, b}, [](BackwardContext& ctx) {
    for (std::size_t k = 0; k < 2; ++k)
      if (ctx.needs(k)) detail::reduce_into(ctx.input_adjoint(k), ctx.adjoint());
  });
}

inline Tensor sub(Tensor a, Tensor b) {
  Tape& t = detail::same_tape(a, b, "sub");
  const Shape s = detail::broadcast_shape(a.shape(), b.shape(), "sub");
  auto v = detail::zip(a.value(), b.value(), s, [](double x, double y) { return x - y; });
  return t.record("sub", std::move(v), {a, b}, [](BackwardContext& ctx) {
    if (ctx.needs(0)) detail::reduce_into(ctx.input_adjoint(0), ctx.adjoint());
    if (ctx.needs(1)) {
      Matrix neg = ctx.adjoint();
      neg *= -1.0;
      detail::reduce_into(ctx.input_adjoint(1), neg);
    }
  });
}

inline Tensor mul(Tensor a, Tensor b) {
  Tape& t = detail::same_tape(a, b, "mul");
  const Shape s = detail::broadcast_shape(a.shape(), b.shape(), "mul");
  auto v = detail::zip(a.value(), b.value(), s, [](double x, double y) { return x * y; });
  return t.record("mul", std::move(v), {a, b}, [](BackwardContext& ctx) {
    const Matrix& g = ctx.adjoint();
    for (std::size_t k = 0; k < 2; ++k) {
      if (!ctx.needs(k)) continue;
      const Matrix& other = ctx.input(1 - k);
      Matrix part = detail::zip(g, other, g.shape(), [](double x, double y) { return x * y; });
      detail::reduce_into(ctx.input_adjoint(k), part);
    }
  });
}

inline Tensor div(Tensor a, Tensor b) {
  Tape& t = detail::same_tape(a, b, "div");
  const Shape s = detail::broadcast_shape(a.shape(), b.shape(), "div");
  for (double d : b.value().data())
    if (d == 0.0) throw DomainError("div", "division by zero");
  auto v = detail::zip(a.value(), b.value(), s, [](double x, double y) { return x / y; });
  return t.record("div", std::move(v), {a, b}, [](BackwardContext& ctx) {
    const Matrix& g = ctx.adjoint();
    const Matrix& x = ctx.input(0);
    const Matrix& y = ctx.input(1);
    if (ctx.needs(0)) {
      detail::reduce_into(ctx.input_adjoint(0),
                          detail::zip(g, y, g.shape(), [](double gv, double yv) { return gv / yv; }));
    }
    if (ctx.needs(1)) {
      Matrix part(g.rows(), g.cols());
      for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) {
          const double yv = detail::at_bcast(y, r, c);
          part(r, c) = -g(r, c) * detail::at_bcast(x, r, c) / (yv * yv);
        }
      detail::reduce_into(ctx.input_adjoint(1), part);
    }
  });
}

// Elementwise minimum; gradient goes to the smaller operand, to `a` on ties.
inline Tensor minimum(Tensor a, Tensor b) {
  Tape& t = detail::same_tape(a, b, "minimum");
  const Shape s = detail::broadcast_shape(a.shape(), b.shape(), "minimum");
  auto v = detail::zip(a.value(), b.value(), s, [](double x, double y) { return x <= y ? x : y; });
  return t.record("minimum", std::move(v), {a, b}, [](BackwardContext& ctx) {
    const Matrix& g = ctx.adjoint();
    const Matrix& x = ctx.input(0);
    const Matrix& y = ctx.input(1);
    Matrix ga(g.rows(), g.cols()), gb(g.rows(), g.cols());
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) {
        if (detail::at_bcast(x, r, c) <= detail::at_bcast(y, r, c)) ga(r, c) = g(r, c);
        else gb(r, c) = g(r, c);
      }
    if (ctx.needs(0)) detail::reduce_into(ctx.input_adjoint(0), ga);
    if (ctx.needs(1)) detail::reduce_into(ctx.input_adjoint(1), gb);
  });
}

// (R x K) * (K x C)
inline Tensor matmul(Tensor a, Tensor b) {
  Tape& t = detail::same_tape(a, b, "matmul");
  if (a.shape().cols != b.shape().rows) {
    throw ShapeError("matmul", a.shape().str() + " x " + b.shape().str());
  }
  Matrix v;
  kernel::matmul(a.value(), b.value(), v);
  return t.record("matmul", std::move(v), {a, b}, [](BackwardContext& ctx) {
    if (ctx.needs(0)) kernel::matmul_nt_acc(ctx.adjoint(), ctx.input(1), ctx.input_adjoint(0));
    if (ctx.needs(1)) kernel::matmul_tn_acc(ctx.input(0), ctx.adjoint(), ctx.input_adjoint(1));
  });
}

// ---------------------------------------------------------------------------
// Unary elementwise

inline Tensor scale(Tensor x, double s) {
  auto v = detail::map(x.value(), [s](double e) { return e * s; });
  return x.tape().record("scale", std::move(v), {x}, [s](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i] * s;
  });
}

inline Tensor neg(Tensor x) { return scale(x, -1.0); }

inline Tensor add_scalar(Tensor x, double s) {
  auto v = detail::map(x.value(), [s](double e) { return e + s; });
  return x.tape().record("add_scalar", std::move(v), {x}, [](BackwardContext& ctx) {
    ctx.input_adjoint(0) += ctx.adjoint();
  });
}

inline Tensor exp(Tensor x) {
  auto v = detail::map(x.value(), [](double e) { return std::exp(e); });
  return x.tape().record("exp", std::move(v), {x}, [](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    const Matrix& y = ctx.output();
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i] * y[i];
  });
}

inline Tensor log(Tensor x) {
  for (double e : x.value().data())
    if (!(e > 0.0)) throw DomainError("log", "non-positive argument");
  auto v = detail::map(x.value(), [](double e) { return std::log(e); });
  return x.tape().record("log", std::move(v), {x}, [](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    const Matrix& in = ctx.input(0);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i] / in[i];
  });
}

inline Tensor square(Tensor x) {
  auto v = detail::map(x.value(), [](double e) { return e * e; });
  return x.tape().record("square", std::move(v), {x}, [](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    const Matrix& in = ctx.input(0);
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += 2.0 * g[i] * in[i];
  });
}

inline Tensor relu(Tensor x) {
  auto v = detail::map(x.value(), [](double e) { return e > 0.0 ? e : 0.0; });
  return x.tape().record("relu", std::move(v), {x}, [](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    const Matrix& in = ctx.input(0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in[i] > 0.0) acc[i] += g[i];
  });
}

inline Tensor tanh(Tensor x) {
  auto v = detail::map(x.value(), [](double e) { return std::tanh(e); });
  return x.tape().record("tanh", std::move(v), {x}, [](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    const Matrix& y = ctx.output();
    for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

// Clamp to [lower, upper]; zero derivative outside the interval.
inline Tensor clip(Tensor x, double lower, double upper) {
  if (lower > upper) throw DomainError("clip", "lower bound exceeds upper bound");
  auto v = detail::map(x.value(), [=](double e) { return std::min(std::max(e, lower), upper); });
  return x.tape().record("clip", std::move(v), {x}, [=](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    const Matrix& in = ctx.input(0);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in[i] >= lower && in[i] <= upper) acc[i] += g[i];
  });
}

// ---------------------------------------------------------------------------
// Row-wise

inline Tensor softmax(Tensor x) {
  const Matrix& in = x.value();
  Matrix v(in.rows(), in.cols());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    auto row = in.row_span(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (double e : row) mx = std::max(mx, e);
    double z = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) z += (v(r, c) = std::exp(row[c] - mx));
    for (std::size_t c = 0; c < row.size(); ++c) v(r, c) /= z;
  }
  return x.tape().record("softmax", std::move(v), {x}, [](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    const Matrix& y = ctx.output();
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) acc(r, c) += y(r, c) * (g(r, c) - dot);
    }
  });
}

inline Tensor log_softmax(Tensor x) {
  const Matrix& in = x.value();
  Matrix v(in.rows(), in.cols());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    auto row = in.row_span(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (double e : row) mx = std::max(mx, e);
    double z = 0.0;
    for (double e : row) z += std::exp(e - mx);
    const double lse = mx + std::log(z);
    for (std::size_t c = 0; c < row.size(); ++c) v(r, c) = row[c] - lse;
  }
  return x.tape().record("log_softmax", std::move(v), {x}, [](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    const Matrix& y = ctx.output();
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double gs = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) gs += g(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) acc(r, c) += g(r, c) - std::exp(y(r, c)) * gs;
    }
  });
}

// Per-row sum over columns: (R x C) -> (R x 1).
inline Tensor sum_rows(Tensor x) {
  const Matrix& in = x.value();
  Matrix v(in.rows(), 1);
  for (std::size_t r = 0; r < in.rows(); ++r)
    for (double e : in.row_span(r)) v(r, 0) += e;
  return x.tape().record("sum_rows", std::move(v), {x}, [](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    for (std::size_t r = 0; r < acc.rows(); ++r)
      for (std::size_t c = 0; c < acc.cols(); ++c) acc(r, c) += g(r, 0);
  });
}

// Column `indices[r]` of row r: (R x C) -> (R x 1).
inline Tensor pick(Tensor x, std::span<const std::size_t> indices) {
  const Matrix& in = x.value();
  if (indices.size() != in.rows()) throw ShapeError("pick", "index count does not match rows");
  Matrix v(in.rows(), 1);
  for (std::size_t r = 0; r < in.rows(); ++r) {
    if (indices[r] >= in.cols()) throw DomainError("pick", "index out of range");
    v(r, 0) = in(r, indices[r]);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return x.tape().record("pick", std::move(v), {x}, [idx = std::move(idx)](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const Matrix& g = ctx.adjoint();
    for (std::size_t r = 0; r < idx.size(); ++r) acc(r, idx[r]) += g(r, 0);
  });
}

inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols", "no operands");
  Tape& t = parts.front().tape();
  const std::size_t rows = parts.front().shape().rows;
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (&p.tape() != &t) throw InternalError("concat_cols", "operands live on different tapes");
    if (p.shape().rows != rows) throw ShapeError("concat_cols", "row count mismatch");
    cols += p.shape().cols;
  }
  Matrix v(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const Matrix& m = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) v(r, off + c) = m(r, c);
    off += m.cols();
  }
  return t.record("concat_cols", std::move(v), parts, [offsets](BackwardContext& ctx) {
    const Matrix& g = ctx.adjoint();
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      if (!ctx.needs(k)) continue;
      Matrix& acc = ctx.input_adjoint(k);
      for (std::size_t r = 0; r < acc.rows(); ++r)
        for (std::size_t c = 0; c < acc.cols(); ++c) acc(r, c) += g(r, offsets[k] + c);
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions

inline Tensor sum(Tensor x) {
  double s = 0.0;
  for (double e : x.value().data()) s += e;
  return x.tape().record("sum", Matrix::scalar(s), {x}, [](BackwardContext& ctx) {
    Matrix& acc = ctx.input_adjoint(0);
    const double g = ctx.adjoint()[0];
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g;
  });
}

inline Tensor mean(Tensor x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw ShapeError("mean", "empty tensor");
  double s = 0.0;
  for (double e : x.value().data()) s += e;
  return x.tape().record("mean", Matrix::scalar(s / static_cast<double>(n)), {x},
                         [n](BackwardContext& ctx) {
                           Matrix& acc = ctx.input_adjoint(0);
                           const double g = ctx.adjoint()[0] / static_cast<double>(n);
                           for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g;
                         });
}

// ---------------------------------------------------------------------------
// Gradient routing

// Value-equal tensor with no ancestry.
inline Tensor detach(Tensor x) { return x.tape().constant(x.value()); }

// Forward value `hard`, backward identity into `relaxed`.
inline Tensor straight_through(const Matrix& hard, Tensor relaxed) {
  if (hard.shape() != relaxed.shape()) {
    throw ShapeError("straight_through", hard.shape().str() + " vs " + relaxed.shape().str());
  }
  return relaxed.tape().record("straight_through", hard, {relaxed}, [](BackwardContext& ctx) {
    ctx.input_adjoint(0) += ctx.adjoint();
  });
}

// Operator sugar for graph construction.
inline Tensor operator+(Tensor a, Tensor b) { return add(a, b); }
inline Tensor operator-(Tensor a, Tensor b) { return sub(a, b); }
inline Tensor operator*(Tensor a, Tensor b) { return mul(a, b); }
inline Tensor operator/(Tensor a, Tensor b) { return div(a, b); }
inline Tensor operator*(Tensor a, double s) { return scale(a, s); }
inline Tensor operator*(double s, Tensor a) { return scale(a, s); }
inline Tensor operator-(Tensor a) { return neg(a); }

}  // namespace bpta::ad
