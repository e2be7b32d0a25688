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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bpta/autodiff/ops.hpp"
#include "bpta/random.hpp"

namespace {

using bpta::Rng;
using bpta::ad::Matrix;
using bpta::ad::Tape;
using bpta::ad::Tensor;
namespace ad = bpta::ad;

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (double& x : m.data()) x = scale * rng.normal();
  return m;
}

TEST(Ops, ClipOutsideIntervalHasZeroDerivative) {
  Tape t;
  Tensor x = t.variable(Matrix::scalar(1.3));
  Tensor y = ad::clip(x, 0.8, 1.2);
  EXPECT_DOUBLE_EQ(y.value().item(), 1.2);
  t.backward(y);
  EXPECT_EQ(x.grad().item(), 0.0);
}

TEST(Ops, ClipInsideIntervalPassesGradient) {
  Tape t;
  Tensor x = t.variable(Matrix::scalar(1.0));
  t.backward(ad::clip(x, 0.8, 1.2));
  EXPECT_EQ(x.grad().item(), 1.0);
}

TEST(Ops, ReluNegativeIsZeroWithZeroDerivative) {
  Tape t;
  Tensor x = t.variable(Matrix::scalar(-2.0));
  Tensor y = ad::relu(x);
  EXPECT_EQ(y.value().item(), 0.0);
  t.backward(y);
  EXPECT_EQ(x.grad().item(), 0.0);
}

TEST(Ops, SoftmaxOfZerosIsUniform) {
  Tape t;
  Tensor y = ad::softmax(t.constant(Matrix::row({0, 0, 0})));
  for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(y.value()(0, c), 1.0 / 3.0, 1e-15);
}

TEST(Ops, MinimumRoutesToSmallerAndTiesToFirst) {
  Tape t;
  Tensor a = t.variable(Matrix::row({1.0, 5.0, 2.0}));
  Tensor b = t.variable(Matrix::row({3.0, 4.0, 2.0}));
  t.backward(ad::sum(ad::minimum(a, b)));
  EXPECT_EQ(a.grad(), Matrix::row({1.0, 0.0, 1.0}));
  EXPECT_EQ(b.grad(), Matrix::row({0.0, 1.0, 0.0}));
}

TEST(Ops, ShapeMismatchIsStructuredError) {
  Tape t;
  Tensor a = t.variable(Matrix(2, 3));
  Tensor b = t.variable(Matrix(3, 2));
  EXPECT_THROW(ad::add(a, b), bpta::ShapeError);
  EXPECT_THROW(ad::matmul(a, a), bpta::ShapeError);
}

TEST(Ops, RowBroadcastAccumulatesIntoRow) {
  Tape t;
  Tensor x = t.variable(Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}}));
  Tensor b = t.variable(Matrix::row({10, 20}));
  t.backward(ad::sum(ad::mul(x, b)));
  EXPECT_EQ(b.grad(), Matrix::row({9, 12}));
  EXPECT_EQ(x.grad(), Matrix::from_rows({{10, 20}, {10, 20}, {10, 20}}));
}

TEST(Ops, LogAndDivideRejectBadDomain) {
  Tape t;
  Tensor z = t.variable(Matrix::row({1.0, 0.0}));
  Tensor neg = t.variable(Matrix::row({-1.0, 2.0}));
  EXPECT_THROW(ad::log(z), bpta::DomainError);
  EXPECT_THROW(ad::log(neg), bpta::DomainError);
  EXPECT_THROW(ad::div(neg, z), bpta::DomainError);
}

TEST(Ops, NonFiniteResultFailsFastNamingTheOp) {
  Tape t;
  Tensor x = t.variable(Matrix::scalar(1000.0));
  try {
    ad::exp(x);
    FAIL() << "expected DomainError";
  } catch (const bpta::DomainError& e) {
    EXPECT_EQ(e.where(), "exp");
  }
}

TEST(Ops, PickSelectsPerRowColumn) {
  Tape t;
  Tensor x = t.variable(Matrix::from_rows({{1, 2, 3}, {4, 5, 6}}));
  const std::size_t idx[] = {2, 0};
  Tensor y = ad::pick(x, idx);
  EXPECT_EQ(y.value(), Matrix::from_rows({{3}, {4}}));
  t.backward(ad::sum(y));
  EXPECT_EQ(x.grad(), Matrix::from_rows({{0, 0, 1}, {1, 0, 0}}));
}

TEST(Backward, LinearFormGivesInput) {
  Tape t;
  Matrix xv = Matrix::row({0.5, -1.5, 2.0});
  Tensor w = t.variable(Matrix::row({1.0, 2.0, 3.0}));
  Tensor x = t.constant(xv);
  t.backward(ad::sum(ad::mul(w, x)));
  EXPECT_EQ(w.grad(), xv);
}

TEST(Backward, NonScalarRootIsError) {
  Tape t;
  Tensor x = t.variable(Matrix::row({1.0, 2.0}));
  EXPECT_THROW(t.backward(ad::square(x)), bpta::ShapeError);
}

TEST(Backward, TwiceWithoutZeroingDoublesGradient) {
  Rng rng(3);
  Tape t;
  Tensor w = t.variable(random_matrix(4, 3, rng));
  Tensor x = t.constant(random_matrix(5, 4, rng));
  Tensor root = ad::mean(ad::tanh(ad::matmul(x, w)));
  t.backward(root);
  const Matrix once = w.grad();
  t.backward(root);
  Matrix twice = once;
  twice *= 2.0;
  EXPECT_EQ(w.grad(), twice);
  t.zero_grad();
  EXPECT_EQ(w.grad(), Matrix(4, 3));
}

TEST(Backward, SharedSubgraphVisitedOnce) {
  Tape t;
  Tensor x = t.variable(Matrix::scalar(3.0));
  Tensor y = ad::square(x);
  t.backward(ad::add(y, y));
  EXPECT_EQ(x.grad().item(), 12.0);
}

TEST(Backward, BitIdenticalAcrossReplays) {
  auto run = [] {
    Rng rng(11);
    Tape t;
    Tensor w = t.variable(random_matrix(6, 4, rng));
    Tensor x = t.constant(random_matrix(7, 6, rng));
    t.backward(ad::mean(ad::log_softmax(ad::relu(ad::matmul(x, w)))));
    return w.grad();
  };
  EXPECT_EQ(run(), run());
}

TEST(Detach, ValuesEqualAndNoGradient) {
  Tape t;
  Tensor x = t.variable(Matrix::row({1.5, -2.0}));
  Tensor d = ad::detach(x);
  EXPECT_EQ(d.value(), x.value());
  EXPECT_FALSE(d.requires_grad());
  Tensor y = t.variable(Matrix::row({3.0, 4.0}));
  t.backward(ad::sum(ad::mul(d, y)));
  EXPECT_EQ(x.grad(), Matrix(1, 2));
  EXPECT_EQ(d.grad(), Matrix(1, 2));
  EXPECT_EQ(y.grad(), x.value());
}

TEST(Detach, DetachedFactorTreatedAsConstant) {
  Tape t;
  Matrix xv = Matrix::row({0.7, -1.1, 2.5});
  Tensor x = t.variable(xv);
  t.backward(ad::sum(ad::mul(ad::detach(x), x)));
  EXPECT_EQ(x.grad(), xv);
}

// f(theta) = detach(r(theta)) * h(theta) + r(theta) * k with r = exp(theta),
// h = theta^2: df/dtheta = r * 2 theta + r * k.
TEST(Detach, RatioToyMatchesManualTwoTermGradient) {
  const double theta = 0.3, k = 1.7;
  Tape t;
  Tensor th = t.variable(Matrix::scalar(theta));
  Tensor r = ad::exp(th);
  Tensor kt = t.constant(Matrix::scalar(k));
  Tensor f = ad::add(ad::mul(ad::detach(r), ad::square(th)), ad::mul(r, kt));
  t.backward(f);
  const double expected = std::exp(theta) * 2.0 * theta + std::exp(theta) * k;
  EXPECT_NEAR(th.grad().item(), expected, 1e-14);
}

// Path decomposition: y = a*b + a*c, with c = detach(a*2). Detaching c
// removes only the path through c.
TEST(Detach, ZeroesOnlyTheDetachedPath) {
  Tape t;
  Tensor a = t.variable(Matrix::scalar(1.5));
  Tensor b = t.variable(Matrix::scalar(-0.5));
  Tensor c_live = ad::scale(a, 2.0);
  Tensor c_dead = ad::detach(c_live);
  t.backward(ad::add(ad::mul(a, b), ad::mul(a, c_dead)));
  // d/da [a b + a c] with c constant = b + c = -0.5 + 3
  EXPECT_DOUBLE_EQ(a.grad().item(), 2.5);
  EXPECT_DOUBLE_EQ(b.grad().item(), 1.5);
  t.zero_grad();
  t.backward(ad::add(ad::mul(a, b), ad::mul(a, c_live)));
  // with c live: b + 4a = -0.5 + 6
  EXPECT_DOUBLE_EQ(a.grad().item(), 5.5);
}

TEST(StraightThrough, HardValueRelaxedGradient) {
  Tape t;
  Tensor logits = t.variable(Matrix::row({0.2, 1.0, -0.4}));
  Tensor soft = ad::softmax(logits);
  Matrix hard = Matrix::row({0, 1, 0});
  Tensor st = ad::straight_through(hard, soft);
  EXPECT_EQ(st.value(), hard);
  Matrix w = Matrix::row({0.3, -1.2, 2.0});
  t.backward(ad::sum(ad::mul(st, t.constant(w))));
  const Matrix g_st = logits.grad();

  Tape ref;
  Tensor logits2 = ref.variable(Matrix::row({0.2, 1.0, -0.4}));
  ref.backward(ad::sum(ad::mul(ad::softmax(logits2), ref.constant(w))));
  EXPECT_EQ(g_st, logits2.grad());
}

TEST(StraightThrough, ShapeMustMatch) {
  Tape t;
  Tensor soft = t.variable(Matrix::row({0.5, 0.5}));
  EXPECT_THROW(ad::straight_through(Matrix::row({1, 0, 0}), soft), bpta::ShapeError);
}

TEST(GradOf, AffineIntermediate) {
  Tape t;
  Tensor th = t.variable(Matrix::scalar(0.4));
  Tensor a = ad::exp(th);
  Tensor out = ad::add_scalar(ad::scale(a, 3.0), 2.0);
  auto g = t.grad_of(out, a);
  EXPECT_TRUE(g.has_path);
  EXPECT_EQ(g.grad.item(), 3.0);
  EXPECT_EQ(th.grad().item(), 0.0);
}

TEST(GradOf, NoPathGivesZeroAndFlag) {
  Tape t;
  Tensor a = t.variable(Matrix::row({1.0, 2.0}));
  Tensor b = t.variable(Matrix::row({3.0, 4.0}));
  auto g = t.grad_of(ad::square(b), a);
  EXPECT_FALSE(g.has_path);
  EXPECT_EQ(g.grad, Matrix(1, 2));
}

TEST(GradOf, ZeroGradientWithPathKeepsFlag) {
  Tape t;
  Tensor a = t.variable(Matrix::scalar(-1.0));
  auto g = t.grad_of(ad::relu(a), a);
  EXPECT_TRUE(g.has_path);
  EXPECT_EQ(g.grad.item(), 0.0);
}

TEST(GradOf, DoesNotDisturbStoredGrads) {
  Tape t;
  Tensor w = t.variable(Matrix::row({1.0, -2.0}));
  Tensor y = ad::sum(ad::square(w));
  t.backward(y);
  const Matrix before = w.grad();
  (void)t.grad_of(y, w);
  EXPECT_EQ(w.grad(), before);
}

// log softmax(a W)[k] with respect to the row vector a.
TEST(GradOf, LogSoftmaxMatchesFiniteDifferences) {
  Rng rng(5);
  const Matrix W = random_matrix(4, 3, rng);
  const Matrix a0 = random_matrix(1, 4, rng);
  const std::size_t k = 1;
  auto f = [&](const Matrix& av) {
    double z[3];
    for (std::size_t c = 0; c < 3; ++c) {
      z[c] = 0.0;
      for (std::size_t p = 0; p < 4; ++p) z[c] += av(0, p) * W(p, c);
    }
    const double m = std::max({z[0], z[1], z[2]});
    const double lse = m + std::log(std::exp(z[0] - m) + std::exp(z[1] - m) + std::exp(z[2] - m));
    return z[k] - lse;
  };
  Tape t;
  Tensor a = t.variable(a0);
  const std::size_t idx[] = {k};
  Tensor out = ad::pick(ad::log_softmax(ad::matmul(a, t.constant(W))), idx);
  auto g = t.grad_of(out, a);
  for (std::size_t p = 0; p < 4; ++p) {
    Matrix ap = a0, am = a0;
    ap(0, p) += 1e-5;
    am(0, p) -= 1e-5;
    const double fd = (f(ap) - f(am)) / 2e-5;
    EXPECT_NEAR(g.grad(0, p), fd, 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

// Independent forward evaluation for the random-network property test.
struct Net {
  std::vector<Matrix> w, b;
  std::vector<int> act;  // 0 relu, 1 tanh
  int head = 0;          // 0 log-softmax pick, 1 mean square, 2 mean exp-tanh
  std::vector<std::size_t> labels;
};

double plain_loss(const Net& n, const Matrix& x) {
  Matrix h = x;
  for (std::size_t l = 0; l < n.w.size(); ++l) {
    Matrix z(h.rows(), n.w[l].cols());
    for (std::size_t r = 0; r < h.rows(); ++r)
      for (std::size_t c = 0; c < z.cols(); ++c) {
        double s = n.b[l](0, c);
        for (std::size_t p = 0; p < h.cols(); ++p) s += h(r, p) * n.w[l](p, c);
        const bool last = l + 1 == n.w.size();
        z(r, c) = last ? s : (n.act[l] == 0 ? std::max(0.0, s) : std::tanh(s));
      }
    h = z;
  }
  double total = 0.0;
  for (std::size_t r = 0; r < h.rows(); ++r) {
    if (n.head == 0) {
      double m = -1e300;
      for (std::size_t c = 0; c < h.cols(); ++c) m = std::max(m, h(r, c));
      double s = 0.0;
      for (std::size_t c = 0; c < h.cols(); ++c) s += std::exp(h(r, c) - m);
      total += h(r, n.labels[r]) - m - std::log(s);
    } else {
      for (std::size_t c = 0; c < h.cols(); ++c)
        total += n.head == 1 ? h(r, c) * h(r, c) : std::exp(std::tanh(h(r, c)));
    }
  }
  const double denom = n.head == 0 ? static_cast<double>(h.rows()) : static_cast<double>(h.rows() * h.cols());
  return total / denom;
}

Tensor tape_loss(Tape& t, const Net& n, const Matrix& x, std::vector<Tensor>& params) {
  Tensor h = t.constant(x);
  for (std::size_t l = 0; l < n.w.size(); ++l) {
    Tensor w = t.variable(n.w[l]), b = t.variable(n.b[l]);
    params.push_back(w);
    params.push_back(b);
    h = ad::add(ad::matmul(h, w), b);
    if (l + 1 < n.w.size()) h = n.act[l] == 0 ? ad::relu(h) : ad::tanh(h);
  }
  if (n.head == 0) return ad::mean(ad::pick(ad::log_softmax(h), n.labels));
  if (n.head == 1) return ad::mean(ad::square(h));
  return ad::mean(ad::exp(ad::tanh(h)));
}

TEST(FiniteDifference, HundredRandomNetworks) {
  Rng rng(2024);
  std::size_t checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Net n;
    const std::size_t layers = 1 + rng.index(3);
    const std::size_t rows = 1 + rng.index(5);
    std::size_t in = 1 + rng.index(16);
    const Matrix x = random_matrix(rows, in, rng);
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t out = l + 1 == layers ? 2 + rng.index(5) : 1 + rng.index(16);
      n.w.push_back(random_matrix(in, out, rng, 1.0 / std::sqrt(static_cast<double>(in))));
      n.b.push_back(random_matrix(1, out, rng, 0.1));
      n.act.push_back(static_cast<int>(rng.index(2)));
      in = out;
    }
    n.head = static_cast<int>(rng.index(3));
    for (std::size_t r = 0; r < rows; ++r) n.labels.push_back(rng.index(in));

    Tape t;
    std::vector<Tensor> params;
    Tensor loss = tape_loss(t, n, x, params);
    ASSERT_NEAR(loss.value().item(), plain_loss(n, x), 1e-12);
    t.backward(loss);
    for (std::size_t k = 0; k < params.size(); ++k) {
      Matrix& target = k % 2 == 0 ? n.w[k / 2] : n.b[k / 2];
      const Matrix g = params[k].grad();
      for (std::size_t e = 0; e < target.data().size(); ++e) {
        const double saved = target.data()[e];
        target.data()[e] = saved + 1e-5;
        const double up = plain_loss(n, x);
        target.data()[e] = saved - 1e-5;
        const double down = plain_loss(n, x);
        target.data()[e] = saved;
        const double fd = (up - down) / 2e-5;
        const double an = g.data()[e];
        const double err = std::abs(fd - an);
        const bool ok = err <= 1e-7 || err / std::max(std::abs(fd), std::abs(an)) <= 1e-4;
        EXPECT_TRUE(ok) << "trial " << trial << " param " << k << " entry " << e << " fd " << fd << " ad " << an;
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 1000u);
}

}  // namespace
