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
#include <numbers>
#include <vector>

#include "bpta/policy/joint_policy.hpp"

namespace {

using bpta::ActionBatch;
using bpta::ActionSpace;
using bpta::Rng;
using bpta::ad::Matrix;
using bpta::ad::Tape;
using bpta::ad::Tensor;
using namespace bpta::policy;
namespace ad = bpta::ad;

Matrix gram_rows(const Matrix& m) {
  Matrix g(m.rows(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.rows(); ++j)
      for (std::size_t k = 0; k < m.cols(); ++k) g(i, j) += m(i, k) * m(j, k);
  return g;
}

// Single affine layer policy with observation [1]; logits / mean are the
// bias plus the weight row.
AgentPolicy affine_policy(ActionSpace space, Matrix weight_row, double tau = 1.0) {
  Rng rng(1);
  AgentPolicy p(space, 1, {}, MlpShape{0, 0}, tau, rng);
  p.net().weights[0] = std::move(weight_row);
  return p;
}

TEST(Orthogonal, WideMatrixHasOrthonormalRows) {
  Rng rng(7);
  const Matrix m = orthogonal(3, 32, 2.0, rng);
  const Matrix g = gram_rows(m);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(g(i, j), i == j ? 4.0 : 0.0, 1e-12);
}

TEST(Orthogonal, TallMatrixHasOrthonormalColumns) {
  Rng rng(8);
  const Matrix m = orthogonal(64, 3, 1.0, rng).transposed();
  const Matrix g = gram_rows(m);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(g(i, j), i == j ? 1.0 : 0.0, 1e-12);
}

TEST(Mlp, InitShapesChainAndBiasesAreZero) {
  Rng rng(2);
  const auto p = MlpParams::init(5, 3, MlpShape{2, 16}, 0.01, rng);
  ASSERT_EQ(p.weights.size(), 3u);
  EXPECT_EQ(p.input_dim(), 5u);
  EXPECT_EQ(p.output_dim(), 3u);
  EXPECT_EQ(p.hidden_layers(), 2u);
  for (const auto& b : p.biases)
    for (double x : b.data()) EXPECT_EQ(x, 0.0);
  EXPECT_NO_THROW(p.validate());
}

TEST(Mlp, ValidateRejectsBrokenChainAndNonFinite) {
  Rng rng(2);
  auto p = MlpParams::init(4, 2, MlpShape{1, 8}, 1.0, rng);
  auto broken = p;
  broken.weights[1] = Matrix(7, 2);
  EXPECT_THROW(broken.validate(), bpta::ShapeError);
  auto nan = p;
  nan.biases[0](0, 0) = std::nan("");
  EXPECT_THROW(nan.validate(), bpta::DomainError);
}

TEST(SampleReparam, GaussianZeroNoiseGivesMean) {
  const auto p = affine_policy(ActionSpace::continuous(1), Matrix::row({0.5}));
  Tape t;
  auto s = sample_reparam(p, t.constant(Matrix::row({1.0})), {}, Matrix(1, 1, 0.0));
  EXPECT_DOUBLE_EQ(s.action.values(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(s.relaxed.value()(0, 0), 0.5);
}

TEST(SampleReparam, GaussianLogProbAtMean) {
  auto p = affine_policy(ActionSpace::continuous(2), Matrix::row({0.5, -1.0}));
  p.log_std() = Matrix::row({0.0, 0.3});
  Tape t;
  auto s = sample_reparam(p, t.constant(Matrix::row({1.0})), {}, Matrix(1, 2, 0.0));
  const double expected = -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(2.0 * std::numbers::pi * std::exp(0.6));
  EXPECT_NEAR(s.log_prob.value().item(), expected, 1e-14);
}

TEST(SampleReparam, GaussianReparamDifferentiableInMeanAndScale) {
  auto p = affine_policy(ActionSpace::continuous(1), Matrix::row({0.2}));
  p.log_std() = Matrix::row({0.4});
  Tape t;
  AgentGraph g = p.forward(t, t.constant(Matrix::row({1.0})), {});
  const double eps = 0.7;
  Tensor a = p.reparam(g, Matrix::row({eps}), p.hard_action(g, Matrix::row({eps})));
  t.backward(ad::sum(a));
  EXPECT_DOUBLE_EQ(g.params[1].grad().item(), 1.0);                       // bias
  EXPECT_NEAR(g.log_std.grad().item(), std::exp(0.4) * eps, 1e-15);  // d/dlogsigma
}

TEST(SampleReparam, CategoricalDominantLogitLowTemperature) {
  const auto p = affine_policy(ActionSpace::discrete(3), Matrix::row({10.0, 0.0, 0.0}), 0.1);
  Tape t;
  auto s = sample_reparam(p, t.constant(Matrix::row({1.0})), {}, Matrix(1, 3, 0.0));
  EXPECT_EQ(s.action.indices[0], 0u);
  Tensor relaxed = ad::softmax(ad::scale(t.constant(Matrix::row({10.0, 0.0, 0.0})), 1.0 / 0.1));
  EXPECT_NEAR(relaxed.value()(0, 0), 1.0, 1e-8);
  EXPECT_NEAR(relaxed.value()(0, 1), 0.0, 1e-8);
  EXPECT_NEAR(relaxed.value()(0, 2), 0.0, 1e-8);
  EXPECT_EQ(s.relaxed.value(), Matrix::row({1.0, 0.0, 0.0}));
}

TEST(SampleReparam, CategoricalStraightThroughUsesRelaxedGradient) {
  const double tau = 0.7;
  const auto p = affine_policy(ActionSpace::discrete(3), Matrix::row({0.3, -0.2, 0.5}), tau);
  const Matrix noise = Matrix::row({0.1, 0.9, -0.4});
  Tape t;
  AgentGraph g = p.forward(t, t.constant(Matrix::row({1.0})), {});
  auto hard = p.hard_action(g, noise);
  // argmax(0.4, 0.7, 0.1) = 1
  EXPECT_EQ(hard.indices[0], 1u);
  Tensor a = p.reparam(g, noise, hard);
  EXPECT_EQ(a.value(), Matrix::row({0.0, 1.0, 0.0}));
  const Matrix w = Matrix::row({1.0, -2.0, 0.5});
  t.backward(ad::sum(ad::mul(a, t.constant(w))));

  // Oracle: d/dz of w . softmax((z + G)/tau) = J^T w / tau.
  double y[3], s = 0.0;
  const double z[3] = {0.4, 0.7, 0.1};
  for (int c = 0; c < 3; ++c) s += std::exp(z[c] / tau);
  for (int c = 0; c < 3; ++c) y[c] = std::exp(z[c] / tau) / s;
  const double wy = w(0, 0) * y[0] + w(0, 1) * y[1] + w(0, 2) * y[2];
  const Matrix gb = g.params[1].grad();
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(gb(0, c), y[c] * (w(0, c) - wy) / tau, 1e-14);
}

TEST(SampleReparam, NonPositiveTemperatureIsConfigError) {
  Rng rng(0);
  EXPECT_THROW(AgentPolicy(ActionSpace::discrete(3), 1, {}, MlpShape{}, 0.0, rng), bpta::ConfigError);
  EXPECT_THROW(AgentPolicy(ActionSpace::discrete(3), 1, {}, MlpShape{}, -1.0, rng), bpta::ConfigError);
  auto p = affine_policy(ActionSpace::discrete(3), Matrix::row({0, 0, 0}));
  EXPECT_THROW(p.set_tau(0.0), bpta::ConfigError);
}

TEST(SampleReparam, NonFiniteLogitsAreDomainError) {
  const auto p = affine_policy(ActionSpace::discrete(3), Matrix::row({std::nan(""), 0.0, 0.0}));
  Tape t;
  EXPECT_THROW(p.forward(t, t.constant(Matrix::row({1.0})), {}), bpta::DomainError);
}

TEST(SampleReparam, CategoricalSoftmaxIsNormalisedAndPositive) {
  Rng rng(4);
  AgentPolicy p(ActionSpace::discrete(5), 3, {}, MlpShape{1, 16}, 1.0, rng);
  for (auto* m : p.parameters())
    for (double& x : m->data()) x = 3.0 * rng.normal();
  Tape t;
  Matrix obs(20, 3);
  for (double& x : obs.data()) x = rng.normal();
  AgentGraph g = p.forward(t, t.constant(obs), {});
  Tensor probs = ad::softmax(g.head);
  for (std::size_t r = 0; r < 20; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 5; ++c) {
      EXPECT_GT(probs.value()(r, c), 0.0);
      s += probs.value()(r, c);
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(SampleReparam, ReplayingStoredNoiseReproducesActions) {
  Rng rng(9);
  AgentPolicy gauss(ActionSpace::continuous(2), 3, {}, MlpShape{1, 8}, 1.0, rng);
  AgentPolicy cat(ActionSpace::discrete(4), 3, {}, MlpShape{1, 8}, 1.0, rng);
  Matrix obs(50, 3);
  for (double& x : obs.data()) x = rng.normal();
  const Matrix eg = sample_noise(gauss.space(), 50, rng);
  const Matrix ec = sample_noise(cat.space(), 50, rng);
  Tape t1, t2;
  auto a1 = sample_reparam(gauss, t1.constant(obs), {}, eg);
  auto a2 = sample_reparam(gauss, t2.constant(obs), {}, eg);
  EXPECT_EQ(a1.action.values, a2.action.values);
  EXPECT_EQ(a1.relaxed.value(), a1.action.values);
  auto c1 = sample_reparam(cat, t1.constant(obs), {}, ec);
  auto c2 = sample_reparam(cat, t2.constant(obs), {}, ec);
  EXPECT_EQ(c1.action.indices, c2.action.indices);
  EXPECT_EQ(c1.log_prob.value(), c2.log_prob.value());
}

TEST(SampleReparam, GaussianEntropyMatchesClosedForm) {
  auto p = affine_policy(ActionSpace::continuous(2), Matrix::row({0.0, 0.0}));
  p.log_std() = Matrix::row({0.1, -0.5});
  Tape t;
  AgentGraph g = p.forward(t, t.constant(Matrix(3, 1, 1.0)), {});
  const double expected = 2.0 * (0.5 + 0.5 * std::log(2.0 * std::numbers::pi)) + 0.1 - 0.5;
  for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(p.entropy(g).value()(r, 0), expected, 1e-14);
}

TEST(Dependency, FullSetsUnderSequentialOrder) {
  const auto order = ExecutionOrder::sequential(4);
  const auto d = DependencySets::full(order);
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<std::size_t> f, b;
    for (std::size_t j = 0; j < i; ++j) f.push_back(j);
    for (std::size_t j = i + 1; j < 4; ++j) b.push_back(j);
    EXPECT_EQ(d.forward(i), f);
    EXPECT_EQ(d.backward(i), b);
  }
}

TEST(Dependency, ForwardAndBackwardAreDual) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.index(5);
    const auto order = ExecutionOrder::make(OrderMode::kRandom, n, rng);
    std::vector<std::vector<std::size_t>> f(n);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = 0; q < p; ++q)
        if (rng.index(2)) f[order.agent_at(p)].push_back(order.agent_at(q));
    const DependencySets d(f, order);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const auto& fi = d.forward(i);
        const auto& bj = d.backward(j);
        const bool in_f = std::find(fi.begin(), fi.end(), j) != fi.end();
        const bool in_b = std::find(bj.begin(), bj.end(), i) != bj.end();
        EXPECT_EQ(in_f, in_b);
      }
  }
}

TEST(Dependency, RejectsEdgesAgainstTheOrder) {
  const auto order = ExecutionOrder::sequential(3);
  EXPECT_THROW(DependencySets({{1}, {}, {}}, order), bpta::ConfigError);
  EXPECT_THROW(DependencySets({{}, {1}, {}}, order), bpta::ConfigError);
  EXPECT_THROW(DependencySets({{}, {0, 0}, {}}, order), bpta::ConfigError);
  EXPECT_THROW(DependencySets({{}, {}}, order), bpta::ConfigError);
}

TEST(Dependency, ReverseOrderFlipsTheSets) {
  Rng rng;
  const auto order = ExecutionOrder::make(OrderMode::kReverse, 3, rng);
  EXPECT_EQ(order.agents(), (std::vector<std::size_t>{2, 1, 0}));
  const auto d = DependencySets::full(order);
  EXPECT_EQ(d.forward(0), (std::vector<std::size_t>{2, 1}));
  EXPECT_TRUE(d.forward(2).empty());
}

TEST(ExecutionOrderTest, RandomModeIsAPermutationFixedBySeed) {
  Rng a(5), b(5);
  const auto o1 = ExecutionOrder::make(OrderMode::kRandom, 6, a);
  const auto o2 = ExecutionOrder::make(OrderMode::kRandom, 6, b);
  EXPECT_EQ(o1.agents(), o2.agents());
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(o1.agent_at(o1.position_of(i)), i);
  EXPECT_THROW(ExecutionOrder({0, 0, 1}, OrderMode::kSequential), bpta::ConfigError);
  EXPECT_THROW(parse_order_mode("sideways"), bpta::ConfigError);
}

TEST(Encoding, DiscreteOneHot) {
  const std::size_t idx[] = {1};
  EXPECT_EQ(ad::one_hot(idx, 3), Matrix::row({0, 1, 0}));
  ActionBatch a{{1}, {}};
  EXPECT_EQ(a.encoded(ActionSpace::discrete(3)), Matrix::row({0, 1, 0}));
}

TEST(Encoding, IdentityProjectionMatchesNoProjection) {
  Tape t;
  Tensor a = t.constant(Matrix::from_rows({{0, 1, 0}, {1, 0, 0}}));
  Tensor b = t.constant(Matrix::from_rows({{0, 0, 1}, {0, 1, 0}}));
  const std::vector<Tensor> acts{a, b};
  const std::vector<ActionEncoding> plain{{ActionSpace::discrete(3), std::nullopt, false},
                                          {ActionSpace::discrete(3), std::nullopt, false}};
  const std::vector<ActionEncoding> ident{{ActionSpace::discrete(3), Matrix::identity(3), false},
                                          {ActionSpace::discrete(3), Matrix::identity(3), false}};
  EXPECT_EQ(encode_preceding(t, acts, plain).value(), encode_preceding(t, acts, ident).value());
}

TEST(Encoding, ContinuousConcatenation) {
  Tape t;
  const std::vector<Tensor> acts{t.constant(Matrix::row({0.3})), t.constant(Matrix::row({-0.7}))};
  const std::vector<ActionEncoding> enc{{ActionSpace::continuous(1), std::nullopt, false},
                                        {ActionSpace::continuous(1), std::nullopt, false}};
  EXPECT_EQ(encode_preceding(t, acts, enc).value(), Matrix::row({0.3, -0.7}));
}

TEST(Encoding, DimensionMismatchIsStructuredError) {
  Tape t;
  const std::vector<Tensor> acts{t.constant(Matrix::row({0, 1}))};
  const std::vector<ActionEncoding> enc{{ActionSpace::discrete(3), std::nullopt, false}};
  EXPECT_THROW(encode_preceding(t, acts, enc), bpta::ShapeError);
  const std::vector<ActionEncoding> two{enc[0], enc[0]};
  EXPECT_THROW(encode_preceding(t, acts, two), bpta::ShapeError);
}

TEST(Encoding, EncodingIsDifferentiableInRelaxedAction) {
  Rng rng(3);
  Tape t;
  Tensor a = t.variable(Matrix::row({0.2, 0.5, 0.3}));
  const Matrix proj = random_projection(3, 8, rng);
  const std::vector<Tensor> acts{a};
  const std::vector<ActionEncoding> enc{{ActionSpace::discrete(3), proj, false}};
  Tensor e = encode_preceding(t, acts, enc);
  EXPECT_EQ(e.shape().cols, 8u);
  auto g = t.grad_of(ad::sum(e), a);
  EXPECT_TRUE(g.has_path);
  for (std::size_t k = 0; k < 3; ++k) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < 8; ++c) row_sum += proj(k, c);
    EXPECT_NEAR(g.grad(0, k), row_sum, 1e-14);
  }
}

JointPolicy two_agent_game(Rng& rng, bool proj = false, bool learned = false) {
  const auto order = ExecutionOrder::sequential(2);
  return JointPolicy({ActionSpace::discrete(3), ActionSpace::discrete(3)}, {3, 3}, order, DependencySets::full(order),
                     MlpShape{1, 64}, 1.0, ProjectionSpec{proj, 32, learned}, rng);
}

TEST(Joint, ProjectionFrozenUnlessLearned) {
  Rng rng(1);
  auto frozen = two_agent_game(rng, true, false);
  auto learned = two_agent_game(rng, true, true);
  EXPECT_EQ(frozen.agent(1).input_dim(), 3u + 32u);
  EXPECT_EQ(frozen.agent(1).parameters().size(), 4u);
  EXPECT_EQ(learned.agent(1).parameters().size(), 5u);
  EXPECT_EQ(frozen.agent(0).input_dim(), 3u);
}

TEST(Joint, SingleAgentReducesToAgentSampling) {
  Rng a(3), b(3);
  const auto order = ExecutionOrder::sequential(1);
  JointPolicy j({ActionSpace::discrete(3)}, {2}, order, DependencySets::full(order), MlpShape{}, 1.0, {}, a);
  AgentPolicy single(ActionSpace::discrete(3), 2, {}, MlpShape{}, 1.0, b);
  Rng n(4);
  const Matrix noise = sample_noise(single.space(), 10, n);
  Matrix obs(10, 2, 1.0);
  Tape t;
  const std::vector<Matrix> o{obs}, e{noise};
  auto js = j.forward(t, o, e, FeedMode::kHard);
  auto ss = sample_reparam(single, t.constant(obs), {}, noise);
  EXPECT_EQ(js.actions[0].indices, ss.action.indices);
  EXPECT_EQ(js.log_probs[0].value(), ss.log_prob.value());
  EXPECT_EQ(js.joint_log_prob.value(), ss.log_prob.value());
}

TEST(Joint, UniformHeadsGiveUniformJointDistribution) {
  Rng rng(21);
  auto j = two_agent_game(rng);
  for (std::size_t i = 0; i < 2; ++i) {
    auto& net = j.agent(i).net();
    net.weights.back().fill(0.0);
    net.biases.back().fill(0.0);
  }
  const std::size_t N = 100000;
  Matrix obs0(N, 3), obs1(N, 3);
  for (std::size_t r = 0; r < N; ++r) {
    obs0(r, 0) = obs0(r, 1) = 1.0;
    obs1(r, 0) = obs1(r, 2) = 1.0;
  }
  const std::vector<Matrix> obs{obs0, obs1};
  const std::vector<Matrix> noise{rng.gumbel_matrix(N, 3), rng.gumbel_matrix(N, 3)};
  Tape t;
  auto s = j.forward(t, obs, noise, FeedMode::kHard);
  double counts[3][3] = {};
  for (std::size_t r = 0; r < N; ++r) counts[s.actions[0].indices[r]][s.actions[1].indices[r]] += 1.0;
  const double p = 1.0 / 9.0, sigma = std::sqrt(N * p * (1.0 - p));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_LE(std::abs(counts[a][b] - N * p), 3.0 * sigma) << a << "," << b;
}

TEST(Joint, JointLogProbIsSumOfConditionals) {
  Rng rng(6);
  auto j = two_agent_game(rng);
  for (std::size_t i = 0; i < 2; ++i)
    for (auto* m : j.agent(i).parameters())
      for (double& x : m->data()) x += 0.5 * rng.normal();
  Matrix obs0(64, 3), obs1(64, 3);
  for (std::size_t r = 0; r < 64; ++r) obs0(r, 0) = obs0(r, 1) = obs1(r, 0) = obs1(r, 2) = 1.0;
  const std::vector<Matrix> obs{obs0, obs1};
  const std::vector<Matrix> noise{rng.gumbel_matrix(64, 3), rng.gumbel_matrix(64, 3)};
  Tape t;
  auto s = j.forward(t, obs, noise, FeedMode::kHard);
  // Term by term: agent 1 conditioned on the one-hot of agent 0's action.
  Tape r;
  AgentGraph g0 = j.agent(0).forward(r, r.constant(obs0), {});
  const std::vector<Tensor> pre{r.constant(s.actions[0].encoded(j.space(0)))};
  AgentGraph g1 = j.agent(1).forward(r, r.constant(obs1), pre);
  const Matrix l0 = j.agent(0).log_prob(g0, s.actions[0]).value();
  const Matrix l1 = j.agent(1).log_prob(g1, s.actions[1]).value();
  for (std::size_t k = 0; k < 64; ++k) {
    EXPECT_EQ(s.log_probs[0].value()(k, 0), l0(k, 0));
    EXPECT_EQ(s.log_probs[1].value()(k, 0), l1(k, 0));
    EXPECT_EQ(s.joint_log_prob.value()(k, 0), l0(k, 0) + l1(k, 0));
  }
}

TEST(Joint, RatioGradientPathExistsOnlyWithDependency) {
  Rng rng(8);
  auto j = two_agent_game(rng);
  for (auto* m : j.agent(1).parameters())
    for (double& x : m->data()) x += 0.3 * rng.normal();
  const std::vector<Matrix> obs{Matrix::row({1, 1, 0}), Matrix::row({1, 0, 1})};
  const std::vector<Matrix> noise{rng.gumbel_matrix(1, 3), rng.gumbel_matrix(1, 3)};
  Tape t;
  auto s = j.forward(t, obs, noise, FeedMode::kRelaxed);
  auto g = t.grad_of(s.log_probs[1], s.fed[0]);
  EXPECT_TRUE(g.has_path);
  double mag = 0.0;
  for (double x : g.grad.data()) mag += std::abs(x);
  EXPECT_GT(mag, 0.0);

  const auto order = ExecutionOrder::sequential(2);
  Rng r2(8);
  JointPolicy indep({ActionSpace::discrete(3), ActionSpace::discrete(3)}, {3, 3}, order, DependencySets::none(order),
                    MlpShape{1, 64}, 1.0, {}, r2);
  Tape t2;
  auto s2 = indep.forward(t2, obs, noise, FeedMode::kRelaxed);
  auto g2 = t2.grad_of(s2.log_probs[1], s2.fed[0]);
  EXPECT_FALSE(g2.has_path);
  EXPECT_EQ(g2.grad, Matrix(1, 3));
}

TEST(Joint, ConsumingAnUnproducedActionIsInternalError) {
  Rng rng(1);
  const auto seq = ExecutionOrder::sequential(2);
  Rng dummy;
  const auto rev = ExecutionOrder::make(OrderMode::kReverse, 2, dummy);
  // Agent 1 consumes agent 0's action, but agent 1 is run first.
  JointPolicy j({ActionSpace::discrete(3), ActionSpace::discrete(3)}, {3, 3}, rev, DependencySets::full(seq),
                MlpShape{}, 1.0, {}, rng);
  const std::vector<Matrix> obs{Matrix::row({1, 1, 0}), Matrix::row({1, 0, 1})};
  const std::vector<Matrix> noise{Matrix(1, 3), Matrix(1, 3)};
  Tape t;
  EXPECT_THROW(j.forward(t, obs, noise, FeedMode::kHard), bpta::InternalError);
}

TEST(Joint, StoredActionsOverrideSampling) {
  Rng rng(2);
  auto j = two_agent_game(rng);
  const std::vector<Matrix> obs{Matrix::row({1, 1, 0}), Matrix::row({1, 0, 1})};
  const std::vector<Matrix> noise{Matrix(1, 3), Matrix(1, 3)};
  const std::vector<ActionBatch> stored{ActionBatch{{2}, {}}, ActionBatch{{1}, {}}};
  Tape t;
  auto s = j.forward(t, obs, noise, FeedMode::kRelaxed, &stored);
  EXPECT_EQ(s.actions[0].indices[0], 2u);
  EXPECT_EQ(s.actions[1].indices[0], 1u);
  EXPECT_EQ(s.fed[0].value(), Matrix::row({0, 0, 1}));
}

}  // namespace
