// Copyright (c) 2026 The m2s Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <functional>

#include "gradcheck.hpp"
#include "m2s/autograd.hpp"

namespace m2s {
namespace {

using autograd::ParameterSet;
using autograd::Tape;
using autograd::Var;

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

using Op = std::function<Var(Tape&, const std::vector<Var>&)>;

// Reduces op(params) to a scalar through mse against a random target and
// compares every parameter gradient with central differences.
void check_op(std::vector<Matrix> inits, const Op& op, double tol = 1e-6) {
  ParameterSet ps;
  for (std::size_t i = 0; i < inits.size(); ++i) ps.add("p" + std::to_string(i), inits[i]);
  Rng rng(3);
  Matrix target;
  auto run = [&](Tape& t) {
    std::vector<Var> vars;
    for (std::size_t i = 0; i < ps.size(); ++i) vars.push_back(t.param(static_cast<int>(i)));
    const Var out = op(t, vars);
    if (target.size() == 0) {
      target = random_matrix(rng, t.value(out).rows(), t.value(out).cols());
    }
    return autograd::mse(t, out, target);
  };
  Tape tape(&ps);
  const Var loss = run(tape);
  tape.backward(loss);
  const auto grads = tape.param_grads();
  const double h = 1e-6;
  for (std::size_t p = 0; p < ps.size(); ++p) {
    Matrix& v = ps.value(static_cast<int>(p));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double saved = v.data()[i];
      v.data()[i] = saved + h;
      Tape a(&ps);
      const double up = a.value(run(a))(0, 0);
      v.data()[i] = saved - h;
      Tape b(&ps);
      const double dn = b.value(run(b))(0, 0);
      v.data()[i] = saved;
      EXPECT_NEAR(grads[p].data()[i], (up - dn) / (2 * h), tol) << "param " << p << " idx " << i;
    }
  }
}

TEST(Autograd, Matmul) {
  Rng rng(1);
  check_op({random_matrix(rng, 3, 4), random_matrix(rng, 4, 2)},
           [](Tape& t, const std::vector<Var>& v) { return autograd::matmul(t, v[0], v[1]); });
  check_op({random_matrix(rng, 3, 4), random_matrix(rng, 5, 4)},
           [](Tape& t, const std::vector<Var>& v) { return autograd::matmul_nt(t, v[0], v[1]); });
}

TEST(Autograd, AddScaleRelu) {
  Rng rng(2);
  check_op({random_matrix(rng, 3, 4), random_matrix(rng, 1, 4), random_matrix(rng, 3, 4)},
           [](Tape& t, const std::vector<Var>& v) {
             const Var s = autograd::add(t, autograd::add_row(t, v[0], v[1]), v[2]);
             return autograd::relu(t, autograd::scale(t, s, 1.7));
           });
}

TEST(Autograd, SoftmaxAndLayerNorm) {
  Rng rng(4);
  check_op({random_matrix(rng, 4, 5)},
           [](Tape& t, const std::vector<Var>& v) { return autograd::softmax_rows(t, v[0]); });
  check_op({random_matrix(rng, 4, 6), random_matrix(rng, 1, 6), random_matrix(rng, 1, 6)},
           [](Tape& t, const std::vector<Var>& v) {
             return autograd::layer_norm(t, v[0], v[1], v[2]);
           });
}

TEST(Autograd, SliceConcatUnfold) {
  Rng rng(5);
  check_op({random_matrix(rng, 4, 6)}, [](Tape& t, const std::vector<Var>& v) {
    const Var parts[] = {autograd::slice_cols(t, v[0], 3, 3), autograd::slice_cols(t, v[0], 0, 2)};
    return autograd::concat_cols(t, parts);
  });
  check_op({random_matrix(rng, 5, 3)},
           [](Tape& t, const std::vector<Var>& v) { return autograd::unfold_time(t, v[0], 3); });
}

TEST(Autograd, UnfoldIsSameConvolution) {
  Tape t;
  Matrix x(3, 1);
  x << 1, 2, 3;
  const Var u = autograd::unfold_time(t, t.constant(x), 3);
  Matrix expected(3, 3);
  expected << 0, 1, 2, 1, 2, 3, 2, 3, 0;
  EXPECT_EQ(t.value(u), expected);
}

TEST(Autograd, CtcNode) {
  Rng rng(6);
  const std::vector<int> target{2, 1};
  check_op({random_matrix(rng, 5, 4)}, [&](Tape& t, const std::vector<Var>& v) {
    return autograd::ctc(t, v[0], target, 0);
  });
}

TEST(Autograd, TotalLossGradientCheck) {
  const auto report = testing::check_total_loss_gradient(42, 12, 80);
  EXPECT_EQ(report.sampled, 80);
  EXPECT_LE(report.max_rel_error, 1e-4);
}

TEST(Autograd, ParameterSetLookup) {
  ParameterSet ps;
  EXPECT_EQ(ps.add("a", Matrix::Zero(2, 3)), 0);
  EXPECT_EQ(ps.add("b", Matrix::Zero(1, 4)), 1);
  EXPECT_EQ(ps.find("b"), 1);
  EXPECT_EQ(ps.find("c"), -1);
  EXPECT_EQ(ps.count(), 10);
}

}  // namespace
}  // namespace m2s
