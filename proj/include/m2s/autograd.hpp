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

#ifndef M2S_AUTOGRAD_HPP_
#define M2S_AUTOGRAD_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "m2s/common.hpp"

namespace m2s::autograd {

// Named trainable matrices. A Tape reads them without copying and collects
// their gradients separately, so one ParameterSet can back several tapes.
class ParameterSet {
 public:
  int add(std::string name, Matrix init);

  std::size_t size() const { return values_.size(); }
  Matrix& value(int i) { return values_[i]; }
  const Matrix& value(int i) const { return values_[i]; }
  const std::string& name(int i) const { return names_[i]; }
  int find(const std::string& name) const;  // -1 when absent

  // Total number of scalars.
  Eigen::Index count() const;
  std::vector<Matrix> zeros_like() const;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

struct Var {
  int id = -1;
};

class Tape {
 public:
  explicit Tape(const ParameterSet* params = nullptr);

  Var constant(Matrix value);
  Var param(int index);

  const Matrix& value(Var v) const;
  // Gradient of the last backward() target w.r.t. `v`; empty if unreached.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  // Reverse sweep from a 1x1 output, seeding d(out) = seed.
  void backward(Var output, double seed = 1.0);

  // Per-parameter gradients accumulated by backward(); zero where unused.
  const std::vector<Matrix>& param_grads() const { return param_grads_; }

  // Building blocks for ops.
  using Backward = std::function<void(Tape&, int self)>;
  Var push(Matrix value, std::span<const Var> parents, Backward backward);
  Var push(Matrix value, std::initializer_list<Var> parents, Backward backward) {
    return push(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
                std::move(backward));
  }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  void accumulate(int id, const Matrix& g);
  template <typename Expr>
  void accumulate_expr(int id, const Expr& g) {
    if (!nodes_[id].requires_grad) return;
    Matrix& dst = nodes_[id].grad;
    if (dst.size() == 0) {
      dst = g;
    } else {
      dst += g;
    }
  }
  const Matrix& grad_of(int id) const { return nodes_[id].grad; }
  const Matrix& value_of(int id) const;

 private:
  struct Node {
    Matrix value;
    const Matrix* ref = nullptr;  // parameter leaves point into the set
    Matrix grad;
    Backward backward;
    int param_index = -1;
    bool requires_grad = false;
  };
  const ParameterSet* params_;
  std::vector<Node> nodes_;
  std::vector<Matrix> param_grads_;
};

// Shapes follow Eigen: rows x cols. All ops are differentiable in every
// non-constant argument.
Var matmul(Tape& t, Var a, Var b);     // a * b
Var matmul_nt(Tape& t, Var a, Var b);  // a * b^T
Var add(Tape& t, Var a, Var b);
Var add_row(Tape& t, Var a, Var row);  // broadcast a 1 x C row over a
Var scale(Tape& t, Var a, double s);
Var relu(Tape& t, Var a);
Var softmax_rows(Tape& t, Var a);
Var layer_norm(Tape& t, Var x, Var gamma, Var beta, double eps = 1e-5);
Var slice_cols(Tape& t, Var a, Eigen::Index start, Eigen::Index count);
Var concat_cols(Tape& t, std::span<const Var> parts);
// T x C -> T x (kernel * C); block k holds x shifted by k - (kernel - 1) / 2
// frames with zero padding, so a matmul with it is a "same" 1-D convolution.
Var unfold_time(Tape& t, Var x, int kernel);
// (1 / T) * sum_t ||pred_t - target_t||^2 as a 1 x 1 value.
Var mse(Tape& t, Var pred, const Matrix& target);
// Connectionist temporal classification loss of per-frame logits.
Var ctc(Tape& t, Var logits, std::span<const int> target, int blank);

}  // namespace m2s::autograd

#endif  // M2S_AUTOGRAD_HPP_
