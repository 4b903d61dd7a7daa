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

#include "m2s/autograd.hpp"

#include <cmath>

#include "m2s/ctc.hpp"
#include "m2s/error.hpp"

namespace m2s::autograd {

int ParameterSet::add(std::string name, Matrix init) {
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return static_cast<int>(values_.size()) - 1;
}

int ParameterSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

Eigen::Index ParameterSet::count() const {
  Eigen::Index n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

std::vector<Matrix> ParameterSet::zeros_like() const {
  std::vector<Matrix> out;
  out.reserve(values_.size());
  for (const auto& v : values_) out.push_back(Matrix::Zero(v.rows(), v.cols()));
  return out;
}

Tape::Tape(const ParameterSet* params) : params_(params) {
  if (params_) param_grads_ = params_->zeros_like();
  nodes_.reserve(256);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(int index) {
  if (!params_ || index < 0 || index >= static_cast<int>(params_->size())) {
    throw Error("tape has no parameter " + std::to_string(index));
  }
  Node n;
  n.ref = &params_->value(index);
  n.param_index = index;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Tape::value_of(int id) const {
  const Node& n = nodes_[id];
  return n.ref ? *n.ref : n.value;
}

const Matrix& Tape::value(Var v) const { return value_of(v.id); }

Var Tape::push(Matrix value, std::span<const Var> parents, Backward backward) {
  Node n;
  n.value = std::move(value);
  for (Var p : parents) n.requires_grad = n.requires_grad || nodes_[p.id].requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(int id, const Matrix& g) { accumulate_expr(id, g); }

void Tape::backward(Var output, double seed) {
  const Matrix& out = value(output);
  if (out.rows() != 1 || out.cols() != 1) throw Error("backward() needs a 1x1 output");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[output.id].grad = Matrix::Constant(1, 1, seed);
  for (int id = output.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;
    if (n.param_index >= 0) {
      param_grads_[n.param_index] += n.grad;
    } else if (n.backward) {
      n.backward(*this, id);
    }
  }
}

Var matmul(Tape& t, Var a, Var b) {
  return t.push(t.value(a) * t.value(b), {a, b}, [a, b](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.requires_grad(a.id)) tp.accumulate_expr(a.id, g * tp.value(b).transpose());
    if (tp.requires_grad(b.id)) tp.accumulate_expr(b.id, tp.value(a).transpose() * g);
  });
}

Var matmul_nt(Tape& t, Var a, Var b) {
  return t.push(t.value(a) * t.value(b).transpose(), {a, b}, [a, b](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    if (tp.requires_grad(a.id)) tp.accumulate_expr(a.id, g * tp.value(b));
    if (tp.requires_grad(b.id)) tp.accumulate_expr(b.id, g.transpose() * tp.value(a));
  });
}

Var add(Tape& t, Var a, Var b) {
  if (t.value(a).rows() != t.value(b).rows() || t.value(a).cols() != t.value(b).cols()) {
    throw Error("add: shape mismatch");
  }
  return t.push(t.value(a) + t.value(b), {a, b}, [a, b](Tape& tp, int self) {
    tp.accumulate(a.id, tp.grad_of(self));
    tp.accumulate(b.id, tp.grad_of(self));
  });
}

Var add_row(Tape& t, Var a, Var row) {
  const Matrix& r = t.value(row);
  if (r.rows() != 1 || r.cols() != t.value(a).cols()) throw Error("add_row: shape mismatch");
  Matrix out = t.value(a).rowwise() + r.row(0);
  return t.push(std::move(out), {a, row}, [a, row](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    tp.accumulate(a.id, g);
    if (tp.requires_grad(row.id)) tp.accumulate_expr(row.id, g.colwise().sum());
  });
}

Var scale(Tape& t, Var a, double s) {
  return t.push(t.value(a) * s, {a}, [a, s](Tape& tp, int self) {
    tp.accumulate_expr(a.id, tp.grad_of(self) * s);
  });
}

Var relu(Tape& t, Var a) {
  return t.push(t.value(a).cwiseMax(0.0), {a}, [a](Tape& tp, int self) {
    const Matrix& x = tp.value(a);
    tp.accumulate_expr(a.id, (x.array() > 0.0).select(tp.grad_of(self), 0.0));
  });
}

Var softmax_rows(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - m).exp();
    y.row(r) /= y.row(r).sum();
  }
  return t.push(std::move(y), {a}, [a](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    const Matrix& yv = tp.value_of(self);
    const Eigen::VectorXd dot = (g.array() * yv.array()).rowwise().sum();
    Matrix dx = yv.array() * (g.colwise() - dot).array();
    tp.accumulate(a.id, dx);
  });
}

Var layer_norm(Tape& t, Var x, Var gamma, Var beta, double eps) {
  const Matrix& xv = t.value(x);
  const Eigen::Index cols = xv.cols();
  const Eigen::VectorXd mean = xv.rowwise().mean();
  Matrix centered = xv.colwise() - mean;
  const Eigen::VectorXd inv_std =
      ((centered.array().square().rowwise().sum() / static_cast<double>(cols)) + eps)
          .rsqrt()
          .matrix();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix y = (xhat.array().rowwise() * t.value(gamma).row(0).array()).rowwise() +
             t.value(beta).row(0).array();
  return t.push(std::move(y), {x, gamma, beta},
                [x, gamma, beta, xhat = std::move(xhat), inv_std](Tape& tp, int self) {
                  const Matrix& g = tp.grad_of(self);
                  if (tp.requires_grad(gamma.id)) {
                    tp.accumulate_expr(gamma.id, (g.array() * xhat.array()).colwise().sum().matrix());
                  }
                  if (tp.requires_grad(beta.id)) tp.accumulate_expr(beta.id, g.colwise().sum());
                  if (tp.requires_grad(x.id)) {
                    const Matrix dxhat = g.array().rowwise() * tp.value(gamma).row(0).array();
                    const Eigen::VectorXd m1 = dxhat.rowwise().mean();
                    const Eigen::VectorXd m2 =
                        (dxhat.array() * xhat.array()).rowwise().mean().matrix();
                    Matrix dx = (dxhat.colwise() - m1).array() - xhat.array().colwise() * m2.array();
                    dx = dx.array().colwise() * inv_std.array();
                    tp.accumulate(x.id, dx);
                  }
                });
}

Var slice_cols(Tape& t, Var a, Eigen::Index start, Eigen::Index count) {
  return t.push(t.value(a).middleCols(start, count), {a},
                [a, start, count](Tape& tp, int self) {
                  if (!tp.requires_grad(a.id)) return;
                  const Matrix& x = tp.value(a);
                  Matrix g = Matrix::Zero(x.rows(), x.cols());
                  g.middleCols(start, count) = tp.grad_of(self);
                  tp.accumulate(a.id, g);
                });
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
  Eigen::Index rows = t.value(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) cols += t.value(p).cols();
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    out.middleCols(at, t.value(p).cols()) = t.value(p);
    at += t.value(p).cols();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return t.push(std::move(out), parts, [keep](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    Eigen::Index off = 0;
    for (Var p : keep) {
      const Eigen::Index c = tp.value(p).cols();
      if (tp.requires_grad(p.id)) tp.accumulate_expr(p.id, g.middleCols(off, c));
      off += c;
    }
  });
}

Var unfold_time(Tape& t, Var x, int kernel) {
  const Matrix& xv = t.value(x);
  const Eigen::Index rows = xv.rows();
  const Eigen::Index c = xv.cols();
  const int pad = (kernel - 1) / 2;
  Matrix out = Matrix::Zero(rows, kernel * c);
  for (int k = 0; k < kernel; ++k) {
    const Eigen::Index shift = k - pad;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index src = r + shift;
      if (src >= 0 && src < rows) out.block(r, k * c, 1, c) = xv.row(src);
    }
  }
  return t.push(std::move(out), {x}, [x, kernel, pad, rows, c](Tape& tp, int self) {
    const Matrix& g = tp.grad_of(self);
    Matrix dx = Matrix::Zero(rows, c);
    for (int k = 0; k < kernel; ++k) {
      const Eigen::Index shift = k - pad;
      for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index src = r + shift;
        if (src >= 0 && src < rows) dx.row(src) += g.block(r, k * c, 1, c);
      }
    }
    tp.accumulate(x.id, dx);
  });
}

Var mse(Tape& t, Var pred, const Matrix& target) {
  const Matrix& p = t.value(pred);
  if (p.rows() != target.rows() || p.cols() != target.cols()) {
    throw ValidationError("mse: shape mismatch");
  }
  const double frames = static_cast<double>(p.rows());
  Matrix diff = p - target;
  const double loss = diff.squaredNorm() / frames;
  return t.push(Matrix::Constant(1, 1, loss), {pred},
                [pred, diff = std::move(diff), frames](Tape& tp, int self) {
                  tp.accumulate_expr(pred.id, diff * (2.0 * tp.grad_of(self)(0, 0) / frames));
                });
}

Var ctc(Tape& t, Var logits, std::span<const int> target, int blank) {
  CtcResult r = ctc_loss_and_grad(t.value(logits), target, blank);
  return t.push(Matrix::Constant(1, 1, r.loss), {logits},
                [logits, grad = std::move(r.grad)](Tape& tp, int self) {
                  tp.accumulate_expr(logits.id, grad * tp.grad_of(self)(0, 0));
                });
}

}  // namespace m2s::autograd
