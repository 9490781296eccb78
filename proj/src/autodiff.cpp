// Copyright 2026 The ENG Authors.
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

#include "eng/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace eng::ad {
namespace {

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  std::ostringstream ss;
  ss << op << ": shape mismatch " << a.shape_string() << " vs " << b.shape_string();
  throw ShapeError(ss.str());
}

Tape* common_tape(Var a, Var b) {
  if (!a.valid() || !b.valid()) throw std::invalid_argument("operation on an unbound Var");
  if (a.tape != b.tape) throw std::invalid_argument("operands recorded on different tapes");
  return a.tape;
}

Tape* tape_of(Var a) {
  if (!a.valid()) throw std::invalid_argument("operation on an unbound Var");
  return a.tape;
}

// C += A * B for row-major A (m x k), B (k x n).
void gemm_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = &c(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      const double* brow = &b(p, 0);
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C += A * B^T for A (m x n), B (k x n) -> C (m x k).
void gemm_nt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t m = a.rows(), n = a.cols(), k = b.rows();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = &a(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = &b(p, 0);
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
      c(i, p) += acc;
    }
  }
}

// C += A^T * B for A (k x m), B (k x n) -> C (m x n).
void gemm_tn_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = &b(p, 0);
    for (std::size_t i = 0; i < m; ++i) {
      const double av = a(p, i);
      if (av == 0.0) continue;
      double* crow = &c(i, 0);
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Visits each softmax lane (row for axis 1, column for axis 0) as a strided
// index sequence.
template <typename Fn>
void for_each_lane(const Tensor& t, int axis, Fn&& fn) {
  if (axis == 1) {
    for (std::size_t r = 0; r < t.rows(); ++r) fn(r * t.cols(), std::size_t{1}, t.cols());
  } else if (axis == 0) {
    for (std::size_t c = 0; c < t.cols(); ++c) fn(c, t.cols(), t.rows());
  } else {
    throw std::invalid_argument("axis must be 0 or 1");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("Tensor: data length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  }
}

Tensor Tensor::row_vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(1, n, std::move(values));
}

Tensor Tensor::column_vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(n, 1, std::move(values));
}

std::string Tensor::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

double Tensor::item() const {
  if (rows_ != 1 || cols_ != 1) throw ShapeError("item() on non-scalar " + shape_string());
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.uniform(-a, a);
  return t;
}

// ---------------------------------------------------------------------------
// ParameterStore

Parameter& ParameterStore::create(const std::string& name, Tensor init) {
  if (params_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
  Parameter p;
  p.value = std::move(init);
  return params_.emplace(name, std::move(p)).first->second;
}

const Tensor& ParameterStore::value(const std::string& name) const { return at(name).value; }

Tensor& ParameterStore::mutable_value(const std::string& name) { return at(name).value; }

Parameter& ParameterStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

std::vector<std::string> ParameterStore::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& [name, _] : params_) {
    if (name.compare(0, prefix.size(), prefix) == 0) out.push_back(name);
  }
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

void ParameterStore::round_to_f32() {
  for (auto& [_, p] : params_) {
    for (double& v : p.value.values()) v = static_cast<double>(static_cast<float>(v));
  }
}

bool operator==(const ParameterStore& a, const ParameterStore& b) {
  if (a.step_ != b.step_ || a.params_.size() != b.params_.size()) return false;
  auto ia = a.params_.begin();
  auto ib = b.params_.begin();
  for (; ia != a.params_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !(ia->second.value == ib->second.value)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Tape

const Tensor& Var::value() const {
  if (!valid()) throw std::invalid_argument("value() on an unbound Var");
  return tape->value(*this);
}

Var Tape::constant(Tensor value) { return record(Op::kConstant, std::move(value), {}, nullptr); }

Var Tape::parameter(const ParameterStore& store, const std::string& name) {
  if (auto it = param_ids_.find(name); it != param_ids_.end()) return Var{this, it->second};
  Var v = record(Op::kParameter, store.value(name), {}, nullptr);
  nodes_.back().requires_grad = true;
  param_ids_.emplace(name, v.id);
  param_order_.emplace_back(name, v.id);
  return v;
}

const Tensor& Tape::value(Var v) const {
  if (v.tape != this) throw std::invalid_argument("Var belongs to another tape");
  return nodes_.at(static_cast<std::size_t>(v.id)).value;
}

Var Tape::record(Op op, Tensor value, std::vector<int> inputs, BackwardFn fn) {
  if (swept_) throw std::logic_error("tape already swept; record a new tape");
  if (!value.all_finite()) {
    throw NumericError("non-finite value produced by primitive " +
                       std::to_string(static_cast<int>(op)));
  }
  bool rg = false;
  for (int in : inputs) rg = rg || nodes_[static_cast<std::size_t>(in)].requires_grad;
  Node node;
  node.op = op;
  node.value = std::move(value);
  node.inputs = std::move(inputs);
  node.backward = rg ? std::move(fn) : nullptr;
  node.requires_grad = rg;
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Tensor& Tape::grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

Gradients Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("loss belongs to another tape");
  const Tensor& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ShapeError("backward: loss must be a 1x1 scalar, got " + lv.shape_string());
  }
  if (swept_) throw std::logic_error("tape already swept");
  swept_ = true;
  if (nodes_[static_cast<std::size_t>(loss.id)].requires_grad) {
    grad(loss.id)[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (!n.backward || n.grad.empty()) continue;
      n.backward(*this, id);
    }
  }
  Gradients out;
  for (const auto& [name, id] : param_order_) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    out.emplace(name, n.grad.empty() ? Tensor(n.value.rows(), n.value.cols()) : n.grad);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Primitives

Var matmul(Var a, Var b) {
  Tape* t = common_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) shape_fail("matmul", av, bv);
  Tensor out(av.rows(), bv.cols());
  gemm_acc(av, bv, out);
  const int ia = a.id, ib = b.id;
  return t->record(Op::kMatMul, std::move(out), {ia, ib}, [ia, ib](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) gemm_nt_acc(g, tp.node_value(ib), tp.grad(ia));
    if (tp.requires_grad(ib)) gemm_tn_acc(tp.node_value(ia), g, tp.grad(ib));
  });
}

Var add(Var a, Var b) {
  Tape* t = common_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool broadcast = !av.same_shape(bv);
  if (broadcast && !(bv.rows() == 1 && bv.cols() == av.cols())) shape_fail("add", av, bv);
  Tensor out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += broadcast ? bv(0, c) : bv(r, c);
  }
  const int ia = a.id, ib = b.id;
  return t->record(Op::kAdd, std::move(out), {ia, ib}, [ia, ib, broadcast](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Tensor& ga = tp.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor& gb = tp.grad(ib);
      if (broadcast) {
        for (std::size_t r = 0; r < g.rows(); ++r) {
          for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
        }
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    }
  });
}

Var sub(Var a, Var b) {
  Tape* t = common_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) shape_fail("sub", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const int ia = a.id, ib = b.id;
  return t->record(Op::kSub, std::move(out), {ia, ib}, [ia, ib](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Tensor& ga = tp.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor& gb = tp.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape* t = common_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) shape_fail("mul", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const int ia = a.id, ib = b.id;
  return t->record(Op::kMul, std::move(out), {ia, ib}, [ia, ib](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Tensor& ga = tp.grad(ia);
      const Tensor& bv = tp.node_value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor& gb = tp.grad(ib);
      const Tensor& av = tp.node_value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var x, double factor) {
  Tape* t = tape_of(x);
  Tensor out = x.value();
  for (double& v : out.values()) v *= factor;
  const int ix = x.id;
  return t->record(Op::kScale, std::move(out), {ix}, [ix, factor](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  });
}

Var mul_const(Var x, const Tensor& factor) {
  Tape* t = tape_of(x);
  const Tensor& xv = x.value();
  if (!xv.same_shape(factor)) shape_fail("mul_const", xv, factor);
  Tensor out = xv;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor[i];
  const int ix = x.id;
  return t->record(Op::kMulConst, std::move(out), {ix}, [ix, factor](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor[i];
  });
}

Var relu(Var x) {
  Tape* t = tape_of(x);
  Tensor out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  const int ix = x.id;
  return t->record(Op::kRelu, std::move(out), {ix}, [ix](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    const Tensor& xv = tp.node_value(ix);
    Tensor& gx = tp.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var sigmoid(Var x) {
  Tape* t = tape_of(x);
  Tensor out = x.value();
  for (double& v : out.values()) v = stable_sigmoid(v);
  const int ix = x.id;
  return t->record(Op::kSigmoid, std::move(out), {ix}, [ix](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.node_value(self);
    Tensor& gx = tp.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var exp(Var x) {
  Tape* t = tape_of(x);
  Tensor out = x.value();
  for (double& v : out.values()) v = std::exp(v);
  const int ix = x.id;
  return t->record(Op::kExp, std::move(out), {ix}, [ix](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.node_value(self);
    Tensor& gx = tp.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i];
  });
}

Var log(Var x) {
  Tape* t = tape_of(x);
  Tensor out = x.value();
  for (double& v : out.values()) {
    if (!(v > 0.0)) throw NumericError("log of non-positive value");
    v = std::log(v);
  }
  const int ix = x.id;
  return t->record(Op::kLog, std::move(out), {ix}, [ix](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    const Tensor& xv = tp.node_value(ix);
    Tensor& gx = tp.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / xv[i];
  });
}

Var softmax(Var x, int axis) {
  Tape* t = tape_of(x);
  Tensor out = x.value();
  for_each_lane(out, axis, [&](std::size_t start, std::size_t stride, std::size_t n) {
    double mx = -INFINITY;
    for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, out[start + k * stride]);
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double& v = out[start + k * stride];
      v = std::exp(v - mx);
      z += v;
    }
    for (std::size_t k = 0; k < n; ++k) out[start + k * stride] /= z;
  });
  const int ix = x.id;
  return t->record(Op::kSoftmax, std::move(out), {ix}, [ix, axis](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.node_value(self);
    Tensor& gx = tp.grad(ix);
    for_each_lane(y, axis, [&](std::size_t start, std::size_t stride, std::size_t n) {
      double dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) dot += g[start + k * stride] * y[start + k * stride];
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = start + k * stride;
        gx[i] += y[i] * (g[i] - dot);
      }
    });
  });
}

Var log_softmax(Var x, int axis) {
  Tape* t = tape_of(x);
  Tensor out = x.value();
  for_each_lane(out, axis, [&](std::size_t start, std::size_t stride, std::size_t n) {
    double mx = -INFINITY;
    for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, out[start + k * stride]);
    double z = 0.0;
    for (std::size_t k = 0; k < n; ++k) z += std::exp(out[start + k * stride] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t k = 0; k < n; ++k) out[start + k * stride] -= lse;
  });
  const int ix = x.id;
  return t->record(Op::kLogSoftmax, std::move(out), {ix}, [ix, axis](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    const Tensor& y = tp.node_value(self);
    Tensor& gx = tp.grad(ix);
    for_each_lane(y, axis, [&](std::size_t start, std::size_t stride, std::size_t n) {
      double gs = 0.0;
      for (std::size_t k = 0; k < n; ++k) gs += g[start + k * stride];
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = start + k * stride;
        gx[i] += g[i] - std::exp(y[i]) * gs;
      }
    });
  });
}

Var sum(Var x) {
  Tape* t = tape_of(x);
  const Tensor& xv = x.value();
  double s = 0.0;
  for (double v : xv.values()) s += v;
  const int ix = x.id;
  return t->record(Op::kSum, Tensor::scalar(s), {ix}, [ix](Tape& tp, int self) {
    const double g = tp.grad(self)[0];
    Tensor& gx = tp.grad(ix);
    for (double& v : gx.values()) v += g;
  });
}

Var sum(Var x, int axis) {
  Tape* t = tape_of(x);
  const Tensor& xv = x.value();
  Tensor out;
  if (axis == 0) {
    out = Tensor(1, xv.cols());
    for (std::size_t r = 0; r < xv.rows(); ++r) {
      for (std::size_t c = 0; c < xv.cols(); ++c) out(0, c) += xv(r, c);
    }
  } else if (axis == 1) {
    out = Tensor(xv.rows(), 1);
    for (std::size_t r = 0; r < xv.rows(); ++r) {
      for (std::size_t c = 0; c < xv.cols(); ++c) out(r, 0) += xv(r, c);
    }
  } else {
    throw std::invalid_argument("sum: axis must be 0 or 1");
  }
  const int ix = x.id;
  return t->record(Op::kSumAxis, std::move(out), {ix}, [ix, axis](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad(ix);
    for (std::size_t r = 0; r < gx.rows(); ++r) {
      for (std::size_t c = 0; c < gx.cols(); ++c) gx(r, c) += axis == 0 ? g(0, c) : g(r, 0);
    }
  });
}

Var mean(Var x) {
  const std::size_t n = x.value().size();
  if (n == 0) throw ShapeError("mean of empty tensor");
  Tape* t = tape_of(x);
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  const double inv = 1.0 / static_cast<double>(n);
  const int ix = x.id;
  return t->record(Op::kMean, Tensor::scalar(s * inv), {ix}, [ix, inv](Tape& tp, int self) {
    const double g = tp.grad(self)[0] * inv;
    Tensor& gx = tp.grad(ix);
    for (double& v : gx.values()) v += g;
  });
}

Var concat(const std::vector<Var>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat of zero tensors");
  Tape* t = tape_of(parts.front());
  for (const Var& p : parts) common_tape(parts.front(), p);
  const Tensor& first = parts.front().value();
  std::size_t rows = 0, cols = 0;
  if (axis == 0) {
    cols = first.cols();
    for (const Var& p : parts) {
      if (p.value().cols() != cols) shape_fail("concat(axis=0)", first, p.value());
      rows += p.value().rows();
    }
  } else if (axis == 1) {
    rows = first.rows();
    for (const Var& p : parts) {
      if (p.value().rows() != rows) shape_fail("concat(axis=1)", first, p.value());
      cols += p.value().cols();
    }
  } else {
    throw std::invalid_argument("concat: axis must be 0 or 1");
  }
  Tensor out(rows, cols);
  std::vector<int> ids;
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t r = 0; r < pv.rows(); ++r) {
      for (std::size_t c = 0; c < pv.cols(); ++c) {
        if (axis == 0) {
          out(offset + r, c) = pv(r, c);
        } else {
          out(r, offset + c) = pv(r, c);
        }
      }
    }
    offset += axis == 0 ? pv.rows() : pv.cols();
    ids.push_back(p.id);
  }
  return t->record(Op::kConcat, std::move(out), ids, [ids, axis](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    std::size_t off = 0;
    for (int id : ids) {
      const Tensor& pv = tp.node_value(id);
      if (tp.requires_grad(id)) {
        Tensor& gp = tp.grad(id);
        for (std::size_t r = 0; r < pv.rows(); ++r) {
          for (std::size_t c = 0; c < pv.cols(); ++c) {
            gp(r, c) += axis == 0 ? g(off + r, c) : g(r, off + c);
          }
        }
      }
      off += axis == 0 ? pv.rows() : pv.cols();
    }
  });
}

Var transpose(Var x) {
  Tape* t = tape_of(x);
  const Tensor& xv = x.value();
  Tensor out(xv.cols(), xv.rows());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t c = 0; c < xv.cols(); ++c) out(c, r) = xv(r, c);
  }
  const int ix = x.id;
  return t->record(Op::kTranspose, std::move(out), {ix}, [ix](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad(ix);
    for (std::size_t r = 0; r < gx.rows(); ++r) {
      for (std::size_t c = 0; c < gx.cols(); ++c) gx(r, c) += g(c, r);
    }
  });
}

Var embedding_lookup(Var table, std::span<const int> ids) {
  Tape* t = tape_of(table);
  const Tensor& tv = table.value();
  std::vector<int> rows(ids.begin(), ids.end());
  Tensor out(rows.size(), tv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= tv.rows()) {
      throw std::out_of_range("embedding_lookup: id " + std::to_string(rows[i]) +
                              " outside table of " + std::to_string(tv.rows()) + " rows");
    }
    std::copy_n(&tv(static_cast<std::size_t>(rows[i]), 0), tv.cols(), &out(i, 0));
  }
  const int it = table.id;
  return t->record(Op::kEmbeddingLookup, std::move(out), {it}, [it, rows](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    Tensor& gt = tp.grad(it);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t c = 0; c < g.cols(); ++c) gt(static_cast<std::size_t>(rows[i]), c) += g(i, c);
    }
  });
}

Var embedding_bag(Var table, const std::vector<std::vector<int>>& bags) {
  Tape* t = tape_of(table);
  const Tensor& tv = table.value();
  Tensor out(bags.size(), tv.cols());
  for (std::size_t i = 0; i < bags.size(); ++i) {
    if (bags[i].empty()) continue;
    for (int id : bags[i]) {
      if (id < 0 || static_cast<std::size_t>(id) >= tv.rows()) {
        throw std::out_of_range("embedding_bag: id " + std::to_string(id) + " outside table of " +
                                std::to_string(tv.rows()) + " rows");
      }
      for (std::size_t c = 0; c < tv.cols(); ++c) out(i, c) += tv(static_cast<std::size_t>(id), c);
    }
    const double inv = 1.0 / static_cast<double>(bags[i].size());
    for (std::size_t c = 0; c < tv.cols(); ++c) out(i, c) *= inv;
  }
  const int it = table.id;
  return t->record(Op::kEmbeddingBag, std::move(out), {it}, [it, bags](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    Tensor& gt = tp.grad(it);
    for (std::size_t i = 0; i < bags.size(); ++i) {
      if (bags[i].empty()) continue;
      const double inv = 1.0 / static_cast<double>(bags[i].size());
      for (int id : bags[i]) {
        for (std::size_t c = 0; c < g.cols(); ++c) gt(static_cast<std::size_t>(id), c) += g(i, c) * inv;
      }
    }
  });
}

Var pick(Var x, std::span<const int> columns) {
  Tape* t = tape_of(x);
  const Tensor& xv = x.value();
  if (columns.size() != xv.rows()) {
    throw ShapeError("pick: " + std::to_string(columns.size()) + " columns for " + xv.shape_string());
  }
  std::vector<int> cols(columns.begin(), columns.end());
  Tensor out(xv.rows(), 1);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    if (cols[r] < 0 || static_cast<std::size_t>(cols[r]) >= xv.cols()) {
      throw std::out_of_range("pick: column " + std::to_string(cols[r]) + " outside " +
                              xv.shape_string());
    }
    out(r, 0) = xv(r, static_cast<std::size_t>(cols[r]));
  }
  const int ix = x.id;
  return t->record(Op::kPick, std::move(out), {ix}, [ix, cols](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad(ix);
    for (std::size_t r = 0; r < cols.size(); ++r) gx(r, static_cast<std::size_t>(cols[r])) += g(r, 0);
  });
}

Var bce_with_logits(Var logits, const Tensor& targets) {
  Tape* t = tape_of(logits);
  const Tensor& xv = logits.value();
  if (!xv.same_shape(targets)) shape_fail("bce_with_logits", xv, targets);
  Tensor out(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double x = xv[i], y = targets[i];
    out[i] = std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
  }
  const int ix = logits.id;
  return t->record(Op::kBceWithLogits, std::move(out), {ix}, [ix, targets](Tape& tp, int self) {
    const Tensor& g = tp.grad(self);
    const Tensor& xv = tp.node_value(ix);
    Tensor& gx = tp.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (stable_sigmoid(xv[i]) - targets[i]);
  });
}

// ---------------------------------------------------------------------------
// Optimisers

void adam_update(ParameterStore& store, const Gradients& grads, const AdamConfig& config) {
  for (const auto& [name, g] : grads) {
    if (!g.all_finite()) throw NumericError("non-finite gradient for parameter " + name);
    if (!g.same_shape(store.value(name))) {
      throw ShapeError("gradient shape " + g.shape_string() + " does not match parameter " + name +
                       " " + store.value(name).shape_string());
    }
  }
  const std::int64_t step = store.step() + 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (const auto& [name, g] : grads) {
    Parameter& p = store.at(name);
    if (p.first_moment.empty()) p.first_moment = Tensor(g.rows(), g.cols());
    if (p.second_moment.empty()) p.second_moment = Tensor(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.size(); ++i) {
      double& m = p.first_moment[i];
      double& v = p.second_moment[i];
      m = config.beta1 * m + (1.0 - config.beta1) * g[i];
      v = config.beta2 * v + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      double& theta = p.value[i];
      theta -= config.lr * (mhat / (std::sqrt(vhat) + config.eps) + config.weight_decay * theta);
    }
  }
  store.set_step(step);
}

void sgd_update(ParameterStore& store, const Gradients& grads, double lr) {
  for (const auto& [name, g] : grads) {
    if (!g.all_finite()) throw NumericError("non-finite gradient for parameter " + name);
    Tensor& v = store.mutable_value(name);
    if (!g.same_shape(v)) throw ShapeError("gradient shape mismatch for " + name);
    for (std::size_t i = 0; i < g.size(); ++i) v[i] -= lr * g[i];
  }
  store.set_step(store.step() + 1);
}

void accumulate(Gradients& into, const Gradients& other) {
  for (const auto& [name, g] : other) {
    auto it = into.find(name);
    if (it == into.end()) {
      into.emplace(name, g);
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) it->second[i] += g[i];
    }
  }
}

void scale_gradients(Gradients& grads, double factor) {
  for (auto& [_, g] : grads) {
    for (double& v : g.values()) v *= factor;
  }
}

// ---------------------------------------------------------------------------
// Gradient checking

GradCheckResult finite_difference_check(ParameterStore& store, const LossBuilder& loss,
                                        std::vector<std::string> names, double eps,
                                        std::size_t max_coordinates, std::uint64_t seed) {
  if (names.empty()) names = store.names();
  Gradients analytic;
  {
    Tape tape;
    Var l = loss(tape, store);
    analytic = tape.backward(l);
  }
  std::vector<std::pair<std::size_t, std::size_t>> coords;  // (name index, offset)
  for (std::size_t n = 0; n < names.size(); ++n) {
    const std::size_t sz = store.value(names[n]).size();
    for (std::size_t i = 0; i < sz; ++i) coords.emplace_back(n, i);
  }
  if (coords.size() > max_coordinates) {
    Rng rng(seed);
    for (std::size_t i = 0; i < max_coordinates; ++i) {
      std::swap(coords[i], coords[i + rng.index(coords.size() - i)]);
    }
    coords.resize(max_coordinates);
  }
  auto evaluate = [&]() {
    Tape tape;
    return loss(tape, store).value().item();
  };
  GradCheckResult result;
  result.coordinates = coords.size();
  for (const auto& [n, i] : coords) {
    const std::string& name = names[n];
    Tensor& theta = store.mutable_value(name);
    const double saved = theta[i];
    theta[i] = saved + eps;
    const double plus = evaluate();
    theta[i] = saved - eps;
    const double minus = evaluate();
    theta[i] = saved;
    const double gn = (plus - minus) / (2.0 * eps);
    auto it = analytic.find(name);
    const double ga = it == analytic.end() ? 0.0 : it->second[i];
    const double rel = std::abs(ga - gn) / std::max(1e-8, std::abs(ga) + std::abs(gn));
    if (rel > result.max_relative_error || result.worst_parameter.empty()) {
      if (rel >= result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = name;
        result.worst_index = i;
        result.worst_analytic = ga;
        result.worst_numeric = gn;
      }
    }
  }
  return result;
}

}  // namespace eng::ad
