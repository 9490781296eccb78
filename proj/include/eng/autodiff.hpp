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

// Dense reverse-mode differentiation over row-major f64 matrices.
//
// A Tape records every primitive application in construction order; one
// backward sweep in reverse order accumulates gradients into the leaves
// bound to a ParameterStore. Every tensor is two-dimensional: scalars are
// 1x1 and vectors are 1xn rows unless stated otherwise.

#ifndef ENG_AUTODIFF_HPP_
#define ENG_AUTODIFF_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <deque>
#include <vector>

#include "eng/common.hpp"

namespace eng::ad {

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor scalar(double value) { return Tensor(1, 1, value); }
  static Tensor row_vector(std::vector<double> values);
  static Tensor column_vector(std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::vector<std::size_t> shape() const { return {rows_, cols_}; }
  std::string shape_string() const;

  const double& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  std::span<const double> values() const { return data_; }
  std::span<double> values() { return data_; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<double> row(std::size_t r) { return std::span<double>(data_).subspan(r * cols_, cols_); }

  bool same_shape(const Tensor& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
  double item() const;
  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Glorot-uniform initialisation: U(-a, a) with a = sqrt(6 / (rows + cols)).
Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng);

struct Parameter {
  Tensor value;
  Tensor first_moment;
  Tensor second_moment;
};

// Named trainable tensors plus Adam state. Names are unique and shapes are
// fixed once created.
class ParameterStore {
 public:
  Parameter& create(const std::string& name, Tensor init);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  const Tensor& value(const std::string& name) const;
  Tensor& mutable_value(const std::string& name);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  void erase(const std::string& name) { params_.erase(name); }

  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  std::int64_t step() const { return step_; }
  void set_step(std::int64_t step) { step_ = step; }

  // Rounds every value to the nearest f32, the on-disk precision.
  void round_to_f32();

  friend bool operator==(const ParameterStore& a, const ParameterStore& b);

 private:
  std::map<std::string, Parameter> params_;
  std::int64_t step_ = 0;
};

using Gradients = std::map<std::string, Tensor>;

enum class Op : std::uint8_t {
  kConstant,
  kParameter,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kRelu,
  kSigmoid,
  kExp,
  kLog,
  kSoftmax,
  kLogSoftmax,
  kSum,
  kSumAxis,
  kMean,
  kConcat,
  kEmbeddingLookup,
  kEmbeddingBag,
  kTranspose,
  kPick,
  kBceWithLogits,
  kMulConst,
};

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Tensor& value() const;
};

// The value graph: an append-only record of primitive applications.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Binds a parameter leaf. Binding the same name twice returns the same leaf.
  Var parameter(const ParameterStore& store, const std::string& name);

  const Tensor& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  Op op(int id) const { return nodes_[static_cast<std::size_t>(id)].op; }
  const std::vector<int>& inputs(int id) const { return nodes_[static_cast<std::size_t>(id)].inputs; }

  // Accumulates d(loss)/d(parameter) for every parameter bound on this tape.
  // Parameters with no path to the loss receive zero gradients. The loss
  // must be 1x1 and the tape can be swept only once.
  Gradients backward(Var loss);

  // Primitive plumbing; used by the functions below.
  Var record(Op op, Tensor value, std::vector<int> inputs, BackwardFn fn);
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  Tensor& grad(int id);
  const Tensor& node_value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

 private:
  struct Node {
    Op op;
    Tensor value;
    Tensor grad;
    std::vector<int> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };
  std::deque<Node> nodes_;
  std::unordered_map<std::string, int> param_ids_;
  std::vector<std::pair<std::string, int>> param_order_;
  bool swept_ = false;
};

// Primitive suite. Every output is registered on the inputs' tape. Shape
// errors report both operand shapes.
Var matmul(Var a, Var b);
// Same-shape addition, or matrix + 1xn row vector (bias broadcast).
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var x, double factor);
// Elementwise product with a constant tensor of the same shape.
Var mul_const(Var x, const Tensor& factor);
Var relu(Var x);
Var sigmoid(Var x);
Var exp(Var x);
Var log(Var x);
// axis 0 normalises each column, axis 1 each row.
Var softmax(Var x, int axis);
Var log_softmax(Var x, int axis);
Var sum(Var x);
// axis 0 -> 1xcols, axis 1 -> rowsx1.
Var sum(Var x, int axis);
Var mean(Var x);
Var concat(const std::vector<Var>& parts, int axis);
Var transpose(Var x);
// Rows of `table` selected by `ids`.
Var embedding_lookup(Var table, std::span<const int> ids);
// Row i is the mean of table rows in bags[i]; an empty bag yields zeros.
Var embedding_bag(Var table, const std::vector<std::vector<int>>& bags);
// Column vector with x(i, columns[i]).
Var pick(Var x, std::span<const int> columns);
// Elementwise -[y log s(x) + (1-y) log(1-s(x))], computed stably.
Var bce_with_logits(Var logits, const Tensor& targets);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-6;
  double weight_decay = 0.01;
};

// Adam with bias correction and decoupled weight decay. Only parameters
// present in `grads` move; the store step advances once per call.
void adam_update(ParameterStore& store, const Gradients& grads, const AdamConfig& config);
void sgd_update(ParameterStore& store, const Gradients& grads, double lr);

// Adds `other` into `into`, creating missing entries.
void accumulate(Gradients& into, const Gradients& other);
void scale_gradients(Gradients& grads, double factor);

using LossBuilder = std::function<Var(Tape&, const ParameterStore&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Central differences on a random subsample of at most `max_coordinates`
// coordinates drawn across `names` (all parameters when empty). Relative
// error is |ga - gn| / max(1e-8, |ga| + |gn|).
GradCheckResult finite_difference_check(ParameterStore& store, const LossBuilder& loss,
                                        std::vector<std::string> names = {},
                                        double eps = 1e-5, std::size_t max_coordinates = 200,
                                        std::uint64_t seed = 0);

}  // namespace eng::ad

#endif  // ENG_AUTODIFF_HPP_
