// Copyright 2026 The trajcvae Authors
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

#ifndef TRAJCVAE__AUTODIFF_HPP_
#define TRAJCVAE__AUTODIFF_HPP_

#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace trajcvae::ad
{

using Shape = std::vector<std::size_t>;

/// Raised when an operation produces NaN or Inf. The message names the op.
class NonFiniteError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Raised on incompatible operand shapes.
class ShapeError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

std::string shape_to_string(const Shape & shape);

/**
 * @brief Dense row-major array of 64-bit reals.
 *
 * A tensor with a single element acts as a scalar for broadcasting purposes.
 * Matrix operations require rank 2.
 */
class Tensor
{
public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor row(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  const Shape & shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  std::size_t rank() const { return shape_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double> & data() const { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double & operator[](std::size_t i) { return values_[i]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  /// Value of a single-element tensor.
  double item() const;
  bool is_scalar() const { return values_.size() == 1; }
  bool all_finite() const;

  friend bool operator==(const Tensor &, const Tensor &) = default;

private:
  Shape shape_;
  std::vector<double> values_;
};

class Tape;

/// Handle to a value recorded on a tape.
class Var
{
public:
  Var() = default;
  Var(Tape * tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor & value() const;
  const Shape & shape() const { return value().shape(); }
  Tape & tape() const;
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

private:
  Tape * tape_ = nullptr;
  std::size_t id_ = 0;
};

/**
 * @brief Eager reverse-mode tape.
 *
 * Every op appends one node holding its forward value and a backward rule.
 * Nodes are stored in execution order, which is a topological order, so
 * backward() is a single reverse sweep. A tape may be differentiated once.
 */
class Tape
{
public:
  /// Closure receiving the node's upstream gradient; accumulates into inputs.
  using BackwardFn = std::function<void(Tape &, const Tensor & out_grad)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape & operator=(const Tape &) = delete;

  Var leaf(Tensor value, bool requires_grad = true);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  /// Appends an op result. Checks finiteness and throws NonFiniteError naming `op`.
  Var record(
    const char * op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(const char * op, Tensor value, std::span<const Var> inputs, BackwardFn backward);

  /// Reverse sweep from a scalar loss. Gradients of all nodes are zeroed first.
  void backward(Var loss);

  /// Gradient of a node after backward(); zeros when the node is off every path to the loss.
  const Tensor & grad(Var v) const;

  /// Adds `g` into the gradient slot of `v` (used by backward rules).
  void accumulate(Var v, const Tensor & g);
  void accumulate(Var v, std::span<const double> g);
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  const Tensor & value(std::size_t id) const { return nodes_[id].value; }
  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

private:
  struct Node
  {
    const char * op;
    Tensor value;
    Tensor grad;
    bool requires_grad;
    BackwardFn backward;
  };

  std::deque<Node> nodes_;  // stable addresses: value() references survive later records
  bool consumed_ = false;
};

// Elementwise ops. Shapes must match, or one operand must be a single element.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var tanh(Var a);
Var exp(Var a);
Var square(Var a);
/// Pass-through inside [lo, hi]; zero gradient where clamped.
Var clamp(Var a, double lo, double hi);

/// Sum of all elements as a 1x1 tensor.
Var sum(Var a);
/// Mean squared difference as a 1x1 tensor.
Var mse(Var a, Var b);

Var matmul(Var a, Var b);

// Structural ops on rank-2 tensors.
Var hstack(std::span<const Var> parts);
Var vstack(std::span<const Var> parts);
Var tile_rows(Var row, std::size_t count);
/// Column-wise sum over rows, accumulated in row order.
Var sum_rows(Var a);
Var slice_cols(Var a, std::size_t begin, std::size_t end);

/// Affine row map x * W + b, with b broadcast to every row of x.
Var affine(Var x, Var weight, Var bias);

/// Result of a finite-difference audit.
struct GradCheckResult
{
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Builds a scalar loss from parameter leaves bound on a fresh tape.
using ScalarFn = std::function<Var(Tape &, std::span<const Var>)>;

/// Central difference stencil: (f(x+h) - f(x-h)) / 2h, or the five-point rule.
enum class Stencil { ThreePoint, FivePoint };

/**
 * @brief Compares reverse-mode gradients with central differences.
 *
 * Relative error per scalar parameter is |a - n| / max(|a|, |n|, 1e-8).
 */
GradCheckResult grad_check(
  const ScalarFn & f, std::span<const Tensor> params, double step,
  Stencil stencil = Stencil::ThreePoint);

/// Reverse-mode gradients of `f` at `params`, one tensor per parameter.
std::vector<Tensor> gradients(const ScalarFn & f, std::span<const Tensor> params);

}  // namespace trajcvae::ad

#endif  // TRAJCVAE__AUTODIFF_HPP_
