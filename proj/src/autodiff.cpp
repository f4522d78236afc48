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

#include "trajcvae/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace trajcvae::ad
{

std::string shape_to_string(const Shape & shape)
{
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    os << (i ? "x" : "") << shape[i];
  }
  os << ']';
  return os.str();
}

namespace
{

std::size_t shape_count(const Shape & shape)
{
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

void require_rank2(const Tensor & t, const char * op)
{
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected rank-2 operand, got " + shape_to_string(t.shape()));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, std::vector<double> values)
: shape_(std::move(shape)), values_(std::move(values))
{
  for (auto d : shape_) {
    if (d == 0) {
      throw ShapeError("tensor dimensions must be positive, got " + shape_to_string(shape_));
    }
  }
  if (shape_count(shape_) != values_.size()) {
    throw ShapeError(
      "tensor of shape " + shape_to_string(shape_) + " given " + std::to_string(values_.size()) +
      " values");
  }
}

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }

Tensor Tensor::filled(Shape shape, double value)
{
  const auto n = shape_count(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({1, 1}, {value}); }

Tensor Tensor::row(std::vector<double> values)
{
  const auto n = values.size();
  return Tensor({1, n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
{
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const { return rank() == 2 ? shape_[0] : 1; }

std::size_t Tensor::cols() const { return rank() == 2 ? shape_[1] : size(); }

double Tensor::item() const
{
  if (values_.size() != 1) {
    throw ShapeError("item() on tensor of shape " + shape_to_string(shape_));
  }
  return values_[0];
}

bool Tensor::all_finite() const
{
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

const Tensor & Var::value() const { return tape_->value(id_); }

Tape & Var::tape() const { return *tape_; }

Var Tape::leaf(Tensor value, bool requires_grad)
{
  if (!value.all_finite()) {
    throw NonFiniteError("leaf: non-finite value");
  }
  nodes_.push_back(Node{"leaf", std::move(value), Tensor{}, requires_grad, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(
  const char * op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward)
{
  return record(op, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
    std::move(backward));
}

Var Tape::record(const char * op, Tensor value, std::span<const Var> inputs, BackwardFn backward)
{
  if (consumed_) {
    throw std::logic_error(std::string(op) + ": tape already differentiated");
  }
  if (!value.all_finite()) {
    throw NonFiniteError(std::string(op) + ": produced a non-finite value");
  }
  bool needs = false;
  for (const auto & in : inputs) {
    if (&in.tape() != this) {
      throw std::logic_error(std::string(op) + ": operands recorded on different tapes");
    }
    needs = needs || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back(Node{op, std::move(value), Tensor{}, needs, needs ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss)
{
  if (consumed_) {
    throw std::logic_error("backward: tape already differentiated");
  }
  if (&loss.tape() != this) {
    throw std::logic_error("backward: loss recorded on a different tape");
  }
  if (!loss.value().is_scalar()) {
    throw ShapeError("backward: loss must be scalar, got " + shape_to_string(loss.shape()));
  }
  consumed_ = true;
  for (auto & node : nodes_) {
    node.grad = Tensor::zeros(node.value.shape());
  }
  nodes_[loss.id()].grad[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto & node = nodes_[i];
    if (node.requires_grad && node.backward) {
      // Rules only write into grads of earlier nodes; nodes_ is never resized here.
      const Tensor & g = node.grad;
      node.backward(*this, g);
    }
  }
}

const Tensor & Tape::grad(Var v) const
{
  if (!consumed_) {
    throw std::logic_error("grad: backward() has not run");
  }
  return nodes_[v.id()].grad;
}

void Tape::accumulate(Var v, const Tensor & g) { accumulate(v, g.values()); }

void Tape::accumulate(Var v, std::span<const double> g)
{
  auto & node = nodes_[v.id()];
  if (!node.requires_grad) {
    return;
  }
  auto dst = node.grad.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] += g[i];
  }
}

namespace
{

enum class Broadcast { Same, LeftScalar, RightScalar };

Broadcast check_broadcast(const Tensor & a, const Tensor & b, const char * op)
{
  if (a.shape() == b.shape()) {
    return Broadcast::Same;
  }
  if (b.is_scalar()) {
    return Broadcast::RightScalar;
  }
  if (a.is_scalar()) {
    return Broadcast::LeftScalar;
  }
  throw ShapeError(
    std::string(op) + ": incompatible shapes " + shape_to_string(a.shape()) + " and " +
    shape_to_string(b.shape()));
}

// Reduces an upstream gradient onto an operand that may have been broadcast.
void accumulate_broadcast(Tape & tape, Var target, const std::vector<double> & g)
{
  if (target.value().size() == g.size()) {
    tape.accumulate(target, g);
  } else {
    const double total = std::accumulate(g.begin(), g.end(), 0.0);
    tape.accumulate(target, std::span<const double>(&total, 1));
  }
}

template <typename Fwd, typename DA, typename DB>
Var binary(const char * op, Var a, Var b, Fwd fwd, DA da, DB db)
{
  const Tensor & av = a.value();
  const Tensor & bv = b.value();
  const auto mode = check_broadcast(av, bv, op);
  const Shape & out_shape = mode == Broadcast::LeftScalar ? bv.shape() : av.shape();
  const std::size_t n = mode == Broadcast::LeftScalar ? bv.size() : av.size();
  auto ai = [mode](std::size_t i) { return mode == Broadcast::LeftScalar ? 0 : i; };
  auto bi = [mode](std::size_t i) { return mode == Broadcast::RightScalar ? 0 : i; };

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = fwd(av[ai(i)], bv[bi(i)]);
  }
  return a.tape().record(op, Tensor(out_shape, std::move(out)), {a, b},
    [a, b, ai, bi, da, db, n](Tape & tape, const Tensor & g) {
      const Tensor & av = a.value();
      const Tensor & bv = b.value();
      if (tape.requires_grad(a)) {
        std::vector<double> ga(n);
        for (std::size_t i = 0; i < n; ++i) {
          ga[i] = g[i] * da(av[ai(i)], bv[bi(i)]);
        }
        accumulate_broadcast(tape, a, ga);
      }
      if (tape.requires_grad(b)) {
        std::vector<double> gb(n);
        for (std::size_t i = 0; i < n; ++i) {
          gb[i] = g[i] * db(av[ai(i)], bv[bi(i)]);
        }
        accumulate_broadcast(tape, b, gb);
      }
    });
}

template <typename Fwd, typename Deriv>
Var unary(const char * op, Var a, Fwd fwd, Deriv deriv)
{
  const Tensor & av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = fwd(av[i]);
  }
  // The rule reads its own output, which lands at the next tape slot.
  Tape & tape = a.tape();
  const Var result(&tape, tape.size());
  return tape.record(op, Tensor(av.shape(), std::move(out)), {a},
    [a, result, deriv](Tape & tape, const Tensor & g) {
      const Tensor & x = a.value();
      const Tensor & y = result.value();
      std::vector<double> ga(g.size());
      for (std::size_t i = 0; i < ga.size(); ++i) {
        ga[i] = g[i] * deriv(x[i], y[i]);
      }
      tape.accumulate(a, ga);
    });
}

}  // namespace

Var add(Var a, Var b)
{
  return binary(
    "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
    [](double, double) { return 1.0; });
}

Var sub(Var a, Var b)
{
  return binary(
    "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
    [](double, double) { return -1.0; });
}

Var mul(Var a, Var b)
{
  return binary(
    "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
    [](double x, double) { return x; });
}

Var scale(Var a, double factor)
{
  return unary(
    "scale", a, [factor](double x) { return factor * x; },
    [factor](double, double) { return factor; });
}

Var add_scalar(Var a, double offset)
{
  return unary(
    "add_scalar", a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

Var tanh(Var a)
{
  return unary(
    "tanh", a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var a)
{
  return unary(
    "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var square(Var a)
{
  return unary(
    "square", a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var clamp(Var a, double lo, double hi)
{
  return unary(
    "clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
    [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var sum(Var a)
{
  const auto & av = a.value();
  double total = 0.0;
  for (double v : av.values()) {
    total += v;
  }
  return a.tape().record("sum", Tensor::scalar(total), {a}, [a](Tape & tape, const Tensor & g) {
    tape.accumulate(a, std::vector<double>(a.value().size(), g[0]));
  });
}

Var mse(Var a, Var b)
{
  const auto & av = a.value();
  const auto & bv = b.value();
  if (av.shape() != bv.shape()) {
    throw ShapeError(
      "mse: incompatible shapes " + shape_to_string(av.shape()) + " and " +
      shape_to_string(bv.shape()));
  }
  const auto n = static_cast<double>(av.size());
  double total = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double d = av[i] - bv[i];
    total += d * d;
  }
  return a.tape().record(
    "mse", Tensor::scalar(total / n), {a, b}, [a, b, n](Tape & tape, const Tensor & g) {
      const auto & av = a.value();
      const auto & bv = b.value();
      std::vector<double> ga(av.size());
      for (std::size_t i = 0; i < ga.size(); ++i) {
        ga[i] = g[0] * 2.0 * (av[i] - bv[i]) / n;
      }
      tape.accumulate(a, ga);
      for (auto & v : ga) {
        v = -v;
      }
      tape.accumulate(b, ga);
    });
}

Var matmul(Var a, Var b)
{
  const auto & av = a.value();
  const auto & bv = b.value();
  require_rank2(av, "matmul");
  require_rank2(bv, "matmul");
  const std::size_t m = av.rows(), n = av.cols(), p = bv.cols();
  if (bv.rows() != n) {
    throw ShapeError(
      "matmul: inner dimensions differ, " + shape_to_string(av.shape()) + " x " +
      shape_to_string(bv.shape()));
  }
  std::vector<double> out(m * p, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = av[i * n + k];
      for (std::size_t j = 0; j < p; ++j) {
        out[i * p + j] += aik * bv[k * p + j];
      }
    }
  }
  return a.tape().record(
    "matmul", Tensor({m, p}, std::move(out)), {a, b}, [a, b, m, n, p](Tape & tape, const Tensor & g) {
      const auto & av = a.value();
      const auto & bv = b.value();
      if (tape.requires_grad(a)) {
        // dA = dC * B^T
        std::vector<double> ga(m * n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
              acc += g[i * p + j] * bv[k * p + j];
            }
            ga[i * n + k] = acc;
          }
        }
        tape.accumulate(a, ga);
      }
      if (tape.requires_grad(b)) {
        // dB = A^T * dC
        std::vector<double> gb(n * p, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t k = 0; k < n; ++k) {
            const double aik = av[i * n + k];
            for (std::size_t j = 0; j < p; ++j) {
              gb[k * p + j] += aik * g[i * p + j];
            }
          }
        }
        tape.accumulate(b, gb);
      }
    });
}

Var affine(Var x, Var weight, Var bias)
{
  const auto & xv = x.value();
  const auto & wv = weight.value();
  const auto & bv = bias.value();
  require_rank2(xv, "affine");
  require_rank2(wv, "affine");
  const std::size_t m = xv.rows(), n = xv.cols(), p = wv.cols();
  if (wv.rows() != n) {
    throw ShapeError(
      "affine: input " + shape_to_string(xv.shape()) + " does not match weight " +
      shape_to_string(wv.shape()));
  }
  if (bv.size() != p) {
    throw ShapeError(
      "affine: bias " + shape_to_string(bv.shape()) + " does not match weight " +
      shape_to_string(wv.shape()));
  }
  std::vector<double> out(m * p);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy(bv.values().begin(), bv.values().end(), out.begin() + static_cast<long>(i * p));
    for (std::size_t k = 0; k < n; ++k) {
      const double xik = xv[i * n + k];
      for (std::size_t j = 0; j < p; ++j) {
        out[i * p + j] += xik * wv[k * p + j];
      }
    }
  }
  return x.tape().record("affine", Tensor({m, p}, std::move(out)), {x, weight, bias},
    [x, weight, bias, m, n, p](Tape & tape, const Tensor & g) {
      const auto & xv = x.value();
      const auto & wv = weight.value();
      if (tape.requires_grad(x)) {
        std::vector<double> gx(m * n, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
              acc += g[i * p + j] * wv[k * p + j];
            }
            gx[i * n + k] = acc;
          }
        }
        tape.accumulate(x, gx);
      }
      if (tape.requires_grad(weight)) {
        std::vector<double> gw(n * p, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t k = 0; k < n; ++k) {
            const double xik = xv[i * n + k];
            for (std::size_t j = 0; j < p; ++j) {
              gw[k * p + j] += xik * g[i * p + j];
            }
          }
        }
        tape.accumulate(weight, gw);
      }
      if (tape.requires_grad(bias)) {
        std::vector<double> gb(p, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < p; ++j) {
            gb[j] += g[i * p + j];
          }
        }
        tape.accumulate(bias, gb);
      }
    });
}

Var hstack(std::span<const Var> parts)
{
  if (parts.empty()) {
    throw ShapeError("hstack: no operands");
  }
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto & part : parts) {
    require_rank2(part.value(), "hstack");
    if (part.value().rows() != rows) {
      throw ShapeError("hstack: row counts differ, " + shape_to_string(part.shape()));
    }
    widths.push_back(part.value().cols());
    total += widths.back();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto & v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < widths[k]; ++c) {
        out[r * total + offset + c] = v[r * widths[k] + c];
      }
    }
    offset += widths[k];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().record("hstack", Tensor({rows, total}, std::move(out)), parts,
    [inputs, widths, rows, total](Tape & tape, const Tensor & g) {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        if (tape.requires_grad(inputs[k])) {
          std::vector<double> gk(rows * widths[k]);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < widths[k]; ++c) {
              gk[r * widths[k] + c] = g[r * total + offset + c];
            }
          }
          tape.accumulate(inputs[k], gk);
        }
        offset += widths[k];
      }
    });
}

Var vstack(std::span<const Var> parts)
{
  if (parts.empty()) {
    throw ShapeError("vstack: no operands");
  }
  const std::size_t cols = parts[0].value().cols();
  std::vector<double> out;
  std::vector<std::size_t> offsets;
  for (const auto & part : parts) {
    require_rank2(part.value(), "vstack");
    if (part.value().cols() != cols) {
      throw ShapeError("vstack: column counts differ, " + shape_to_string(part.shape()));
    }
    offsets.push_back(out.size());
    out.insert(out.end(), part.value().values().begin(), part.value().values().end());
  }
  const std::size_t rows = out.size() / cols;
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().record("vstack", Tensor({rows, cols}, std::move(out)), parts,
    [inputs, offsets](Tape & tape, const Tensor & g) {
      for (std::size_t k = 0; k < inputs.size(); ++k) {
        tape.accumulate(inputs[k], g.values().subspan(offsets[k], inputs[k].value().size()));
      }
    });
}

Var tile_rows(Var row, std::size_t count)
{
  const auto & rv = row.value();
  require_rank2(rv, "tile_rows");
  if (rv.rows() != 1 || count == 0) {
    throw ShapeError("tile_rows: expected a single row and positive count, got " +
      shape_to_string(rv.shape()));
  }
  const std::size_t cols = rv.cols();
  std::vector<double> out;
  out.reserve(count * cols);
  for (std::size_t r = 0; r < count; ++r) {
    out.insert(out.end(), rv.values().begin(), rv.values().end());
  }
  return row.tape().record("tile_rows", Tensor({count, cols}, std::move(out)), {row},
    [row, count, cols](Tape & tape, const Tensor & g) {
      std::vector<double> gr(cols, 0.0);
      for (std::size_t r = 0; r < count; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          gr[c] += g[r * cols + c];
        }
      }
      tape.accumulate(row, gr);
    });
}

Var sum_rows(Var a)
{
  const auto & av = a.value();
  require_rank2(av, "sum_rows");
  const std::size_t rows = av.rows(), cols = av.cols();
  std::vector<double> out(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out[c] += av[r * cols + c];
    }
  }
  return a.tape().record("sum_rows", Tensor({1, cols}, std::move(out)), {a},
    [a, rows, cols](Tape & tape, const Tensor & g) {
      std::vector<double> ga(rows * cols);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          ga[r * cols + c] = g[c];
        }
      }
      tape.accumulate(a, ga);
    });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end)
{
  const auto & av = a.value();
  require_rank2(av, "slice_cols");
  const std::size_t rows = av.rows(), cols = av.cols();
  if (begin >= end || end > cols) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
      ") invalid for " + shape_to_string(av.shape()));
  }
  const std::size_t width = end - begin;
  std::vector<double> out(rows * width);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      out[r * width + c] = av[r * cols + begin + c];
    }
  }
  return a.tape().record("slice_cols", Tensor({rows, width}, std::move(out)), {a},
    [a, rows, cols, begin, width](Tape & tape, const Tensor & g) {
      std::vector<double> ga(rows * cols, 0.0);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
          ga[r * cols + begin + c] = g[r * width + c];
        }
      }
      tape.accumulate(a, ga);
    });
}

std::vector<Tensor> gradients(const ScalarFn & f, std::span<const Tensor> params)
{
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const auto & p : params) {
    leaves.push_back(tape.leaf(p));
  }
  Var loss = f(tape, leaves);
  tape.backward(loss);
  std::vector<Tensor> grads;
  grads.reserve(leaves.size());
  for (const auto & leaf : leaves) {
    grads.push_back(tape.grad(leaf));
  }
  return grads;
}

namespace
{

double evaluate(const ScalarFn & f, std::span<const Tensor> params)
{
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const auto & p : params) {
    leaves.push_back(tape.constant(p));
  }
  return f(tape, leaves).value().item();
}

}  // namespace

GradCheckResult grad_check(
  const ScalarFn & f, std::span<const Tensor> params, double step, Stencil stencil)
{
  if (!(step > 0.0)) {
    throw std::invalid_argument("grad_check: step must be positive");
  }
  const auto analytic = gradients(f, params);
  std::vector<Tensor> probe(params.begin(), params.end());
  GradCheckResult result;
  for (std::size_t p = 0; p < probe.size(); ++p) {
    for (std::size_t i = 0; i < probe[p].size(); ++i) {
      const double original = probe[p][i];
      auto at = [&](double offset) {
        probe[p][i] = original + offset;
        const double v = evaluate(f, probe);
        probe[p][i] = original;
        return v;
      };
      double numeric = 0.0;
      if (stencil == Stencil::ThreePoint) {
        // Divide by the step actually represented in floating point.
        const double up = original + step;
        const double down = original - step;
        numeric = (at(step) - at(-step)) / (up - down);
      } else {
        numeric = (8.0 * (at(step) - at(-step)) - (at(2.0 * step) - at(-2.0 * step))) / (12.0 * step);
      }
      const double a = analytic[p][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double err = std::abs(a - numeric) / denom;
      ++result.checked;
      if (err > result.max_rel_error || result.checked == 1) {
        result.max_rel_error = err;
        result.worst_param = p;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace trajcvae::ad
