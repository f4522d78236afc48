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

#include "support.hpp"

#include "trajcvae/autodiff.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace trajcvae;
using trajcvae::test::random_size;
using trajcvae::test::random_tensor;

namespace
{

// Central differences on a plain function of one tensor, written independently of grad_check.
ad::Tensor numeric_gradient(
  const std::function<double(const ad::Tensor &)> & f, ad::Tensor x, double h = 1e-6)
{
  ad::Tensor g = ad::Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = f(x);
    x[i] = orig - h;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double max_rel(const ad::Tensor & a, const ad::Tensor & b)
{
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::max({std::abs(a[i]), std::abs(b[i]), 1e-8});
    worst = std::max(worst, std::abs(a[i] - b[i]) / d);
  }
  return worst;
}

// Error relative to the gradient norm; insensitive to entries that are zero up to roundoff.
double norm_rel(const ad::Tensor & a, const ad::Tensor & b)
{
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
}

double forward(const std::function<ad::Var(ad::Var)> & op, const ad::Tensor & x)
{
  ad::Tape tape;
  return op(tape.leaf(x)).value().item();
}

ad::Tensor analytic(const std::function<ad::Var(ad::Var)> & op, const ad::Tensor & x)
{
  ad::Tape tape;
  const auto v = tape.leaf(x);
  const auto loss = op(v);
  tape.backward(loss);
  return tape.grad(v);
}

}  // namespace

TEST_CASE("matmul values")
{
  ad::Tape tape;
  const auto eye = tape.constant(ad::Tensor::matrix(2, 2, {1, 0, 0, 1}));
  const auto m = tape.constant(ad::Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  const auto product = ad::matmul(eye, m).value();
  CHECK(product == m.value());

  const auto a = tape.constant(ad::Tensor::matrix(2, 2, {1, 2, 3, 4}));
  const auto b = tape.constant(ad::Tensor::matrix(2, 1, {5, 6}));
  const auto ab = ad::matmul(a, b).value();
  CHECK(ab == ad::Tensor::matrix(2, 1, {17, 39}));
}

TEST_CASE("matmul gradient of sum(A B) w.r.t. A is ones times B transposed")
{
  std::mt19937_64 rng(1);
  const auto a = random_tensor(rng, 3, 4);
  const auto b = random_tensor(rng, 4, 2);
  auto op = [&](ad::Var x) { return ad::sum(ad::matmul(x, x.tape().constant(b))); };
  const auto g = analytic(op, a);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(g.at(i, k) == doctest::Approx(b.at(k, 0) + b.at(k, 1)).epsilon(1e-14));
    }
  }
  const auto n = numeric_gradient([&](const ad::Tensor & x) { return forward(op, x); }, a);
  CHECK(max_rel(g, n) < 1e-7);
}

TEST_CASE("matmul rejects mismatched inner dimensions")
{
  ad::Tape tape;
  const auto a = tape.constant(ad::Tensor::zeros({2, 3}));
  const auto b = tape.constant(ad::Tensor::zeros({2, 3}));
  CHECK_THROWS_AS(ad::matmul(a, b), ad::ShapeError);
}

TEST_CASE("elementwise primitives")
{
  SUBCASE("tanh at zero")
  {
    const auto x = ad::Tensor::scalar(0.0);
    CHECK(forward([](ad::Var v) { return ad::tanh(v); }, x) == 0.0);
    CHECK(analytic([](ad::Var v) { return ad::tanh(v); }, x).item() == 1.0);
  }
  SUBCASE("mse of identical inputs")
  {
    std::mt19937_64 rng(2);
    const auto x = random_tensor(rng, 2, 5);
    ad::Tape tape;
    const auto a = tape.leaf(x);
    const auto b = tape.leaf(x);
    const auto loss = ad::mse(a, b);
    CHECK(loss.value().item() == 0.0);
    tape.backward(loss);
    CHECK(tape.grad(a) == ad::Tensor::zeros({2, 5}));
    CHECK(tape.grad(b) == ad::Tensor::zeros({2, 5}));
  }
  SUBCASE("exp backward at one")
  {
    const auto g = analytic([](ad::Var v) { return ad::exp(v); }, ad::Tensor::scalar(1.0));
    CHECK(std::abs(g.item() - std::exp(1.0)) < 1e-12);
  }
  SUBCASE("shape mismatch")
  {
    ad::Tape tape;
    const auto a = tape.constant(ad::Tensor::zeros({2, 3}));
    const auto b = tape.constant(ad::Tensor::zeros({3, 2}));
    CHECK_THROWS_AS(ad::add(a, b), ad::ShapeError);
    CHECK_THROWS_AS(ad::mul(a, b), ad::ShapeError);
  }
  SUBCASE("scalar broadcast")
  {
    ad::Tape tape;
    const auto a = tape.leaf(ad::Tensor::matrix(1, 3, {1, 2, 3}));
    const auto s = tape.leaf(ad::Tensor::scalar(2.0));
    const auto loss = ad::sum(ad::mul(a, s));
    CHECK(loss.value().item() == 12.0);
    tape.backward(loss);
    CHECK(tape.grad(s).item() == 6.0);
    CHECK(tape.grad(a) == ad::Tensor::filled({1, 3}, 2.0));
  }
}

TEST_CASE("non-finite results raise naming the op")
{
  ad::Tape tape;
  const auto x = tape.leaf(ad::Tensor::scalar(1000.0));
  try {
    ad::exp(x);
    FAIL("expected NonFiniteError");
  } catch (const ad::NonFiniteError & e) {
    CHECK(std::string(e.what()).find("exp") != std::string::npos);
  }
  CHECK_THROWS_AS(tape.leaf(ad::Tensor::scalar(std::nan(""))), ad::NonFiniteError);
}

TEST_CASE("backward basics")
{
  SUBCASE("sum gives ones")
  {
    const auto g = analytic([](ad::Var v) { return ad::sum(v); }, ad::Tensor::matrix(2, 2, {1, -2, 3, 4}));
    CHECK(g == ad::Tensor::filled({2, 2}, 1.0));
  }
  SUBCASE("sum of squares at 3 gives 6")
  {
    const auto g = analytic([](ad::Var v) { return ad::sum(ad::mul(v, v)); }, ad::Tensor::scalar(3.0));
    CHECK(g.item() == 6.0);
  }
  SUBCASE("non-scalar loss is rejected")
  {
    ad::Tape tape;
    const auto v = tape.leaf(ad::Tensor::zeros({1, 2}));
    CHECK_THROWS_AS(tape.backward(ad::tanh(v)), ad::ShapeError);
  }
  SUBCASE("off-path tensors get zero gradient")
  {
    ad::Tape tape;
    const auto a = tape.leaf(ad::Tensor::matrix(1, 2, {1, 2}));
    const auto unused = tape.leaf(ad::Tensor::matrix(1, 2, {3, 4}));
    ad::tanh(unused);
    const auto loss = ad::sum(a);
    tape.backward(loss);
    CHECK(tape.grad(unused) == ad::Tensor::zeros({1, 2}));
  }
  SUBCASE("a tape is differentiated once")
  {
    ad::Tape tape;
    const auto a = tape.leaf(ad::Tensor::scalar(1.0));
    const auto loss = ad::sum(a);
    tape.backward(loss);
    CHECK(tape.consumed());
    CHECK_THROWS(tape.backward(loss));
  }
  SUBCASE("fan-out doubles the gradient exactly")
  {
    ad::Tape once;
    const auto w1 = once.leaf(ad::Tensor::matrix(1, 3, {0.5, -1.5, 2.0}));
    const auto c1 = once.constant(ad::Tensor::matrix(1, 3, {3.0, 0.25, -7.0}));
    once.backward(ad::sum(ad::mul(w1, c1)));

    ad::Tape twice;
    const auto w2 = twice.leaf(ad::Tensor::matrix(1, 3, {0.5, -1.5, 2.0}));
    const auto c2 = twice.constant(ad::Tensor::matrix(1, 3, {3.0, 0.25, -7.0}));
    twice.backward(ad::add(ad::sum(ad::mul(w2, c2)), ad::sum(ad::mul(w2, c2))));
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(twice.grad(w2)[i] == 2.0 * once.grad(w1)[i]);
    }
  }
}

TEST_CASE("every primitive matches finite differences on random shapes up to 8x8")
{
  std::mt19937_64 rng(3);
  struct Case
  {
    const char * name;
    std::function<ad::Var(ad::Var, const ad::Tensor &)> op;
  };
  // Each op is reduced to a scalar through a fixed random weighting so all entries matter.
  const std::vector<Case> cases = {
    {"add", [](ad::Var x, const ad::Tensor & c) { return ad::add(x, x.tape().constant(c)); }},
    {"sub", [](ad::Var x, const ad::Tensor & c) { return ad::sub(x.tape().constant(c), x); }},
    {"mul", [](ad::Var x, const ad::Tensor & c) { return ad::mul(x, x.tape().constant(c)); }},
    {"mul_self", [](ad::Var x, const ad::Tensor &) { return ad::mul(x, x); }},
    {"scale", [](ad::Var x, const ad::Tensor &) { return ad::scale(x, -1.7); }},
    {"add_scalar", [](ad::Var x, const ad::Tensor &) { return ad::add_scalar(x, 0.3); }},
    {"tanh", [](ad::Var x, const ad::Tensor &) { return ad::tanh(x); }},
    {"exp", [](ad::Var x, const ad::Tensor &) { return ad::exp(x); }},
    {"square", [](ad::Var x, const ad::Tensor &) { return ad::square(x); }},
    {"clamp", [](ad::Var x, const ad::Tensor &) { return ad::clamp(x, -2.0, 2.0); }},
    {"tile_rows", [](ad::Var x, const ad::Tensor &) {
       return ad::tile_rows(ad::slice_cols(ad::sum_rows(x), 0, 1), 3);
     }},
    {"sum_rows", [](ad::Var x, const ad::Tensor &) { return ad::sum_rows(x); }},
    {"slice_cols", [](ad::Var x, const ad::Tensor &) {
       return ad::slice_cols(x, 0, (x.value().cols() + 1) / 2);
     }},
    {"hstack", [](ad::Var x, const ad::Tensor &) {
       const std::vector<ad::Var> parts{x, ad::tanh(x)};
       return ad::hstack(parts);
     }},
    {"vstack", [](ad::Var x, const ad::Tensor &) {
       const std::vector<ad::Var> parts{ad::square(x), x};
       return ad::vstack(parts);
     }},
    {"matmul", [](ad::Var x, const ad::Tensor & c) {
       return ad::matmul(x, ad::tanh(x.tape().constant(c)));
     }},
    {"affine", [](ad::Var x, const ad::Tensor & c) {
       const auto w = x.tape().constant(c);
       const auto b = ad::slice_cols(ad::sum_rows(x), 0, x.value().cols());
       return ad::affine(x, ad::tanh(w), b);
     }},
    {"mse", [](ad::Var x, const ad::Tensor & c) { return ad::mse(x, x.tape().constant(c)); }},
  };
  std::size_t instances = 0;
  for (const auto & c : cases) {
    for (int trial = 0; trial < 8; ++trial) {
      const auto rows = random_size(rng, 1, 8);
      const auto cols = random_size(rng, 1, 8);
      const auto x = random_tensor(rng, rows, cols, 1.5);
      const std::string name(c.name);
      const auto other = (name == "matmul" || name == "affine") ?
        random_tensor(rng, cols, cols) : random_tensor(rng, rows, cols);
      ad::Tensor weights;
      auto op = [&](ad::Var v) {
        const auto out = c.op(v, other);
        if (weights.size() != out.value().size()) {
          weights = random_tensor(rng, out.value().rows(), out.value().cols());
        }
        return ad::sum(ad::mul(out, v.tape().constant(weights)));
      };
      const auto g = analytic(op, x);
      const auto n = numeric_gradient([&](const ad::Tensor & t) { return forward(op, t); }, x);
      INFO(name << " " << rows << "x" << cols);
      CHECK(norm_rel(g, n) < 1e-7);
      ++instances;
    }
  }
  CHECK(instances >= 100);
}

TEST_CASE("grad_check")
{
  SUBCASE("linear function is exact")
  {
    const std::vector<ad::Tensor> params{ad::Tensor::matrix(2, 3, {1, -2, 3, 0.5, 0.25, -4})};
    const auto c = ad::Tensor::matrix(2, 3, {0.3, 0.1, -2, 5, 1, 1});
    auto f = [&](ad::Tape & tape, std::span<const ad::Var> v) {
      return ad::sum(ad::mul(v[0], tape.constant(c)));
    };
    CHECK(ad::grad_check(f, params, 1e-3).max_rel_error < 1e-10);
  }
  SUBCASE("constant function gives zero gradients both ways")
  {
    const std::vector<ad::Tensor> params{ad::Tensor::matrix(1, 2, {1, 2})};
    auto f = [](ad::Tape & tape, std::span<const ad::Var> v) {
      return ad::add(ad::scale(ad::sum(v[0]), 0.0), tape.constant(ad::Tensor::scalar(4.0)));
    };
    const auto r = ad::grad_check(f, params, 1e-6);
    CHECK(r.max_rel_error == 0.0);
    CHECK(ad::gradients(f, params)[0] == ad::Tensor::zeros({1, 2}));
  }
  SUBCASE("tanh network at step 1e-6")
  {
    std::mt19937_64 rng(4);
    const std::vector<ad::Tensor> params{
      random_tensor(rng, 4, 6, 0.7), random_tensor(rng, 1, 6, 0.1),
      random_tensor(rng, 6, 5, 0.7), random_tensor(rng, 1, 5, 0.1),
      random_tensor(rng, 5, 3, 0.7), random_tensor(rng, 1, 3, 0.1)};
    const auto x = random_tensor(rng, 3, 4);
    const auto y = random_tensor(rng, 3, 3);
    auto f = [&](ad::Tape & tape, std::span<const ad::Var> v) {
      auto h = ad::tanh(ad::affine(tape.constant(x), v[0], v[1]));
      h = ad::tanh(ad::affine(h, v[2], v[3]));
      return ad::mse(ad::affine(h, v[4], v[5]), tape.constant(y));
    };
    const auto r = ad::grad_check(f, params, 1e-6);
    CHECK(r.checked == 4 * 6 + 6 + 6 * 5 + 5 + 5 * 3 + 3);
    CHECK(r.max_rel_error < 1e-5);
  }
  SUBCASE("step must be positive")
  {
    const std::vector<ad::Tensor> params{ad::Tensor::scalar(1.0)};
    auto f = [](ad::Tape &, std::span<const ad::Var> v) { return ad::sum(v[0]); };
    CHECK_THROWS(ad::grad_check(f, params, 0.0));
  }
}
