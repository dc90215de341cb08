/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The pwfk Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "pwfk/diffnet/adam.hpp"
#include "pwfk/diffnet/grad_check.hpp"
#include "pwfk/diffnet/network.hpp"
#include "pwfk/diffnet/ops.hpp"
#include "pwfk/diffnet/tensor.hpp"

using namespace pwfk;
using namespace pwfk::diffnet;
using T = Tensor<double>;
using Arr = T::Array;

namespace {

Arr randn(std::size_t n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Arr a(static_cast<Eigen::Index>(n));
  for (auto& v : a) v = g(rng);
  return a;
}

T leaf(Shape s, std::mt19937_64& rng, double sd = 1.0) {
  const std::size_t n = shape_numel(s);
  return T(std::move(s), randn(n, rng, sd), true);
}

// Central differences of f with respect to every entry of x, compared with
// what backward() left in x.grad(). Returns the max relative error.
double fd_error(const std::function<T()>& f, T& x, double h = 1e-6) {
  x.zero_grad();
  f().backward();
  const Arr analytic = x.grad();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.mutable_values().size(); ++i) {
    const double keep = x.mutable_values()(i);
    x.mutable_values()(i) = keep + h;
    const double up = f().item();
    x.mutable_values()(i) = keep - h;
    const double down = f().item();
    x.mutable_values()(i) = keep;
    const double numeric = (up - down) / (2 * h);
    const double err = std::abs(numeric - analytic(i)) / std::max({std::abs(numeric), std::abs(analytic(i)), 1e-6});
    worst = std::max(worst, err);
  }
  return worst;
}

// Six nested loops, zero-padded "same" cross-correlation.
Arr brute_conv(const T& x, const T& w, const T& b) {
  const std::size_t ci = x.dim(0), H = x.dim(1), W = x.dim(2), co = w.dim(0), k = w.dim(2);
  const long r = static_cast<long>(k / 2);
  Arr out = Arr::Zero(static_cast<Eigen::Index>(co * H * W));
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j) {
        double acc = b.values()(static_cast<Eigen::Index>(o));
        for (std::size_t c = 0; c < ci; ++c)
          for (std::size_t u = 0; u < k; ++u)
            for (std::size_t v = 0; v < k; ++v) {
              const long ii = static_cast<long>(i) + static_cast<long>(u) - r;
              const long jj = static_cast<long>(j) + static_cast<long>(v) - r;
              if (ii < 0 || jj < 0 || ii >= static_cast<long>(H) || jj >= static_cast<long>(W)) continue;
              acc += w.values()(static_cast<Eigen::Index>(((o * ci + c) * k + u) * k + v)) *
                     x.values()(static_cast<Eigen::Index>((c * H + static_cast<std::size_t>(ii)) * W +
                                                          static_cast<std::size_t>(jj)));
            }
        out(static_cast<Eigen::Index>((o * H + i) * W + j)) = acc;
      }
  return out;
}

}  // namespace

TEST_CASE("tensor basics") {
  CHECK(shape_numel({2, 3, 4}) == 24);
  CHECK(shape_string({2, 3}) == "[2x3]");
  CHECK_THROWS_AS(T({2, 2}, Arr::Zero(3)), std::invalid_argument);
  const T z = T::zeros({1, 2, 2}, true);
  CHECK(z.numel() == 4);
  CHECK_FALSE(z.has_grad());
  CHECK(z.grad().size() == 4);
  CHECK(z.grad().abs().maxCoeff() == 0.0);
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const T t = T::from_matrix(m);
  CHECK(t.shape() == Shape{1, 2, 3});
  CHECK(t.values()(1) == 2.0);  // row-major
  CHECK(t.to_matrix() == m);
  CHECK_THROWS_AS(t.backward(), std::invalid_argument);
}

TEST_CASE("gradients accumulate across every use of a tensor") {
  std::mt19937_64 rng(1);
  T x = leaf({1, 3, 3}, rng);
  const Arr r1 = randn(9, rng), r2 = randn(9, rng);
  // d/dx [ sum(r1 x) + sum(r2 relu(x)) ] = r1 + r2 * [x > 0]
  const auto f = [&] {
    const T a = weighted_sum(x, r1);
    const T b = weighted_sum(relu(x), r2);
    return T::make_result({1}, a.values() + b.values(), {a, b}, [a, b](T::Node& n) {
      a.node()->accumulate(n.grad);
      b.node()->accumulate(n.grad);
    });
  };
  f().backward();
  const Arr expected = r1 + r2 * (x.values() > 0).cast<double>();
  CHECK((x.grad() - expected).abs().maxCoeff() <= 1e-15);
  // a second backward adds on top
  f().backward();
  CHECK((x.grad() - 2 * expected).abs().maxCoeff() <= 1e-15);
  x.zero_grad();
  CHECK_FALSE(x.has_grad());
}

TEST_CASE("no graph is recorded for constants") {
  std::mt19937_64 rng(2);
  const T x(Shape{1, 2, 2}, randn(4, rng), false);
  const T y = relu(x);
  CHECK(y.node()->parents.empty());
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("conv2d matches the six-loop oracle, forward and backward") {
  std::mt19937_64 rng(3);
  T x = leaf({3, 5, 6}, rng);
  T w = leaf({4, 3, 3, 3}, rng);
  T b = leaf({4}, rng);
  const T y = conv2d(x, w, b);
  CHECK(y.shape() == Shape{4, 5, 6});
  CHECK((y.values() - brute_conv(x, w, b)).abs().maxCoeff() <= 1e-12);
  const Arr r = randn(y.numel(), rng);
  const auto f = [&] { return weighted_sum(conv2d(x, w, b), r); };
  CHECK(fd_error(f, x) <= 1e-7);
  CHECK(fd_error(f, w) <= 1e-7);
  CHECK(fd_error(f, b) <= 1e-7);

  T w5 = leaf({2, 3, 5, 5}, rng);
  T b2 = leaf({2}, rng);
  CHECK((conv2d(x, w5, b2).values() - brute_conv(x, w5, b2)).abs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(conv2d(x, leaf({4, 2, 3, 3}, rng), b), std::invalid_argument);
  CHECK_THROWS_AS(conv2d(x, leaf({4, 3, 2, 2}, rng), b), std::invalid_argument);
}

TEST_CASE("weight standardization: zero mean, unit scale, exact gradient") {
  std::mt19937_64 rng(4);
  T w = leaf({3, 2, 3, 3}, rng, 0.7);
  const double eps = 1e-4;
  const T s = weight_standardize(w, eps);
  for (Eigen::Index o = 0; o < 3; ++o) {
    const Arr raw = w.values().segment(o * 18, 18);
    const double mean = raw.mean();
    const double sd = std::sqrt((raw - mean).square().mean());
    const Arr expected = (raw - mean) / (sd + eps);
    CHECK((s.values().segment(o * 18, 18) - expected).abs().maxCoeff() <= 1e-13);
  }
  const Arr r = randn(s.numel(), rng);
  CHECK(fd_error([&] { return weighted_sum(weight_standardize(w, eps), r); }, w) <= 1e-6);
}

TEST_CASE("group norm matches a direct computation and its gradient") {
  std::mt19937_64 rng(5);
  T x = leaf({4, 3, 3}, rng, 2.0);
  T scale = leaf({4}, rng);
  T shift = leaf({4}, rng);
  const double eps = 1e-5;
  const T y = group_norm(x, 2, scale, shift, eps);
  for (Eigen::Index g = 0; g < 2; ++g) {
    const Arr seg = x.values().segment(g * 18, 18);
    const double mean = seg.mean();
    const double var = (seg - mean).square().mean();
    for (Eigen::Index i = 0; i < 18; ++i) {
      const Eigen::Index c = g * 2 + i / 9;
      const double expected = scale.values()(c) * (seg(i) - mean) / std::sqrt(var + eps) + shift.values()(c);
      CHECK(y.values()(g * 18 + i) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  const Arr r = randn(y.numel(), rng);
  const auto f = [&] { return weighted_sum(group_norm(x, 2, scale, shift, eps), r); };
  CHECK(fd_error(f, x) <= 1e-6);
  CHECK(fd_error(f, scale) <= 1e-7);
  CHECK(fd_error(f, shift) <= 1e-7);
  CHECK_THROWS_AS(group_norm(x, 3, scale, shift, eps), std::invalid_argument);
}

TEST_CASE("relu and bias") {
  Arr v(4);
  v << -1, 0.5, 0, 2;
  const T x(Shape{2, 1, 2}, v, true);
  CHECK((relu(x).values() - Arr((Arr(4) << 0, 0.5, 0, 2).finished())).abs().maxCoeff() == 0.0);
  const T b(Shape{2}, (Arr(2) << 10, 20).finished(), true);
  const T y = add_bias(x, b);
  CHECK((y.values() - Arr((Arr(4) << 9, 10.5, 20, 22).finished())).abs().maxCoeff() == 0.0);
  weighted_sum(y, Arr::Ones(4)).backward();
  CHECK((b.grad() - Arr::Constant(2, 2.0)).abs().maxCoeff() == 0.0);
}

TEST_CASE("mse loss is symmetric with gradients 2 (p - t) / n") {
  std::mt19937_64 rng(6);
  T p = leaf({1, 2, 3}, rng), t = leaf({1, 2, 3}, rng);
  const double direct = (p.values() - t.values()).square().mean();
  CHECK(mse_loss(p, t).item() == doctest::Approx(direct).epsilon(1e-15));
  CHECK(mse_loss(t, p).item() == doctest::Approx(direct).epsilon(1e-15));
  mse_loss(p, t).backward();
  const Arr g = 2.0 * (p.values() - t.values()) / 6.0;
  CHECK((p.grad() - g).abs().maxCoeff() <= 1e-15);
  CHECK((t.grad() + g).abs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(mse_loss(p, leaf({1, 3, 2}, rng)), std::invalid_argument);
}

TEST_CASE("fk layer backward is the operator adjoint") {
  AcquisitionConfig c;
  c.geometry = ArrayGeometry(8, 0.3e-3);
  c.n_samples = 16;
  c.angle = 0.1;
  auto op = std::make_shared<const FkMigrationOperator<double>>(c);
  std::mt19937_64 rng(7);
  T x = leaf({1, 16, 8}, rng);
  const Arr r = randn(16 * 8, rng);
  // linear in x, so a large step has no truncation error and less cancellation
  CHECK(fd_error([&] { return weighted_sum(fk_layer(x, op), r); }, x, 1e-2) <= 1e-7);
  CHECK_THROWS_AS(fk_layer(leaf({2, 16, 8}, rng), op), std::invalid_argument);
}

TEST_CASE("first Adam step moves every coordinate by lr against the gradient sign") {
  std::mt19937_64 rng(8);
  std::vector<T> params = {leaf({5}, rng), leaf({2, 2}, rng)};
  std::vector<Arr> before;
  for (auto& p : params) before.push_back(p.values());
  const Arr g0 = randn(5, rng);
  params[0].node()->accumulate(g0);
  // params[1] receives no gradient at all
  AdamConfig cfg;
  AdamState<double> st;
  adam_step(params, st, cfg);
  CHECK(st.step == 1);
  for (Eigen::Index i = 0; i < 5; ++i) {
    const double expected = -cfg.lr * g0(i) / (std::abs(g0(i)) + cfg.eps);
    CHECK(params[0].values()(i) - before[0](i) == doctest::Approx(expected).epsilon(1e-10));
  }
  CHECK((params[1].values() - before[1]).abs().maxCoeff() == 0.0);

  // second step against the textbook recurrence
  params[0].zero_grad();
  const Arr g1 = randn(5, rng);
  params[0].node()->accumulate(g1);
  const Arr x1 = params[0].values();
  adam_step(params, st, cfg);
  const Arr m = (1 - cfg.beta1) * (cfg.beta1 * g0 + g1);
  const Arr v = (1 - cfg.beta2) * (cfg.beta2 * g0.square() + g1.square());
  const Arr mh = m / (1 - cfg.beta1 * cfg.beta1), vh = v / (1 - cfg.beta2 * cfg.beta2);
  const Arr expected = x1 - cfg.lr * mh / (vh.sqrt() + cfg.eps);
  CHECK((params[0].values() - expected).abs().maxCoeff() <= 1e-14);

  AdamConfig bad;
  bad.lr = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = AdamConfig{};
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("layer counts, parameter counts and validation") {
  const std::vector<LayerSpec> layers = {
      LayerSpec::conv(1, 8, 3, true, false), LayerSpec::norm(8, 4), LayerSpec::activation(),
      LayerSpec::conv(8, 8, 5, true, false), LayerSpec::channel_bias(8), LayerSpec::conv(8, 1)};
  const Network<double> net(layers, 1);
  CHECK(net.parameter_count() == 8 * 9 + 16 + 8 * 8 * 25 + 8 + (8 * 9 + 1));
  CHECK(net.compute_layer_count() == 3);
  std::size_t total = 0;
  for (const auto& p : net.parameters()) total += p.numel();
  CHECK(total == net.parameter_count());
  CHECK(net.parameter_names().front() == "layer00.weight");
  CHECK(net.parameters().size() == net.parameter_names().size());

  CHECK_THROWS_AS(validate_layers({LayerSpec::conv(1, 8), LayerSpec::conv(4, 1)}), std::invalid_argument);
  CHECK_THROWS_AS(validate_layers({LayerSpec::conv(1, 8, 4)}), std::invalid_argument);
  CHECK_THROWS_AS(validate_layers({LayerSpec::conv(1, 6), LayerSpec::norm(6, 4)}), std::invalid_argument);
  AcquisitionConfig c;
  CHECK_THROWS_AS(validate_layers({LayerSpec::fk(c), LayerSpec::fk(c)}), std::invalid_argument);

  for (const auto& l : layers) {
    nlohmann::json j = l;
    CHECK(j.get<LayerSpec>() == l);
  }
  for (LayerKind k : {LayerKind::conv2d, LayerKind::group_norm, LayerKind::relu, LayerKind::fk_operator, LayerKind::bias})
    CHECK(layer_kind_from_name(layer_kind_name(k)) == k);
}

TEST_CASE("initialisation is seeded He-normal") {
  const std::vector<LayerSpec> layers = {LayerSpec::conv(16, 32, 3, false, true), LayerSpec::norm(32)};
  const Network<double> a(layers, 5), b(layers, 5), c(layers, 6);
  CHECK((a.parameters()[0].values() == b.parameters()[0].values()).all());
  CHECK_FALSE((a.parameters()[0].values() == c.parameters()[0].values()).all());
  const Arr& w = a.parameters()[0].values();
  const double sd = std::sqrt((w - w.mean()).square().mean());
  CHECK(sd == doctest::Approx(std::sqrt(2.0 / (16 * 9))).epsilon(0.05));
  CHECK(a.parameters()[1].values().abs().maxCoeff() == 0.0);                 // conv bias
  CHECK((a.parameters()[2].values() == 1.0).all());                           // norm scale
  CHECK(a.parameters()[3].values().abs().maxCoeff() == 0.0);                 // norm shift
}

TEST_CASE("grad_check passes on a small conv network and checks every input pixel") {
  const std::vector<LayerSpec> layers = {
      LayerSpec::conv(1, 8, 3, true, false), LayerSpec::norm(8, 8), LayerSpec::activation(),
      LayerSpec::conv(8, 1)};
  Network<double> net(layers, 3);
  std::mt19937_64 rng(9);
  const T x(Shape{1, 6, 6}, randn(36, rng), false);
  GradCheckOptions opt;
  const GradCheckReport rep = grad_check(net, x, opt);
  CHECK(rep.passed);
  CHECK(rep.max_rel_error_params <= opt.tolerance);
  CHECK(rep.max_rel_error_input <= opt.tolerance);
  CHECK(rep.n_inputs_checked + rep.n_rejected >= 36);
  CHECK(rep.n_params_checked >= 16);
}
