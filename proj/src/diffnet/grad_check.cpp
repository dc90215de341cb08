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


#include "pwfk/diffnet/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace pwfk::diffnet {

namespace {

using Array = Tensor<double>::Array;

struct Probe {
  Network<double>& net;
  Shape in_shape;
  Array weights;

  double loss(const Array& x, ForwardTrace* trace) const {
    const Tensor<double> in(in_shape, x, false);
    return net.forward(in, trace).values().cwiseProduct(weights).sum();
  }
};

double rel_error(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

}  // namespace

GradCheckReport grad_check(Network<double>& net, const Tensor<double>& input,
                           const GradCheckOptions& opt) {
  GradCheckReport rep;
  rep.tolerance = opt.tolerance;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Array x = input.values();
  const double rms = std::max(std::sqrt(x.square().mean()), 1e-3);

  Probe probe{net, input.shape(), Array()};
  ForwardTrace base;
  for (std::size_t attempt = 0;; ++attempt) {
    const auto out = net.forward(Tensor<double>(input.shape(), x), &base);
    if (probe.weights.size() == 0) {
      probe.weights.resize(out.values().size());
      for (auto& w : probe.weights) w = normal(rng);
    }
    if (base.min_abs_preactivation >= 10.0 * opt.h || attempt >= opt.max_resamples) break;
    ++rep.n_resamples;
    x = input.values();
    for (auto& v : x) v += 0.01 * rms * normal(rng);
  }
  rep.min_abs_preactivation = base.min_abs_preactivation;

  // analytic gradient
  net.zero_grad();
  const Tensor<double> xt(input.shape(), x, true);
  weighted_sum(net.forward(xt), probe.weights).backward();
  const Array gx = xt.grad();
  std::vector<Array> gp;
  for (const auto& p : net.parameters()) gp.push_back(p.grad());

  const double floor = opt.abs_floor;
  auto compare = [&](double analytic, const std::function<void(double)>& set, double& max_rel,
                     std::size_t& count, const std::string& label) {
    ForwardTrace tp, tm;
    set(+opt.h);
    const double lp = probe.loss(x, &tp);
    set(-opt.h);
    const double lm = probe.loss(x, &tm);
    set(0.0);
    if (tp.relu_masks != base.relu_masks || tm.relu_masks != base.relu_masks) {
      ++rep.n_rejected;
      return;
    }
    const double numeric = (lp - lm) / (2.0 * opt.h);
    const double e = rel_error(analytic, numeric, floor);
    rep.max_abs_error = std::max(rep.max_abs_error, std::abs(analytic - numeric));
    if (e > max_rel) max_rel = e;
    if (e >= rep.max_rel_error()) rep.worst = label;
    ++count;
  };

  // parameter coordinates: a few from every tensor, the rest uniformly at random
  auto& params = net.parameters();
  std::vector<std::pair<std::size_t, Eigen::Index>> coords;
  std::size_t total = 0;
  for (const auto& p : params) total += p.numel();
  if (total <= opt.n_params) {
    for (std::size_t i = 0; i < params.size(); ++i)
      for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(params[i].numel()); ++k)
        coords.emplace_back(i, k);
  } else {
    for (std::size_t i = 0; i < params.size(); ++i) {
      std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(params[i].numel()) - 1);
      for (int r = 0; r < 4; ++r) coords.emplace_back(i, pick(rng));
    }
    std::vector<std::size_t> offsets(params.size() + 1, 0);
    for (std::size_t i = 0; i < params.size(); ++i) offsets[i + 1] = offsets[i] + params[i].numel();
    std::uniform_int_distribution<std::size_t> flat(0, total - 1);
    while (coords.size() < opt.n_params) {
      const std::size_t f = flat(rng);
      const auto i = static_cast<std::size_t>(
          std::upper_bound(offsets.begin(), offsets.end(), f) - offsets.begin() - 1);
      coords.emplace_back(i, static_cast<Eigen::Index>(f - offsets[i]));
    }
  }
  for (const auto& [i, k] : coords) {
    double& v = params[i].mutable_values()(k);
    const double v0 = v;
    compare(gp[i](k), [&](double d) { v = v0 + d; }, rep.max_rel_error_params, rep.n_params_checked,
            net.parameter_names()[i] + "[" + std::to_string(k) + "]");
    v = v0;
  }

  if (opt.check_input) {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double x0 = x(k);
      compare(gx(k), [&](double d) { x(k) = x0 + d; }, rep.max_rel_error_input, rep.n_inputs_checked,
              "input[" + std::to_string(k) + "]");
      x(k) = x0;
    }
  }
  net.zero_grad();
  rep.passed = rep.max_rel_error() <= opt.tolerance && rep.n_params_checked + rep.n_inputs_checked > 0;
  return rep;
}

}  // namespace pwfk::diffnet
