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


#include "pwfk/diffnet/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace pwfk::diffnet {

void AdamConfig::validate() const {
  if (!(lr > 0) || !std::isfinite(lr)) throw std::invalid_argument("adam: lr must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw std::invalid_argument("adam: betas must lie in [0, 1)");
  if (!(eps > 0)) throw std::invalid_argument("adam: eps must be positive");
}

template <typename Scalar>
void adam_step(std::vector<Tensor<Scalar>>& params, AdamState<Scalar>& state,
               const AdamConfig& config) {
  config.validate();
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.push_back(Tensor<Scalar>::Array::Zero(p.values().size()));
      state.v.push_back(Tensor<Scalar>::Array::Zero(p.values().size()));
    }
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("adam: state was created for a different parameter set");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const auto b1 = static_cast<Scalar>(config.beta1);
  const auto b2 = static_cast<Scalar>(config.beta2);
  const auto c1 = static_cast<Scalar>(1.0 - std::pow(config.beta1, t));
  const auto c2 = static_cast<Scalar>(1.0 - std::pow(config.beta2, t));
  const auto lr = static_cast<Scalar>(config.lr);
  const auto eps = static_cast<Scalar>(config.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (state.m[i].size() != p.values().size())
      throw std::invalid_argument("adam: state shape mismatch for parameter " + std::to_string(i));
    const auto g = p.grad();  // zeros when nothing flowed in
    state.m[i] = b1 * state.m[i] + (Scalar(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (Scalar(1) - b2) * g.square();
    p.mutable_values() -= lr * (state.m[i] / c1) / ((state.v[i] / c2).sqrt() + eps);
  }
}

template void adam_step<float>(std::vector<Tensor<float>>&, AdamState<float>&, const AdamConfig&);
template void adam_step<double>(std::vector<Tensor<double>>&, AdamState<double>&, const AdamConfig&);

}  // namespace pwfk::diffnet
