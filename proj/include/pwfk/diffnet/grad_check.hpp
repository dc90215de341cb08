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


#ifndef PWFK_DIFFNET_GRAD_CHECK_HPP
#define PWFK_DIFFNET_GRAD_CHECK_HPP

#include <cstdint>
#include <string>

#include "pwfk/diffnet/network.hpp"

namespace pwfk::diffnet {

struct GradCheckOptions {
  std::size_t n_params = 200;  // random parameter coordinates (all, if the net has fewer)
  bool check_input = true;     // every input pixel as well
  double h = 1e-5;
  double tolerance = 1e-4;
  // denominator guard of the relative error, so gradients at round-off level
  // are compared absolutely
  double abs_floor = 1e-5;
  std::uint64_t seed = 0;
  std::size_t max_resamples = 20;
};

struct GradCheckReport {
  double max_rel_error_params = 0.0;
  double max_rel_error_input = 0.0;
  double max_abs_error = 0.0;
  std::size_t n_params_checked = 0;
  std::size_t n_inputs_checked = 0;
  std::size_t n_rejected = 0;   // coordinates whose perturbation flipped a relu
  std::size_t n_resamples = 0;  // base points redrawn because a relu input sat near its kink
  double min_abs_preactivation = 0.0;
  double tolerance = 0.0;
  std::string worst;  // coordinate with the largest relative error
  bool passed = false;

  double max_rel_error() const { return std::max(max_rel_error_params, max_rel_error_input); }
};

/**
 * Central-difference check of the gradient of the linear probe
 * L = sum(r * net(x)), r a fixed random field. Base points whose relu inputs
 * come within 10 h of zero are redrawn by jittering the input; coordinates
 * whose perturbation still flips a relu mask are skipped and counted. The
 * network parameters are restored before returning.
 */
GradCheckReport grad_check(Network<double>& net, const Tensor<double>& input,
                           const GradCheckOptions& options = {});

}  // namespace pwfk::diffnet

#endif  // PWFK_DIFFNET_GRAD_CHECK_HPP
