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


#ifndef PWFK_DIFFNET_ADAM_HPP
#define PWFK_DIFFNET_ADAM_HPP

#include <cstdint>
#include <vector>

#include "pwfk/diffnet/tensor.hpp"

namespace pwfk::diffnet {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// lr > 0, betas in [0, 1), eps > 0.
  void validate() const;
};

/// First and second moments, one array per parameter tensor.
template <typename Scalar>
struct AdamState {
  std::vector<typename Tensor<Scalar>::Array> m, v;
  std::uint64_t step = 0;
};

/**
 * One bias-corrected Adam update of every tensor in @p params from its
 * current grad (tensors without a gradient take a zero gradient). The
 * state is sized on first use.
 */
template <typename Scalar>
void adam_step(std::vector<Tensor<Scalar>>& params, AdamState<Scalar>& state,
               const AdamConfig& config);

}  // namespace pwfk::diffnet

#endif  // PWFK_DIFFNET_ADAM_HPP
