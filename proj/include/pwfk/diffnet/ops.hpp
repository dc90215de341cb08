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

#ifndef PWFK_DIFFNET_OPS_HPP
#define PWFK_DIFFNET_OPS_HPP

#include <memory>

#include "pwfk/diffnet/tensor.hpp"
#include "pwfk/fk_migration.hpp"

namespace pwfk::diffnet {

// All image tensors are [C x H x W]; batch size is always one.

/// Zero-padded "same" cross-correlation. weights [Cout x Cin x k x k], k odd; bias [Cout].
template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                      const Tensor<Scalar>& bias);

/// Per output channel: (w - mean) / (std + eps), statistics over Cin x k x k.
template <typename Scalar>
Tensor<Scalar> weight_standardize(const Tensor<Scalar>& weights, Scalar eps);

/// Normalises each group of C / groups channels over (channels x H x W), then
/// applies the per-channel affine scale * x + shift.
template <typename Scalar>
Tensor<Scalar> group_norm(const Tensor<Scalar>& input, std::size_t groups,
                          const Tensor<Scalar>& scale, const Tensor<Scalar>& shift, Scalar eps);

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& input);

/// Per-channel bias add.
template <typename Scalar>
Tensor<Scalar> add_bias(const Tensor<Scalar>& input, const Tensor<Scalar>& bias);

/// Migration layer, [1 x n_t x n_x] -> [1 x n_z x n_x]. The backward pass is op.apply_adjoint.
template <typename Scalar>
Tensor<Scalar> fk_layer(const Tensor<Scalar>& input,
                        std::shared_ptr<const FkMigrationOperator<Scalar>> op);

/// mean((pred - target)^2) as a one-element tensor.
template <typename Scalar>
Tensor<Scalar> mse_loss(const Tensor<Scalar>& pred, const Tensor<Scalar>& target);

/// sum(input * weights) with constant weights; a linear probe for gradient checks.
template <typename Scalar>
Tensor<Scalar> weighted_sum(const Tensor<Scalar>& input,
                            const typename Tensor<Scalar>::Array& weights);

}  // namespace pwfk::diffnet

#endif  // PWFK_DIFFNET_OPS_HPP
