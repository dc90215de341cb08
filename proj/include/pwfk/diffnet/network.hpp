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


#ifndef PWFK_DIFFNET_NETWORK_HPP
#define PWFK_DIFFNET_NETWORK_HPP

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pwfk/diffnet/ops.hpp"
#include "pwfk/fk_migration.hpp"

namespace pwfk::diffnet {

enum class LayerKind { conv2d, group_norm, relu, fk_operator, bias };

std::string layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

/**
 * One layer of a sequential network. Only the fields of the given kind are
 * meaningful; the factories below fill them in.
 */
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  bool standardize = false;  // conv2d: weight standardization before use
  bool with_bias = true;     // conv2d
  double ws_eps = 1e-4;
  std::size_t groups = 8;    // group_norm
  double gn_eps = 1e-5;
  std::optional<AcquisitionConfig> acquisition;  // fk_operator
  FkOptions fk_options;

  static LayerSpec conv(std::size_t in, std::size_t out, std::size_t kernel = 3,
                        bool standardize = false, bool with_bias = true);
  static LayerSpec norm(std::size_t channels, std::size_t groups = 8, double eps = 1e-5);
  static LayerSpec activation();
  static LayerSpec fk(const AcquisitionConfig& config, FkOptions options = {});
  static LayerSpec channel_bias(std::size_t channels);

  /// Trainable scalars of this layer.
  std::size_t parameter_count() const;
  bool operator==(const LayerSpec&) const = default;
};

void to_json(nlohmann::json& j, const LayerSpec& spec);
void from_json(const nlohmann::json& j, LayerSpec& spec);

/// Throws std::invalid_argument on broken channel chaining or more than one fk layer.
void validate_layers(const std::vector<LayerSpec>& layers);

/// What a forward pass saw at its relu inputs, for kink-aware finite differencing.
struct ForwardTrace {
  double min_abs_preactivation = std::numeric_limits<double>::infinity();
  std::vector<std::vector<bool>> relu_masks;
};

template <typename Scalar>
class Network {
 public:
  /// He-normal conv weights from @p seed, zero biases, unit norm scales, zero shifts.
  Network(std::vector<LayerSpec> layers, std::uint64_t seed);

  Tensor<Scalar> forward(const Tensor<Scalar>& input, ForwardTrace* trace = nullptr) const;

  const std::vector<LayerSpec>& layers() const { return layers_; }
  /// Trainable tensors in layer order (weight before bias, scale before shift).
  const std::vector<Tensor<Scalar>>& parameters() const { return params_; }
  std::vector<Tensor<Scalar>>& parameters() { return params_; }
  const std::vector<std::string>& parameter_names() const { return names_; }
  std::size_t parameter_count() const;
  /// conv2d plus fk_operator layers.
  std::size_t compute_layer_count() const;
  void zero_grad();

 private:
  struct Slot {
    int weight = -1, bias = -1;  // indices into params_
    std::shared_ptr<const FkMigrationOperator<Scalar>> op;
    Tensor<Scalar> zero_bias;  // conv without bias
  };
  std::vector<LayerSpec> layers_;
  std::vector<Slot> slots_;
  std::vector<Tensor<Scalar>> params_;
  std::vector<std::string> names_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace pwfk::diffnet

#endif  // PWFK_DIFFNET_NETWORK_HPP
