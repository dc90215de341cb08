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


#include "pwfk/diffnet/network.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace pwfk::diffnet {

std::string layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::group_norm: return "group_norm";
    case LayerKind::relu: return "relu";
    case LayerKind::fk_operator: return "fk_operator";
    case LayerKind::bias: return "bias";
  }
  return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
  for (auto k : {LayerKind::conv2d, LayerKind::group_norm, LayerKind::relu, LayerKind::fk_operator,
                 LayerKind::bias})
    if (layer_kind_name(k) == name) return k;
  throw std::invalid_argument("unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::conv(std::size_t in, std::size_t out, std::size_t kernel, bool standardize,
                          bool with_bias) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.in_channels = in;
  s.out_channels = out;
  s.kernel = kernel;
  s.standardize = standardize;
  s.with_bias = with_bias;
  return s;
}

LayerSpec LayerSpec::norm(std::size_t channels, std::size_t groups, double eps) {
  LayerSpec s;
  s.kind = LayerKind::group_norm;
  s.in_channels = s.out_channels = channels;
  s.groups = groups;
  s.gn_eps = eps;
  return s;
}

LayerSpec LayerSpec::activation() { return LayerSpec{}; }

LayerSpec LayerSpec::fk(const AcquisitionConfig& config, FkOptions options) {
  LayerSpec s;
  s.kind = LayerKind::fk_operator;
  s.in_channels = s.out_channels = 1;
  s.acquisition = config;
  s.fk_options = options;
  return s;
}

LayerSpec LayerSpec::channel_bias(std::size_t channels) {
  LayerSpec s;
  s.kind = LayerKind::bias;
  s.in_channels = s.out_channels = channels;
  return s;
}

std::size_t LayerSpec::parameter_count() const {
  switch (kind) {
    case LayerKind::conv2d:
      return out_channels * in_channels * kernel * kernel + (with_bias ? out_channels : 0);
    case LayerKind::group_norm: return 2 * in_channels;
    case LayerKind::bias: return in_channels;
    default: return 0;
  }
}

void to_json(nlohmann::json& j, const LayerSpec& s) {
  j = nlohmann::json{{"kind", layer_kind_name(s.kind)}};
  switch (s.kind) {
    case LayerKind::conv2d:
      j["in_channels"] = s.in_channels;
      j["out_channels"] = s.out_channels;
      j["kernel"] = s.kernel;
      j["standardize"] = s.standardize;
      j["with_bias"] = s.with_bias;
      j["ws_eps"] = s.ws_eps;
      break;
    case LayerKind::group_norm:
      j["channels"] = s.in_channels;
      j["groups"] = s.groups;
      j["eps"] = s.gn_eps;
      break;
    case LayerKind::fk_operator:
      j["acquisition"] = *s.acquisition;
      j["fk"] = {{"axial_pad", s.fk_options.axial_pad}, {"lateral_pad", s.fk_options.lateral_pad}};
      break;
    case LayerKind::bias: j["channels"] = s.in_channels; break;
    case LayerKind::relu: break;
  }
}

void from_json(const nlohmann::json& j, LayerSpec& s) {
  try {
    const auto kind = layer_kind_from_name(j.at("kind").get<std::string>());
    switch (kind) {
      case LayerKind::conv2d:
        s = LayerSpec::conv(j.at("in_channels"), j.at("out_channels"), j.at("kernel"),
                            j.at("standardize"), j.at("with_bias"));
        s.ws_eps = j.value("ws_eps", s.ws_eps);
        break;
      case LayerKind::group_norm:
        s = LayerSpec::norm(j.at("channels"), j.at("groups"), j.at("eps"));
        break;
      case LayerKind::fk_operator: {
        FkOptions o;
        const auto& fk = j.at("fk");
        o.axial_pad = fk.at("axial_pad");
        o.lateral_pad = fk.at("lateral_pad");
        s = LayerSpec::fk(j.at("acquisition").get<AcquisitionConfig>(), o);
        break;
      }
      case LayerKind::bias: s = LayerSpec::channel_bias(j.at("channels")); break;
      case LayerKind::relu: s = LayerSpec::activation(); break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("layer spec: ") + e.what());
  }
}

void validate_layers(const std::vector<LayerSpec>& layers) {
  if (layers.empty()) throw std::invalid_argument("network: no layers");
  std::size_t channels = 0;  // 0 until the first channel-defining layer
  std::size_t n_fk = 0;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + layer_kind_name(l.kind) + ")";
    auto expect = [&](std::size_t c) {
      if (c == 0) throw std::invalid_argument(where + ": zero channels");
      if (channels != 0 && channels != c)
        throw std::invalid_argument(where + ": expects " + std::to_string(c) +
                                    " input channels, previous layer gives " +
                                    std::to_string(channels));
    };
    switch (l.kind) {
      case LayerKind::conv2d:
        expect(l.in_channels);
        if (l.out_channels == 0) throw std::invalid_argument(where + ": zero output channels");
        if (l.kernel % 2 == 0) throw std::invalid_argument(where + ": kernel size must be odd");
        if (l.standardize && !(l.ws_eps > 0)) throw std::invalid_argument(where + ": eps must be positive");
        channels = l.out_channels;
        break;
      case LayerKind::group_norm:
        expect(l.in_channels);
        if (l.groups == 0 || l.in_channels % l.groups != 0)
          throw std::invalid_argument(where + ": channels not divisible by groups");
        if (!(l.gn_eps > 0)) throw std::invalid_argument(where + ": eps must be positive");
        channels = l.in_channels;
        break;
      case LayerKind::bias:
        expect(l.in_channels);
        channels = l.in_channels;
        break;
      case LayerKind::fk_operator:
        expect(1);
        if (!l.acquisition) throw std::invalid_argument(where + ": no acquisition config");
        l.acquisition->validate();
        if (++n_fk > 1) throw std::invalid_argument("network: more than one fk_operator layer");
        channels = 1;
        break;
      case LayerKind::relu: break;
    }
  }
}

template <typename Scalar>
Network<Scalar>::Network(std::vector<LayerSpec> layers, std::uint64_t seed)
    : layers_(std::move(layers)) {
  validate_layers(layers_);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto add = [&](std::string name, Shape shape, typename Tensor<Scalar>::Array values) {
    params_.emplace_back(std::move(shape), std::move(values), true);
    names_.push_back(std::move(name));
    return static_cast<int>(params_.size() - 1);
  };
  slots_.resize(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "layer%02zu.", i);
    auto& slot = slots_[i];
    switch (l.kind) {
      case LayerKind::conv2d: {
        const auto fan_in = l.in_channels * l.kernel * l.kernel;
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        typename Tensor<Scalar>::Array w(static_cast<Eigen::Index>(l.out_channels * fan_in));
        for (auto& v : w) v = static_cast<Scalar>(sd * normal(rng));
        slot.weight = add(prefix + std::string("weight"),
                          {l.out_channels, l.in_channels, l.kernel, l.kernel}, std::move(w));
        if (l.with_bias)
          slot.bias = add(prefix + std::string("bias"), {l.out_channels},
                          Tensor<Scalar>::Array::Zero(static_cast<Eigen::Index>(l.out_channels)));
        else
          slot.zero_bias = Tensor<Scalar>::zeros({l.out_channels});
        break;
      }
      case LayerKind::group_norm: {
        const auto c = static_cast<Eigen::Index>(l.in_channels);
        slot.weight = add(prefix + std::string("scale"), {l.in_channels}, Tensor<Scalar>::Array::Ones(c));
        slot.bias = add(prefix + std::string("shift"), {l.in_channels}, Tensor<Scalar>::Array::Zero(c));
        break;
      }
      case LayerKind::bias:
        slot.bias = add(prefix + std::string("bias"), {l.in_channels},
                        Tensor<Scalar>::Array::Zero(static_cast<Eigen::Index>(l.in_channels)));
        break;
      case LayerKind::fk_operator:
        slot.op = std::make_shared<const FkMigrationOperator<Scalar>>(*l.acquisition, l.fk_options);
        break;
      case LayerKind::relu: break;
    }
  }
}

template <typename Scalar>
Tensor<Scalar> Network<Scalar>::forward(const Tensor<Scalar>& input, ForwardTrace* trace) const {
  if (trace) *trace = ForwardTrace{};
  Tensor<Scalar> x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    const auto& slot = slots_[i];
    switch (l.kind) {
      case LayerKind::conv2d: {
        Tensor<Scalar> w = params_[slot.weight];
        if (l.standardize) w = weight_standardize(w, static_cast<Scalar>(l.ws_eps));
        x = conv2d(x, w, slot.bias >= 0 ? params_[slot.bias] : slot.zero_bias);
        break;
      }
      case LayerKind::group_norm:
        x = group_norm(x, l.groups, params_[slot.weight], params_[slot.bias],
                       static_cast<Scalar>(l.gn_eps));
        break;
      case LayerKind::relu:
        if (trace) {
          const auto& v = x.values();
          std::vector<bool> mask(static_cast<std::size_t>(v.size()));
          for (Eigen::Index k = 0; k < v.size(); ++k) {
            mask[static_cast<std::size_t>(k)] = v(k) > Scalar(0);
            trace->min_abs_preactivation =
                std::min(trace->min_abs_preactivation, std::abs(static_cast<double>(v(k))));
          }
          trace->relu_masks.push_back(std::move(mask));
        }
        x = relu(x);
        break;
      case LayerKind::fk_operator: x = fk_layer(x, slot.op); break;
      case LayerKind::bias: x = add_bias(x, params_[slot.bias]); break;
    }
  }
  return x;
}

template <typename Scalar>
std::size_t Network<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.numel();
  return n;
}

template <typename Scalar>
std::size_t Network<Scalar>::compute_layer_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_)
    if (l.kind == LayerKind::conv2d || l.kind == LayerKind::fk_operator) ++n;
  return n;
}

template <typename Scalar>
void Network<Scalar>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template class Network<float>;
template class Network<double>;

}  // namespace pwfk::diffnet
