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


#include "pwfk/checkpoint.hpp"

#include <cstdio>
#include <stdexcept>

#include "pwfk/errors.hpp"

namespace pwfk {

namespace fs = std::filesystem;
using diffnet::Tensor;

namespace {

constexpr PwfDtype kParamDtype = sizeof(Real) == 4 ? PwfDtype::f32 : PwfDtype::f64;

void write_array(const fs::path& path, const diffnet::Shape& shape, const Tensor<Real>::Array& a) {
  std::vector<std::uint64_t> dims(shape.begin(), shape.end());
  const Eigen::ArrayXd wide = a.cast<double>();
  write_pwf(path, pwf_from_values(std::move(dims), std::span<const double>(wide.data(), wide.size()),
                                  kParamDtype));
}

Tensor<Real>::Array read_array(const fs::path& path, const diffnet::Shape& shape) {
  const auto arr = read_pwf(path);
  if (arr.dims != std::vector<std::uint64_t>(shape.begin(), shape.end()))
    throw std::invalid_argument("checkpoint: '" + path.string() + "' has shape " +
                                diffnet::shape_string({arr.dims.begin(), arr.dims.end()}) +
                                ", expected " + diffnet::shape_string(shape));
  const auto v = pwf_values(arr);
  return Eigen::Map<const Eigen::ArrayXd>(v.data(), static_cast<Eigen::Index>(v.size())).cast<Real>();
}

std::string moment_name(char kind, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "optimizer/%c_%02zu.pwf", kind, i);
  return buf;
}

}  // namespace

void save_checkpoint(const fs::path& dir, const NetworkSpec& spec, const TrainNetwork& net,
                     std::uint64_t seed, std::size_t epoch, const diffnet::AdamConfig& adam,
                     const diffnet::AdamState<Real>& opt, const nlohmann::json& extra) {
  try {
    fs::create_directories(dir / "params");
    fs::create_directories(dir / "optimizer");
  } catch (const fs::filesystem_error& e) {
    throw IoError(std::string("save_checkpoint: ") + e.what());
  }
  const auto& params = net.parameters();
  nlohmann::json plist = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string file = "params/" + net.parameter_names()[i] + ".pwf";
    write_array(dir / file, params[i].shape(), params[i].values());
    plist.push_back({{"name", net.parameter_names()[i]}, {"file", file}, {"shape", params[i].shape()}});
  }
  nlohmann::json moments = nlohmann::json::array();
  if (!opt.m.empty()) {
    if (opt.m.size() != params.size())
      throw std::invalid_argument("save_checkpoint: optimizer state does not match the network");
    for (std::size_t i = 0; i < params.size(); ++i) {
      write_array(dir / moment_name('m', i), params[i].shape(), opt.m[i]);
      write_array(dir / moment_name('v', i), params[i].shape(), opt.v[i]);
      moments.push_back({moment_name('m', i), moment_name('v', i)});
    }
  }
  nlohmann::json m = {{"layers", net.layers()},
                      {"network_spec", spec},
                      {"seed", seed},
                      {"epoch", epoch},
                      {"parameters", plist},
                      {"optimizer",
                       {{"kind", "adam"},
                        {"lr", adam.lr},
                        {"beta1", adam.beta1},
                        {"beta2", adam.beta2},
                        {"eps", adam.eps},
                        {"step", opt.step},
                        {"state_files", moments}}}};
  for (const auto& item : extra.items()) m[item.key()] = item.value();
  write_json_file(dir / "manifest.json", m);
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const auto m = read_json_file(dir / "manifest.json");
  try {
    NetworkSpec spec = m.at("network_spec").get<NetworkSpec>();
    const auto layers = m.at("layers").get<std::vector<diffnet::LayerSpec>>();
    if (layers != network_layers(spec))
      throw std::invalid_argument("checkpoint: layer list does not match the network spec");
    const auto seed = m.at("seed").get<std::uint64_t>();
    Checkpoint ck{spec, TrainNetwork(layers, seed), seed, m.at("epoch").get<std::size_t>(), {}, {}};

    auto& params = ck.network.parameters();
    const auto& plist = m.at("parameters");
    if (plist.size() != params.size())
      throw std::invalid_argument("checkpoint: parameter count mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (plist[i].at("name").get<std::string>() != ck.network.parameter_names()[i])
        throw std::invalid_argument("checkpoint: unexpected parameter '" +
                                    plist[i].at("name").get<std::string>() + "'");
      params[i].mutable_values() = read_array(dir / plist[i].at("file").get<std::string>(), params[i].shape());
    }

    const auto& o = m.at("optimizer");
    ck.adam.lr = o.at("lr");
    ck.adam.beta1 = o.at("beta1");
    ck.adam.beta2 = o.at("beta2");
    ck.adam.eps = o.at("eps");
    ck.optimizer.step = o.at("step");
    const auto& files = o.at("state_files");
    if (!files.empty()) {
      if (files.size() != params.size())
        throw std::invalid_argument("checkpoint: optimizer state count mismatch");
      for (std::size_t i = 0; i < params.size(); ++i) {
        ck.optimizer.m.push_back(read_array(dir / files[i].at(0).get<std::string>(), params[i].shape()));
        ck.optimizer.v.push_back(read_array(dir / files[i].at(1).get<std::string>(), params[i].shape()));
      }
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed checkpoint manifest in '" + dir.string() + "': " + e.what());
  }
}

}  // namespace pwfk
