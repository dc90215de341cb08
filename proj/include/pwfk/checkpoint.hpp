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


#ifndef PWFK_CHECKPOINT_HPP
#define PWFK_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "pwfk/pipeline.hpp"

namespace pwfk {

// Checkpoint directory layout:
//   manifest.json            {layers, network_spec, seed, epoch, optimizer, parameters}
//   params/<name>.pwf        one tensor per trainable parameter
//   optimizer/m_NN.pwf, v_NN.pwf   Adam moments in parameter order

struct Checkpoint {
  NetworkSpec spec;
  TrainNetwork network;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  diffnet::AdamConfig adam;
  diffnet::AdamState<Real> optimizer;
};

void save_checkpoint(const std::filesystem::path& dir, const NetworkSpec& spec,
                     const TrainNetwork& network, std::uint64_t seed, std::size_t epoch,
                     const diffnet::AdamConfig& adam, const diffnet::AdamState<Real>& optimizer,
                     const nlohmann::json& extra = nlohmann::json::object());

/// IoError for missing files, std::invalid_argument for inconsistent contents.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace pwfk

#endif  // PWFK_CHECKPOINT_HPP
