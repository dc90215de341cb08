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

#ifndef PWFK_DATASET_HPP
#define PWFK_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pwfk/acquisition.hpp"
#include "pwfk/compounding.hpp"
#include "pwfk/fk_migration.hpp"
#include "pwfk/phantom.hpp"
#include "pwfk/pwf.hpp"

namespace pwfk {

/// Everything needed to regenerate a dataset bit for bit.
struct DatasetSpec {
  PhantomSpec phantom;             // the seed field is replaced per scenario
  AcquisitionConfig acquisition;   // the angle field is replaced per frame
  std::vector<double> angles;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t master_seed = 0;
  PwfDtype frame_dtype = PwfDtype::f64;
  FkOptions fk;
};

/// Per-scenario RNG seed: splitmix64 of (master_seed, index).
std::uint64_t scenario_seed(std::uint64_t master_seed, std::size_t index);

struct Scenario {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  Phantom phantom;
  std::vector<RFFrame> frames;  // one per angle, in DatasetSpec::angles order
  Image ground_truth;           // coherent compound of all frames
  SimulationDiagnostics diagnostics;
};

/// Pure function of (spec, index); @p migrator must cover spec.angles.
Scenario simulate_scenario(const DatasetSpec& spec, std::size_t index,
                           const CompoundMigrator& migrator);

struct ManifestEntry {
  std::size_t id = 0;
  std::uint64_t seed = 0;
  std::string split;  // "train" or "test"
  std::string phantom_file;
  std::vector<std::string> frame_files;
  std::string ground_truth_file;
};

struct DatasetManifest {
  std::uint64_t master_seed = 0;
  nlohmann::json spec;  // echo of the DatasetSpec
  std::vector<ManifestEntry> scenarios;
  std::filesystem::path root;  // directory holding manifest.json; file names are relative to it

  std::vector<const ManifestEntry*> split(const std::string& name) const;
};

nlohmann::json dataset_spec_to_json(const DatasetSpec& spec);
/// Missing keys fall back to defaults; unknown keys are rejected.
DatasetSpec dataset_spec_from_json(const nlohmann::json& j);
nlohmann::json manifest_to_json(const DatasetManifest& manifest);

/**
 * Simulates n_scenarios = spec.n_train + spec.n_test scenarios into
 * @p out_dir: per scenario a directory with phantom.pwf (n x 3 scatterer
 * table), frame_NNN.pwf plus a frame_NNN.json acquisition sidecar, and
 * ground_truth.pwf; manifest.json at the top. On failure every file written
 * by this call is removed and IoError is thrown.
 */
DatasetManifest make_dataset(std::size_t n_scenarios, const DatasetSpec& spec,
                             const std::filesystem::path& out_dir);

DatasetManifest read_manifest(const std::filesystem::path& manifest_path);

/// Frame file with its JSON sidecar.
void write_frame(const std::filesystem::path& pwf_path, const RFFrame& frame, PwfDtype dtype);
RFFrame read_frame(const std::filesystem::path& pwf_path);
/// Frame file with an explicit acquisition config (no sidecar needed).
RFFrame read_frame(const std::filesystem::path& pwf_path, const AcquisitionConfig& config);

void write_image(const std::filesystem::path& path, const Image& image,
                 PwfDtype dtype = PwfDtype::f64);
Image read_image(const std::filesystem::path& path, double dz = 0.0, double dx = 0.0);

/// Reads and parses a JSON file; IoError when unreadable, std::invalid_argument when malformed.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace pwfk

#endif  // PWFK_DATASET_HPP
