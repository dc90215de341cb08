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


// Shared fixtures for the unit tests and the acceptance run.

#ifndef PWFK_TESTS_SUPPORT_HPP
#define PWFK_TESTS_SUPPORT_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pwfk/acquisition.hpp"
#include "pwfk/cli.hpp"
#include "pwfk/dataset.hpp"

namespace pwfk::test {

// 64 x 64 desk-scale geometry: 12.8 mm aperture, 8.2 mm record.
inline AcquisitionConfig toy_acquisition() {
  AcquisitionConfig c;
  c.geometry = ArrayGeometry(64, 0.2e-3);
  c.pulse = PulseSpec{1.5e6, 0.6, 6e6};
  c.n_samples = 64;
  return c;
}

inline DatasetSpec toy_dataset_spec(std::size_t n_train, std::size_t n_test, std::uint64_t seed,
                                    std::size_t n_angles = 75) {
  DatasetSpec ds;
  ds.acquisition = toy_acquisition();
  ds.phantom.width = 12e-3;
  ds.phantom.depth_start = 1.5e-3;
  ds.phantom.depth = 5.5e-3;
  ds.phantom.anechoic_radius = {0.8e-3, 1.5e-3};
  ds.phantom.hyperechoic_radius = {0.8e-3, 1.5e-3};
  ds.angles = angle_sequence(n_angles, deg_to_rad(16.0));
  ds.n_train = n_train;
  ds.n_test = n_test;
  ds.master_seed = seed;
  return ds;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("pwfk_" + tag + "_" + std::to_string((std::uint64_t{rd()} << 32) | rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// FNV-1a, 64 bit
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// relative path -> content hash for every regular file below root
inline std::map<std::string, std::uint64_t> tree_hashes(const std::filesystem::path& root,
                                                        bool skip_run_config = true) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = std::filesystem::relative(e.path(), root).generic_string();
    // run_config.json echoes the output path, which differs between runs
    if (skip_run_config && e.path().filename() == "run_config.json") continue;
    out[rel] = fnv1a(read_bytes(e.path()));
  }
  return out;
}

struct CliResult {
  int code = -1;
  std::string out, err;
};

inline CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pwfk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

template <typename A, typename B>
double rel_diff(const A& a, const B& b) {
  const double den = static_cast<double>(b.norm());
  return static_cast<double>((a - b).norm()) / (den > 0 ? den : 1.0);
}

}  // namespace pwfk::test

#endif  // PWFK_TESTS_SUPPORT_HPP
