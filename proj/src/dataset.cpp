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

#include "pwfk/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "pwfk/errors.hpp"

namespace pwfk {

namespace fs = std::filesystem;

std::uint64_t scenario_seed(std::uint64_t master_seed, std::size_t index) {
  // splitmix64 over master ^ golden-ratio-spaced index
  std::uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Scenario simulate_scenario(const DatasetSpec& spec, std::size_t index,
                           const CompoundMigrator& migrator) {
  Scenario s;
  s.id = index;
  s.seed = scenario_seed(spec.master_seed, index);
  PhantomSpec ps = spec.phantom;
  ps.seed = s.seed;
  s.phantom = generate_phantom(ps);
  s.frames.reserve(spec.angles.size());
  for (double a : spec.angles) {
    SimulationDiagnostics d;
    s.frames.push_back(simulate_rf(s.phantom, spec.acquisition.with_angle(a), &d));
    s.diagnostics.contributions += d.contributions;
    s.diagnostics.truncated += d.truncated;
  }
  s.ground_truth = migrator(s.frames);
  return s;
}

std::vector<const ManifestEntry*> DatasetManifest::split(const std::string& name) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : scenarios)
    if (e.split == name) out.push_back(&e);
  return out;
}

nlohmann::json dataset_spec_to_json(const DatasetSpec& spec) {
  return nlohmann::json{{"phantom", spec.phantom},
                        {"acquisition", spec.acquisition},
                        {"angles_rad", spec.angles},
                        {"n_train", spec.n_train},
                        {"n_test", spec.n_test},
                        {"master_seed", spec.master_seed},
                        {"frame_dtype", pwf_dtype_name(spec.frame_dtype)},
                        {"fk", {{"axial_pad", spec.fk.axial_pad}, {"lateral_pad", spec.fk.lateral_pad}}}};
}

DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
  static const std::set<std::string> keys = {"phantom", "acquisition", "angles_rad", "n_train",
                                             "n_test",  "master_seed", "frame_dtype", "fk"};
  if (!j.is_object()) throw std::invalid_argument("dataset spec: expected a JSON object");
  for (const auto& item : j.items())
    if (!keys.contains(item.key()))
      throw std::invalid_argument("dataset spec: unknown field '" + item.key() + "'");
  DatasetSpec s;
  if (j.contains("phantom")) s.phantom = j.at("phantom").get<PhantomSpec>();
  if (j.contains("acquisition")) s.acquisition = j.at("acquisition").get<AcquisitionConfig>();
  if (j.contains("angles_rad")) s.angles = j.at("angles_rad").get<std::vector<double>>();
  s.n_train = j.value("n_train", s.n_train);
  s.n_test = j.value("n_test", s.n_test);
  s.master_seed = j.value("master_seed", s.master_seed);
  if (j.contains("frame_dtype")) s.frame_dtype = pwf_dtype_from_name(j.at("frame_dtype").get<std::string>());
  if (pwf_dtype_is_complex(s.frame_dtype))
    throw std::invalid_argument("dataset spec: frame_dtype must be f32 or f64");
  if (j.contains("fk")) {
    const auto& fk = j.at("fk");
    s.fk.axial_pad = fk.value("axial_pad", s.fk.axial_pad);
    s.fk.lateral_pad = fk.value("lateral_pad", s.fk.lateral_pad);
  }
  return s;
}

nlohmann::json manifest_to_json(const DatasetManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.scenarios)
    entries.push_back({{"id", e.id},
                       {"seed", e.seed},
                       {"split", e.split},
                       {"phantom_file", e.phantom_file},
                       {"frame_files", e.frame_files},
                       {"ground_truth_file", e.ground_truth_file}});
  return {{"master_seed", m.master_seed}, {"spec", m.spec}, {"scenarios", entries}};
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_frame(const fs::path& pwf_path, const RFFrame& frame, PwfDtype dtype) {
  write_pwf(pwf_path, pwf_from_matrix(frame.samples, dtype));
  fs::path sidecar = pwf_path;
  sidecar.replace_extension(".json");
  write_json_file(sidecar, nlohmann::json(frame.config));
}

RFFrame read_frame(const fs::path& pwf_path) {
  fs::path sidecar = pwf_path;
  sidecar.replace_extension(".json");
  return read_frame(pwf_path, read_json_file(sidecar).get<AcquisitionConfig>());
}

RFFrame read_frame(const fs::path& pwf_path, const AcquisitionConfig& config) {
  return RFFrame(pwf_to_matrix(read_pwf(pwf_path)), config);
}

void write_image(const fs::path& path, const Image& image, PwfDtype dtype) {
  write_pwf(path, pwf_from_matrix(image.pixels, dtype));
}

Image read_image(const fs::path& path, double dz, double dx) {
  return Image{pwf_to_matrix(read_pwf(path)), dz, dx};
}

namespace {

std::string numbered(const char* prefix, std::size_t i, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%04zu%s", prefix, i, suffix);
  return buf;
}

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%03zu.pwf", i);
  return buf;
}

// Removes whatever a failed make_dataset call left behind.
class OutputJournal {
 public:
  void add(fs::path p) { paths_.push_back(std::move(p)); }
  void commit() { paths_.clear(); }
  ~OutputJournal() {
    std::error_code ec;
    for (auto it = paths_.rbegin(); it != paths_.rend(); ++it) fs::remove_all(*it, ec);
  }

 private:
  std::vector<fs::path> paths_;
};

}  // namespace

DatasetManifest make_dataset(std::size_t n_scenarios, const DatasetSpec& spec,
                             const fs::path& out_dir) {
  if (spec.n_train + spec.n_test != n_scenarios)
    throw std::invalid_argument("make_dataset: train/test split must sum to n_scenarios");
  if (spec.angles.empty()) throw std::invalid_argument("make_dataset: no angles");
  spec.acquisition.validate();
  spec.phantom.validate();

  DatasetManifest manifest;
  manifest.master_seed = spec.master_seed;
  manifest.spec = dataset_spec_to_json(spec);
  manifest.root = out_dir;

  OutputJournal journal;
  try {
    std::error_code ec;
    if (!fs::exists(out_dir)) {
      if (!fs::create_directories(out_dir, ec) || ec)
        throw IoError("cannot create '" + out_dir.string() + "'");
      journal.add(out_dir);
    }
    const CompoundMigrator migrator(spec.acquisition, CompoundConfig{spec.angles}, spec.fk);
    for (std::size_t i = 0; i < n_scenarios; ++i) {
      const Scenario sc = simulate_scenario(spec, i, migrator);
      const std::string dir_name = numbered("scenario_", i, "");
      const fs::path dir = out_dir / dir_name;
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create '" + dir.string() + "'");
      journal.add(dir);

      ManifestEntry e;
      e.id = i;
      e.seed = sc.seed;
      e.split = i < spec.n_train ? "train" : "test";
      e.phantom_file = dir_name + "/phantom.pwf";
      write_pwf(out_dir / e.phantom_file, pwf_from_matrix(scatterer_matrix(sc.phantom)));
      for (std::size_t k = 0; k < sc.frames.size(); ++k) {
        e.frame_files.push_back(dir_name + "/" + frame_name(k));
        write_frame(out_dir / e.frame_files.back(), sc.frames[k], spec.frame_dtype);
      }
      e.ground_truth_file = dir_name + "/ground_truth.pwf";
      write_image(out_dir / e.ground_truth_file, sc.ground_truth);
      manifest.scenarios.push_back(std::move(e));
    }
    const fs::path manifest_path = out_dir / "manifest.json";
    journal.add(manifest_path);
    write_json_file(manifest_path, manifest_to_json(manifest));
  } catch (const fs::filesystem_error& e) {
    throw IoError(std::string("make_dataset: ") + e.what());
  }
  journal.commit();
  return manifest;
}

DatasetManifest read_manifest(const fs::path& manifest_path) {
  const auto j = read_json_file(manifest_path);
  DatasetManifest m;
  try {
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.spec = j.at("spec");
    for (const auto& e : j.at("scenarios")) {
      ManifestEntry entry;
      entry.id = e.at("id").get<std::size_t>();
      entry.seed = e.at("seed").get<std::uint64_t>();
      entry.split = e.at("split").get<std::string>();
      entry.phantom_file = e.at("phantom_file").get<std::string>();
      entry.frame_files = e.at("frame_files").get<std::vector<std::string>>();
      entry.ground_truth_file = e.at("ground_truth_file").get<std::string>();
      m.scenarios.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("malformed manifest '" + manifest_path.string() + "': " + e.what());
  }
  m.root = manifest_path.parent_path();
  return m;
}

}  // namespace pwfk
