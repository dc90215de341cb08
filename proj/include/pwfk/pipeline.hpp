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


#ifndef PWFK_PIPELINE_HPP
#define PWFK_PIPELINE_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pwfk/dataset.hpp"
#include "pwfk/diffnet/adam.hpp"
#include "pwfk/diffnet/network.hpp"
#include "pwfk/fk_migration.hpp"

namespace pwfk {

enum class Variant { data_to_image, image_to_image };

/// "d2i" / "i2i"
std::string variant_name(Variant v);
/// Accepts the short names and "data_to_image" / "image_to_image".
Variant variant_from_name(const std::string& name);

/**
 * data_to_image: pre-DCNN on the RF frame, the migration layer, post-DCNN on
 * the image. image_to_image: a single DCNN on a migrated single-angle image.
 * Each DCNN is a chain of (weight-standardized conv, group norm, relu)
 * blocks closed by a plain 1-channel conv with bias.
 */
struct NetworkSpec {
  Variant variant = Variant::data_to_image;
  std::size_t pre_layers = 8;
  std::size_t post_layers = 8;
  std::size_t channels = 64;
  std::size_t kernel = 3;
  std::size_t groups = 8;
  double ws_eps = 1e-4;
  double gn_eps = 1e-5;
  std::optional<AcquisitionConfig> acquisition;  // data_to_image only
  FkOptions fk;

  /// 8 + FK + 8 layers, or 16 for image_to_image; 64 channels.
  static NetworkSpec full_size(Variant variant,
                                   std::optional<AcquisitionConfig> acquisition = std::nullopt);
  /// image_to_image with an operator or pre-layers, zero layers, bad groups -> std::invalid_argument.
  void validate() const;
  bool operator==(const NetworkSpec&) const = default;
};

void to_json(nlohmann::json& j, const NetworkSpec& spec);
void from_json(const nlohmann::json& j, NetworkSpec& spec);

std::vector<diffnet::LayerSpec> network_layers(const NetworkSpec& spec);

// Training runs in single precision; gradient checks build double networks
// from the same layer list.
using Real = float;
using TrainNetwork = diffnet::Network<Real>;

template <typename Scalar = Real>
diffnet::Network<Scalar> build_network(const NetworkSpec& spec, std::uint64_t seed) {
  spec.validate();
  return diffnet::Network<Scalar>(network_layers(spec), seed);
}

/**
 * One training or test pair. Inputs: RF frame / max|frame| (data_to_image)
 * or migrated frame / its own peak (image_to_image). The target and the
 * plain-FK baseline are both divided by the peak of the compound image, so
 * the reference has peak 1.
 */
struct PreparedSample {
  std::size_t id = 0;
  diffnet::Tensor<Real> input;
  diffnet::Tensor<Real> target;
  Eigen::MatrixXd reference;  // normalised compound image
  Eigen::MatrixXd baseline;   // normalised single-angle migration
};

PreparedSample prepare_sample(std::size_t id, const RFFrame& zero_angle_frame,
                              const Image& ground_truth, Variant variant, const FkOperator& op);

/// Index of the 0 rad frame in the dataset angle list; std::invalid_argument when absent.
std::size_t zero_angle_index(const DatasetManifest& manifest);

/// Reads every scenario of @p split; IoError for missing files.
std::vector<PreparedSample> prepare_split(const DatasetManifest& manifest, const std::string& split,
                                          Variant variant);

struct HistoryRow {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> test_psnr;  // set on evaluation steps
};

struct TrainConfig {
  double lr = 0.01;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  std::size_t eval_interval = 0;  // epochs between test evaluations, 0 = never
  std::filesystem::path manifest;  // provenance only

  void validate() const;
};

struct TrainResult {
  std::vector<HistoryRow> history;
  diffnet::AdamConfig adam;
  diffnet::AdamState<Real> optimizer;
  std::size_t steps = 0;
  std::size_t epochs = 0;
};

struct TrainHooks {
  std::function<void(const HistoryRow&)> on_step;
  /// Called with the state at the failing step before TrainingDiverged is thrown.
  std::function<void(const TrainNetwork&, const TrainResult&)> on_diverged;
};

/**
 * Batch-size-one Adam on MSE. Each epoch visits the training samples in an
 * order shuffled by a generator seeded from config.seed; identical inputs
 * give identical trajectories.
 */
TrainResult train(TrainNetwork& network, std::span<const PreparedSample> train_set,
                  const TrainConfig& config, std::span<const PreparedSample> test_set = {},
                  const TrainHooks& hooks = {});

inline constexpr double kPsnrCap = 200.0;

/// 10 log10(1 / MSE) for a peak-1 reference, capped at kPsnrCap.
double psnr(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& reference);
double psnr(const Image& pred, const Image& reference);

struct ScenarioScore {
  std::size_t id = 0;
  double psnr_db = 0.0;
  double baseline_psnr_db = 0.0;  // plain single-angle migration
};

struct EvalReport {
  double mean_psnr_db = 0.0;
  double mean_baseline_psnr_db = 0.0;
  std::vector<ScenarioScore> scenarios;
};

Eigen::MatrixXd predict(const TrainNetwork& network, const PreparedSample& sample);

/// std::invalid_argument for an empty split or incompatible dims.
EvalReport evaluate(const TrainNetwork& network, std::span<const PreparedSample> samples);

/// step,epoch,loss,test_psnr with test_psnr blank when not evaluated.
void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> rows);
/// kind,scenario,psnr_db with network, plain_fk and mean rows.
void write_eval_csv(const std::filesystem::path& path, const EvalReport& report);

}  // namespace pwfk

#endif  // PWFK_PIPELINE_HPP
