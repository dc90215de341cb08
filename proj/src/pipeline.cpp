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


#include "pwfk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pwfk/envelope.hpp"
#include "pwfk/errors.hpp"

namespace pwfk {

using diffnet::LayerSpec;

std::string variant_name(Variant v) { return v == Variant::data_to_image ? "d2i" : "i2i"; }

Variant variant_from_name(const std::string& name) {
  if (name == "d2i" || name == "data_to_image") return Variant::data_to_image;
  if (name == "i2i" || name == "image_to_image") return Variant::image_to_image;
  throw std::invalid_argument("unknown network variant '" + name + "' (expected d2i or i2i)");
}

NetworkSpec NetworkSpec::full_size(Variant variant,
                                       std::optional<AcquisitionConfig> acquisition) {
  NetworkSpec s;
  s.variant = variant;
  if (variant == Variant::data_to_image) {
    s.acquisition = std::move(acquisition);
  } else {
    if (acquisition)
      throw std::invalid_argument("image_to_image networks have no migration layer");
    s.pre_layers = 0;
    s.post_layers = 16;
  }
  return s;
}

void NetworkSpec::validate() const {
  if (channels == 0) throw std::invalid_argument("network spec: channels must be positive");
  if (kernel % 2 == 0) throw std::invalid_argument("network spec: kernel size must be odd");
  if (groups == 0 || channels % groups != 0)
    throw std::invalid_argument("network spec: " + std::to_string(channels) +
                                " channels are not divisible into " + std::to_string(groups) +
                                " groups");
  if (!(ws_eps > 0) || !(gn_eps > 0)) throw std::invalid_argument("network spec: eps must be positive");
  if (post_layers == 0) throw std::invalid_argument("network spec: post_layers must be at least 1");
  if (variant == Variant::image_to_image) {
    if (acquisition)
      throw std::invalid_argument("network spec: image_to_image cannot contain an fk_operator layer");
    if (pre_layers != 0)
      throw std::invalid_argument("network spec: image_to_image has no pre-migration layers");
  } else {
    if (!acquisition)
      throw std::invalid_argument("network spec: data_to_image needs an acquisition config");
    acquisition->validate();
  }
}

void to_json(nlohmann::json& j, const NetworkSpec& s) {
  j = nlohmann::json{{"variant", variant_name(s.variant)},
                     {"pre_layers", s.pre_layers},
                     {"post_layers", s.post_layers},
                     {"channels", s.channels},
                     {"kernel", s.kernel},
                     {"groups", s.groups},
                     {"ws_eps", s.ws_eps},
                     {"gn_eps", s.gn_eps},
                     {"acquisition", nullptr},
                     {"fk", {{"axial_pad", s.fk.axial_pad}, {"lateral_pad", s.fk.lateral_pad}}}};
  if (s.acquisition) j["acquisition"] = *s.acquisition;
}

void from_json(const nlohmann::json& j, NetworkSpec& s) {
  try {
    s = NetworkSpec{};
    s.variant = variant_from_name(j.at("variant").get<std::string>());
    s.pre_layers = j.at("pre_layers").get<std::size_t>();
    s.post_layers = j.at("post_layers").get<std::size_t>();
    s.channels = j.at("channels").get<std::size_t>();
    s.kernel = j.value("kernel", s.kernel);
    s.groups = j.value("groups", s.groups);
    s.ws_eps = j.value("ws_eps", s.ws_eps);
    s.gn_eps = j.value("gn_eps", s.gn_eps);
    if (j.contains("acquisition") && !j.at("acquisition").is_null())
      s.acquisition = j.at("acquisition").get<AcquisitionConfig>();
    if (j.contains("fk")) {
      s.fk.axial_pad = j.at("fk").value("axial_pad", s.fk.axial_pad);
      s.fk.lateral_pad = j.at("fk").value("lateral_pad", s.fk.lateral_pad);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("network spec: ") + e.what());
  }
}

namespace {

void append_dcnn(std::vector<LayerSpec>& out, std::size_t n_layers, const NetworkSpec& s) {
  if (n_layers == 0) return;
  std::size_t in = 1;
  for (std::size_t i = 0; i + 1 < n_layers; ++i) {
    // the conv bias would be removed by the norm that follows
    auto conv = LayerSpec::conv(in, s.channels, s.kernel, true, false);
    conv.ws_eps = s.ws_eps;
    out.push_back(conv);
    out.push_back(LayerSpec::norm(s.channels, s.groups, s.gn_eps));
    out.push_back(LayerSpec::activation());
    in = s.channels;
  }
  out.push_back(LayerSpec::conv(in, 1, s.kernel, false, true));
}

}  // namespace

std::vector<LayerSpec> network_layers(const NetworkSpec& spec) {
  spec.validate();
  std::vector<LayerSpec> layers;
  if (spec.variant == Variant::data_to_image) {
    append_dcnn(layers, spec.pre_layers, spec);
    layers.push_back(LayerSpec::fk(*spec.acquisition, spec.fk));
  }
  append_dcnn(layers, spec.post_layers, spec);
  return layers;
}

PreparedSample prepare_sample(std::size_t id, const RFFrame& frame, const Image& ground_truth,
                              Variant variant, const FkOperator& op) {
  const Image fk = migrate(op, frame);
  if (fk.rows() != ground_truth.rows() || fk.cols() != ground_truth.cols())
    throw std::invalid_argument("prepare_sample: ground truth is " +
                                std::to_string(ground_truth.rows()) + "x" +
                                std::to_string(ground_truth.cols()) + ", migrated frame is " +
                                std::to_string(fk.rows()) + "x" + std::to_string(fk.cols()));
  const double ref_peak = peak_magnitude(ground_truth.pixels);
  PreparedSample s;
  s.id = id;
  s.reference = ground_truth.pixels / ref_peak;
  s.baseline = fk.pixels / ref_peak;
  const Eigen::MatrixXd in = variant == Variant::data_to_image
                                 ? Eigen::MatrixXd(frame.samples / peak_magnitude(frame.samples))
                                 : Eigen::MatrixXd(fk.pixels / peak_magnitude(fk.pixels));
  s.input = diffnet::Tensor<Real>::from_matrix(in.cast<Real>());
  s.target = diffnet::Tensor<Real>::from_matrix(s.reference.cast<Real>());
  return s;
}

std::size_t zero_angle_index(const DatasetManifest& manifest) {
  const auto spec = dataset_spec_from_json(manifest.spec);
  for (std::size_t i = 0; i < spec.angles.size(); ++i)
    if (std::abs(spec.angles[i]) < 1e-12) return i;
  throw std::invalid_argument("dataset has no zero-angle frame");
}

std::vector<PreparedSample> prepare_split(const DatasetManifest& manifest, const std::string& split,
                                          Variant variant) {
  const auto spec = dataset_spec_from_json(manifest.spec);
  const std::size_t k = zero_angle_index(manifest);
  std::vector<PreparedSample> out;
  std::optional<FkOperator> op;
  for (const ManifestEntry* e : manifest.split(split)) {
    if (k >= e->frame_files.size())
      throw std::invalid_argument("scenario " + std::to_string(e->id) + " lacks frame " + std::to_string(k));
    const RFFrame frame = read_frame(manifest.root / e->frame_files[k]);
    if (!op || !(op->config() == frame.config)) op.emplace(frame.config, spec.fk);
    const Image gt = read_image(manifest.root / e->ground_truth_file, op->dz(), op->dx());
    out.push_back(prepare_sample(e->id, frame, gt, variant, *op));
  }
  return out;
}

void TrainConfig::validate() const {
  if (!(lr > 0) || !std::isfinite(lr)) throw std::invalid_argument("train: lr must be positive");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be at least 1");
}

TrainResult train(TrainNetwork& net, std::span<const PreparedSample> train_set,
                  const TrainConfig& config, std::span<const PreparedSample> test_set,
                  const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training split");
  TrainResult res;
  res.adam.lr = config.lr;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed ^ 0x6a09e667f3bcc909ULL);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t n = 0; n < order.size(); ++n) {
      const auto& sample = train_set[order[n]];
      net.zero_grad();
      const auto loss = diffnet::mse_loss(net.forward(sample.input), sample.target);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        if (hooks.on_diverged) hooks.on_diverged(net, res);
        throw TrainingDiverged("non-finite loss at step " + std::to_string(res.steps + 1) +
                               " (epoch " + std::to_string(epoch) + ", scenario " +
                               std::to_string(sample.id) + ")");
      }
      loss.backward();
      diffnet::adam_step(net.parameters(), res.optimizer, res.adam);
      ++res.steps;
      res.history.push_back({res.steps, epoch, value, std::nullopt});
      const bool last = n + 1 == order.size();
      if (last && config.eval_interval && epoch % config.eval_interval == 0 && !test_set.empty())
        res.history.back().test_psnr = evaluate(net, test_set).mean_psnr_db;
      if (hooks.on_step) hooks.on_step(res.history.back());
    }
    res.epochs = epoch;
  }
  net.zero_grad();
  return res;
}

double psnr(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& reference) {
  if (pred.rows() != reference.rows() || pred.cols() != reference.cols())
    throw std::invalid_argument("psnr: shape mismatch");
  if (pred.size() == 0) throw std::invalid_argument("psnr: empty images");
  const double mse = (pred - reference).squaredNorm() / static_cast<double>(pred.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double psnr(const Image& pred, const Image& reference) { return psnr(pred.pixels, reference.pixels); }

Eigen::MatrixXd predict(const TrainNetwork& net, const PreparedSample& sample) {
  return net.forward(sample.input).to_matrix().cast<double>();
}

EvalReport evaluate(const TrainNetwork& net, std::span<const PreparedSample> samples) {
  if (samples.empty()) throw std::invalid_argument("evaluate: empty split");
  EvalReport rep;
  for (const auto& s : samples) {
    const Eigen::MatrixXd pred = predict(net, s);
    if (pred.rows() != s.reference.rows() || pred.cols() != s.reference.cols())
      throw std::invalid_argument("evaluate: network output does not match the reference dims");
    rep.scenarios.push_back({s.id, psnr(pred, s.reference), psnr(s.baseline, s.reference)});
  }
  for (const auto& sc : rep.scenarios) {
    rep.mean_psnr_db += sc.psnr_db;
    rep.mean_baseline_psnr_db += sc.baseline_psnr_db;
  }
  rep.mean_psnr_db /= static_cast<double>(rep.scenarios.size());
  rep.mean_baseline_psnr_db /= static_cast<double>(rep.scenarios.size());
  return rep;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> rows) {
  auto out = open_csv(path);
  out << "step,epoch,loss,test_psnr\n";
  for (const auto& r : rows)
    out << r.step << ',' << r.epoch << ',' << fmt(r.loss) << ','
        << (r.test_psnr ? fmt(*r.test_psnr) : "") << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_eval_csv(const std::filesystem::path& path, const EvalReport& report) {
  auto out = open_csv(path);
  out << "kind,scenario,psnr_db\n";
  for (const auto& s : report.scenarios) out << "network," << s.id << ',' << fmt(s.psnr_db) << '\n';
  for (const auto& s : report.scenarios)
    out << "plain_fk," << s.id << ',' << fmt(s.baseline_psnr_db) << '\n';
  out << "network,mean," << fmt(report.mean_psnr_db) << '\n';
  out << "plain_fk,mean," << fmt(report.mean_baseline_psnr_db) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pwfk
