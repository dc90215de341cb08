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

#include "pwfk/compounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pwfk {

namespace {

bool same_geometry(const AcquisitionConfig& a, const AcquisitionConfig& b) {
  return a.with_angle(0.0) == b.with_angle(0.0);
}

}  // namespace

void CompoundConfig::validate() const {
  if (angles.empty()) throw std::invalid_argument("CompoundConfig: empty angle list");
  std::vector<double> sorted = angles;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("CompoundConfig: angles must be distinct");
}

Image coherent_compound(std::span<const Image> images) {
  if (images.empty()) throw std::invalid_argument("coherent_compound: no images");
  const Image& first = images.front();
  Image out{Eigen::MatrixXd::Zero(first.rows(), first.cols()), first.dz, first.dx};
  for (const Image& im : images) {
    if (im.rows() != first.rows() || im.cols() != first.cols() || im.dz != first.dz ||
        im.dx != first.dx)
      throw std::invalid_argument("coherent_compound: images differ in dims or spacing");
    out.pixels += im.pixels;
  }
  out.pixels /= static_cast<double>(images.size());
  return out;
}

CompoundMigrator::CompoundMigrator(const AcquisitionConfig& base, const CompoundConfig& config,
                                   FkOptions options)
    : base_(base.with_angle(0.0)), angles_(config.angles) {
  config.validate();
  std::sort(angles_.begin(), angles_.end());
  operators_.reserve(angles_.size());
  for (double a : angles_) operators_.emplace_back(base_.with_angle(a), options);
}

const FkOperator& CompoundMigrator::operator_for(double angle) const {
  const auto it = std::lower_bound(angles_.begin(), angles_.end(), angle);
  if (it == angles_.end() || *it != angle)
    throw std::invalid_argument("CompoundMigrator: no operator for the requested angle");
  return operators_[static_cast<std::size_t>(it - angles_.begin())];
}

Image CompoundMigrator::operator()(std::span<const RFFrame> frames) const {
  if (frames.empty()) throw std::invalid_argument("compound_migrate: no frames");
  std::vector<std::size_t> order(frames.size());
  std::iota(order.begin(), order.end(), 0);
  for (const auto& f : frames)
    if (!same_geometry(f.config, base_))
      throw std::invalid_argument("compound_migrate: frames mix acquisition geometries");
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return frames[a].config.angle < frames[b].config.angle;
  });
  std::vector<Image> images;
  images.reserve(frames.size());
  for (std::size_t k : order) images.push_back(migrate(operator_for(frames[k].config.angle), frames[k]));
  return coherent_compound(images);
}

Image compound_migrate(std::span<const RFFrame> frames, FkOptions options) {
  if (frames.empty()) throw std::invalid_argument("compound_migrate: no frames");
  CompoundConfig config;
  for (const auto& f : frames) {
    if (!same_geometry(f.config, frames.front().config))
      throw std::invalid_argument("compound_migrate: frames mix acquisition geometries");
    config.angles.push_back(f.config.angle);
  }
  return CompoundMigrator(frames.front().config, config, options)(frames);
}

std::vector<std::size_t> symmetric_subset(std::size_t n_total, std::size_t n) {
  if (n_total % 2 == 0 || n % 2 == 0 || n == 0 || n > n_total)
    throw std::invalid_argument("symmetric_subset: need odd 0 < n <= n_total");
  const std::size_t centre = n_total / 2;
  if (n == 1) return {centre};
  const std::size_t half = n / 2;
  const double step = static_cast<double>(centre) / static_cast<double>(half);
  std::vector<std::size_t> idx(n);
  for (std::size_t j = 0; j <= half; ++j) {
    const auto off = static_cast<std::size_t>(std::llround(step * static_cast<double>(j)));
    idx[half + j] = centre + off;
    idx[half - j] = centre - off;
  }
  return idx;
}

}  // namespace pwfk
