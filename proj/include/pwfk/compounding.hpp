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

#ifndef PWFK_COMPOUNDING_HPP
#define PWFK_COMPOUNDING_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "pwfk/acquisition.hpp"
#include "pwfk/fk_migration.hpp"

namespace pwfk {

/// Angles of a compounding sequence; weights are uniform.
struct CompoundConfig {
  std::vector<double> angles;

  /// Throws std::invalid_argument for an empty list or repeated angles.
  void validate() const;
};

/// Pixelwise arithmetic mean, accumulated in the order given.
Image coherent_compound(std::span<const Image> images);

/**
 * Migrates steered frames of one geometry and averages them. Operators are
 * built once per angle; frames are reduced in ascending angle order, so the
 * result does not depend on the order of the input.
 */
class CompoundMigrator {
 public:
  CompoundMigrator(const AcquisitionConfig& base, const CompoundConfig& angles,
                   FkOptions options = {});

  Image operator()(std::span<const RFFrame> frames) const;
  const FkOperator& operator_for(double angle) const;
  const std::vector<double>& angles() const { return angles_; }

 private:
  AcquisitionConfig base_;
  std::vector<double> angles_;  // ascending
  std::vector<FkOperator> operators_;
};

/// Throws std::invalid_argument when frames differ in anything but the angle.
Image compound_migrate(std::span<const RFFrame> frames, FkOptions options = {});

/**
 * Indices of an n-angle subset of an n_total-angle sequence, symmetric
 * about the centre element and spanning the full range. n_total and n must
 * be odd so that the centre (0 rad) is included.
 */
std::vector<std::size_t> symmetric_subset(std::size_t n_total, std::size_t n);

}  // namespace pwfk

#endif  // PWFK_COMPOUNDING_HPP
