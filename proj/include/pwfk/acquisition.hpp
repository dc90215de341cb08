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

#ifndef PWFK_ACQUISITION_HPP
#define PWFK_ACQUISITION_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace pwfk {

/**
 * Linear transducer array. Element centres are placed symmetrically about
 * x = 0: element_x(i) = (i - (n - 1) / 2) * pitch.
 */
class ArrayGeometry {
 public:
  ArrayGeometry(std::size_t n_elements, double pitch);

  std::size_t n_elements() const { return n_elements_; }
  double pitch() const { return pitch_; }
  double element_x(std::size_t i) const;
  /// Distance between the first and the last element centre.
  double aperture() const { return static_cast<double>(n_elements_ - 1) * pitch_; }
  Eigen::VectorXd element_positions() const;

  bool operator==(const ArrayGeometry&) const = default;

 private:
  std::size_t n_elements_;
  double pitch_;
};

/// Transmit pulse and receive sampling.
struct PulseSpec {
  double center_freq = 5e6;          // Hz
  double fractional_bandwidth = 0.6;  // -6 dB, relative to center_freq
  double sampling_freq = 20e6;       // Hz

  void validate() const;
  double wavelength(double c0) const { return c0 / center_freq; }

  bool operator==(const PulseSpec&) const = default;
};

struct AcquisitionConfig {
  ArrayGeometry geometry{64, 0.3e-3};
  PulseSpec pulse;
  double c0 = 1540.0;  // m/s
  double angle = 0.0;  // steering angle, rad
  std::size_t n_samples = 1024;
  double t_start = 0.0;  // time of the first sample, s

  void validate() const;
  /// Same acquisition, different steering angle.
  AcquisitionConfig with_angle(double angle_rad) const;
  double sample_period() const { return 1.0 / pulse.sampling_freq; }

  bool operator==(const AcquisitionConfig&) const = default;
};

/// Received echoes, one column per element.
struct RFFrame {
  Eigen::MatrixXd samples;  // n_samples x n_elements
  AcquisitionConfig config;

  RFFrame(Eigen::MatrixXd samples, AcquisitionConfig config);
  /// All-zero frame for the given acquisition.
  static RFFrame zeros(const AcquisitionConfig& config);
};

/// Uniformly spaced angles in [-half_span, +half_span]; {0} for one angle.
std::vector<double> angle_sequence(std::size_t n_angles, double half_span);

/**
 * Per-element firing delays that steer a plane wave by @p angle:
 * tau_i = element_x(i) * sin(angle) / c0, shifted so that the earliest
 * element fires at t = 0.
 */
Eigen::VectorXd steering_delays(const ArrayGeometry& geometry, double angle, double c0);

/// Arrival time of the steered wavefront at (x, z), consistent with steering_delays.
double transmit_time(const AcquisitionConfig& config, double x, double z);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

void to_json(nlohmann::json& j, const AcquisitionConfig& config);
void from_json(const nlohmann::json& j, AcquisitionConfig& config);

}  // namespace pwfk

#endif  // PWFK_ACQUISITION_HPP
