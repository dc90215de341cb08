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

#include "pwfk/acquisition.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

namespace pwfk {

ArrayGeometry::ArrayGeometry(std::size_t n_elements, double pitch)
    : n_elements_(n_elements), pitch_(pitch) {
  if (n_elements < 2) throw std::invalid_argument("ArrayGeometry: need at least 2 elements");
  if (!(pitch > 0.0) || !std::isfinite(pitch))
    throw std::invalid_argument("ArrayGeometry: pitch must be positive");
}

double ArrayGeometry::element_x(std::size_t i) const {
  if (i >= n_elements_) throw std::invalid_argument("ArrayGeometry: element index out of range");
  // (2i - (n-1)) / 2 keeps the positions exactly antisymmetric in floating point
  return (2.0 * static_cast<double>(i) - static_cast<double>(n_elements_ - 1)) * 0.5 * pitch_;
}

Eigen::VectorXd ArrayGeometry::element_positions() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(n_elements_));
  for (std::size_t i = 0; i < n_elements_; ++i) x(static_cast<Eigen::Index>(i)) = element_x(i);
  return x;
}

void PulseSpec::validate() const {
  if (!(center_freq > 0.0) || !(sampling_freq > 0.0))
    throw std::invalid_argument("PulseSpec: frequencies must be positive");
  if (!(fractional_bandwidth > 0.0 && fractional_bandwidth < 2.0))
    throw std::invalid_argument("PulseSpec: fractional_bandwidth must lie in (0, 2)");
  if (!(sampling_freq > 2.0 * center_freq))
    throw std::invalid_argument("PulseSpec: sampling_freq must exceed 2 * center_freq");
}

void AcquisitionConfig::validate() const {
  pulse.validate();
  if (!(c0 > 0.0) || !std::isfinite(c0))
    throw std::invalid_argument("AcquisitionConfig: c0 must be positive");
  if (!(std::abs(angle) < std::numbers::pi / 2))
    throw std::invalid_argument("AcquisitionConfig: |angle| must be below pi/2");
  if (n_samples < 16) throw std::invalid_argument("AcquisitionConfig: n_samples must be >= 16");
  if (!std::isfinite(t_start) || t_start < 0.0)
    throw std::invalid_argument("AcquisitionConfig: t_start must be finite and non-negative");
}

AcquisitionConfig AcquisitionConfig::with_angle(double angle_rad) const {
  AcquisitionConfig out = *this;
  out.angle = angle_rad;
  return out;
}

RFFrame::RFFrame(Eigen::MatrixXd samples_in, AcquisitionConfig config_in)
    : samples(std::move(samples_in)), config(std::move(config_in)) {
  config.validate();
  if (samples.rows() != static_cast<Eigen::Index>(config.n_samples) ||
      samples.cols() != static_cast<Eigen::Index>(config.geometry.n_elements()))
    throw std::invalid_argument("RFFrame: sample matrix does not match the acquisition dims");
  if (!samples.allFinite()) throw std::invalid_argument("RFFrame: non-finite samples");
}

RFFrame RFFrame::zeros(const AcquisitionConfig& config) {
  return RFFrame(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(config.n_samples),
                                       static_cast<Eigen::Index>(config.geometry.n_elements())),
                 config);
}

std::vector<double> angle_sequence(std::size_t n_angles, double half_span) {
  if (n_angles == 0) throw std::invalid_argument("angle_sequence: n_angles must be >= 1");
  if (!(half_span >= 0.0)) throw std::invalid_argument("angle_sequence: half_span must be >= 0");
  if (n_angles == 1) return {0.0};
  std::vector<double> angles(n_angles);
  const double n1 = static_cast<double>(n_angles - 1);
  // a[k] = half_span * (2k - (n-1)) / (n-1): exact negation symmetry, exact 0 at the middle
  for (std::size_t k = 0; k < n_angles; ++k)
    angles[k] = half_span * (2.0 * static_cast<double>(k) - n1) / n1;
  return angles;
}

Eigen::VectorXd steering_delays(const ArrayGeometry& geometry, double angle, double c0) {
  if (!(c0 > 0.0)) throw std::invalid_argument("steering_delays: c0 must be positive");
  const double s = std::sin(angle);
  Eigen::VectorXd tau = geometry.element_positions() * (s / c0);
  return tau.array() - tau.minCoeff();
}

double transmit_time(const AcquisitionConfig& config, double x, double z) {
  const double s = std::sin(config.angle);
  // earliest firing element sits at the end of the array that the wave leans away from
  const double offset = 0.5 * config.geometry.aperture() * std::abs(s);
  return (x * s + z * std::cos(config.angle) + offset) / config.c0;
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

namespace {

const std::set<std::string> kAcquisitionKeys = {
    "n_elements",       "pitch_m",    "center_freq_hz", "fractional_bandwidth", "sampling_freq_hz",
    "c0_m_per_s",       "angle_rad",  "n_samples",      "t_start_s"};

}  // namespace

void to_json(nlohmann::json& j, const AcquisitionConfig& c) {
  j = nlohmann::json{{"n_elements", c.geometry.n_elements()},
                     {"pitch_m", c.geometry.pitch()},
                     {"center_freq_hz", c.pulse.center_freq},
                     {"fractional_bandwidth", c.pulse.fractional_bandwidth},
                     {"sampling_freq_hz", c.pulse.sampling_freq},
                     {"c0_m_per_s", c.c0},
                     {"angle_rad", c.angle},
                     {"n_samples", c.n_samples},
                     {"t_start_s", c.t_start}};
}

void from_json(const nlohmann::json& j, AcquisitionConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("acquisition config: expected a JSON object");
  for (const auto& item : j.items())
    if (!kAcquisitionKeys.contains(item.key()))
      throw std::invalid_argument("acquisition config: unknown field '" + item.key() + "'");
  AcquisitionConfig d;  // missing fields keep the defaults
  const auto n_el = j.value("n_elements", d.geometry.n_elements());
  const auto pitch = j.value("pitch_m", d.geometry.pitch());
  c.geometry = ArrayGeometry(n_el, pitch);
  c.pulse.center_freq = j.value("center_freq_hz", d.pulse.center_freq);
  c.pulse.fractional_bandwidth = j.value("fractional_bandwidth", d.pulse.fractional_bandwidth);
  c.pulse.sampling_freq = j.value("sampling_freq_hz", d.pulse.sampling_freq);
  c.c0 = j.value("c0_m_per_s", d.c0);
  c.angle = j.value("angle_rad", d.angle);
  c.n_samples = j.value("n_samples", d.n_samples);
  c.t_start = j.value("t_start_s", d.t_start);
  c.validate();
}

}  // namespace pwfk
