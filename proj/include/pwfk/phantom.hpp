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

#ifndef PWFK_PHANTOM_HPP
#define PWFK_PHANTOM_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pwfk/acquisition.hpp"

namespace pwfk {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

struct CountRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool operator==(const CountRange&) const = default;
};

/**
 * Random phantom recipe. The field of view spans x in [-width/2, width/2]
 * and z in [depth_start, depth_start + depth]. Reflectivities stand in for
 * speed-of-sound contrast: background speckle is drawn from
 * speckle_amplitude, hyper-echoic disks multiply it by a gain, anechoic
 * disks are empty and each fibre is one strong point.
 */
struct PhantomSpec {
  double width = 12e-3;        // m
  double depth = 20e-3;        // m
  double depth_start = 5e-3;   // m
  double speckle_density = 5e6;  // scatterers / m^2
  /// Speckle magnitude range; each speckle scatterer also gets a random sign.
  Range speckle_amplitude{0.0, 1.0};
  CountRange n_anechoic{0, 2};
  Range anechoic_radius{1e-3, 2.5e-3};
  CountRange n_hyperechoic{0, 2};
  Range hyperechoic_radius{1e-3, 2.5e-3};
  Range hyperechoic_gain{2.0, 5.0};
  CountRange n_fibre{0, 3};
  double fibre_amplitude = 10.0;
  /// Exclusion radius around a fibre when placing other inclusions.
  double fibre_clearance = 0.5e-3;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const PhantomSpec&) const = default;
};

enum class RegionKind { anechoic, hyperechoic, fibre };

std::string region_kind_name(RegionKind kind);

struct Region {
  RegionKind kind = RegionKind::anechoic;
  double x = 0.0;
  double z = 0.0;
  double radius = 0.0;
  double gain = 1.0;
};

struct Scatterer {
  double x = 0.0;
  double z = 0.0;
  double reflectivity = 0.0;
};

struct Phantom {
  std::vector<Scatterer> scatterers;
  std::vector<Region> regions;
};

/// Throws GenerationFailure when an inclusion cannot be placed in 1000 attempts.
Phantom generate_phantom(const PhantomSpec& spec);

/// Phantom with a single point scatterer.
Phantom point_phantom(double x, double z, double reflectivity = 1.0);

/// Scatterer table as an n x 3 matrix of (x, z, reflectivity).
Eigen::MatrixXd scatterer_matrix(const Phantom& phantom);
Phantom phantom_from_matrix(const Eigen::MatrixXd& m);

/**
 * Gaussian-modulated sinusoid exp(-t^2 / (2 sigma^2)) cos(2 pi fc t), with
 * sigma set by the -6 dB fractional bandwidth and support truncated to
 * +-3 sigma.
 */
struct Pulse {
  double center_freq = 0.0;
  double sigma = 0.0;

  explicit Pulse(const PulseSpec& spec);
  double half_support() const { return 3.0 * sigma; }
  double operator()(double t) const;
};

struct SimulationDiagnostics {
  std::size_t contributions = 0;  // scatterer-element pairs deposited
  std::size_t truncated = 0;      // pairs whose pulse was cut by the time window
};

/**
 * Single-scattering (Born) echo model. For scatterer s and element i the
 * echo arrives at transmit_time(x_s, z_s) + |p_s - e_i| / c0 and carries
 * reflectivity / sqrt(|p_s - e_i|). Pulses reaching past either end of the
 * record are truncated and counted in @p diagnostics.
 */
RFFrame simulate_rf(const Phantom& phantom, const AcquisitionConfig& config,
                    SimulationDiagnostics* diagnostics = nullptr);

void to_json(nlohmann::json& j, const PhantomSpec& spec);
void from_json(const nlohmann::json& j, PhantomSpec& spec);

}  // namespace pwfk

#endif  // PWFK_PHANTOM_HPP
