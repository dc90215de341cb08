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


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "pwfk/acquisition.hpp"
#include "pwfk/errors.hpp"
#include "pwfk/phantom.hpp"
#include "support.hpp"

using namespace pwfk;

TEST_CASE("element positions are centred on the array axis") {
  const ArrayGeometry g(5, 0.25e-3);
  CHECK(g.element_x(0) == doctest::Approx(-0.5e-3));
  CHECK(g.element_x(2) == 0.0);
  CHECK(g.element_x(4) == doctest::Approx(0.5e-3));
  CHECK(g.aperture() == doctest::Approx(1e-3));
  CHECK(g.element_positions().sum() == doctest::Approx(0.0).epsilon(1e-18));
  CHECK_THROWS_AS(g.element_x(5), std::invalid_argument);
  CHECK_THROWS_AS(ArrayGeometry(1, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(ArrayGeometry(8, 0.0), std::invalid_argument);
}

TEST_CASE("angle sequences are symmetric and uniformly spaced") {
  const auto a = angle_sequence(75, deg_to_rad(16.0));
  REQUIRE(a.size() == 75);
  CHECK(a.front() == doctest::Approx(-deg_to_rad(16.0)));
  CHECK(a.back() == doctest::Approx(deg_to_rad(16.0)));
  CHECK(a[37] == doctest::Approx(0.0).epsilon(1e-15));
  for (std::size_t i = 1; i < a.size(); ++i)
    CHECK(a[i] - a[i - 1] == doctest::Approx(deg_to_rad(32.0) / 74).epsilon(1e-12));
  CHECK(angle_sequence(1, 0.3) == std::vector<double>{0.0});
}

TEST_CASE("steering delays and transmit time describe one plane wavefront") {
  AcquisitionConfig c;
  for (double deg : {-16.0, 0.0, 9.0}) {
    c.angle = deg_to_rad(deg);
    const Eigen::VectorXd tau = steering_delays(c.geometry, c.angle, c.c0);
    CHECK(tau.minCoeff() == doctest::Approx(0.0).epsilon(1e-20));
    // each element launches the front exactly when it passes the element (z = 0)
    for (std::size_t i = 0; i < c.geometry.n_elements(); ++i)
      CHECK(transmit_time(c, c.geometry.element_x(i), 0.0) ==
            doctest::Approx(tau(static_cast<Eigen::Index>(i))).epsilon(1e-12));
    // and travels along (sin a, cos a) at c0
    const double x = 1e-3, z = 10e-3, d = 2e-3;
    const double t0 = transmit_time(c, x, z);
    const double t1 = transmit_time(c, x + d * std::sin(c.angle), z + d * std::cos(c.angle));
    CHECK((t1 - t0) == doctest::Approx(d / c.c0).epsilon(1e-12));
  }
}

TEST_CASE("acquisition validation and json round trip") {
  AcquisitionConfig c;
  c.validate();
  AcquisitionConfig bad = c;
  bad.n_samples = 8;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.c0 = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = c;
  bad.angle = 2.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(RFFrame(Eigen::MatrixXd::Zero(10, 64), c), std::invalid_argument);

  c.angle = 0.125;
  c.t_start = 1e-6;
  nlohmann::json j = c;
  CHECK(j.get<AcquisitionConfig>() == c);
  j["bogus"] = 1;
  CHECK_THROWS(j.get<AcquisitionConfig>());
}

TEST_CASE("pulse bandwidth is -6 dB at fc * (1 +- B/2)") {
  const PulseSpec spec{5e6, 0.6, 20e6};
  const Pulse p(spec);
  CHECK(p(0.0) == doctest::Approx(1.0));
  // amplitude spectrum by direct quadrature
  auto spectrum = [&](double f) {
    const double dt = 1e-10;
    std::complex<double> acc = 0;
    for (double t = -p.half_support(); t <= p.half_support(); t += dt)
      acc += p(t) * std::polar(1.0, -2 * std::numbers::pi * f * t) * dt;
    return std::abs(acc);
  };
  const double peak = spectrum(spec.center_freq);
  const double ref = std::pow(10.0, -6.0 / 20.0);
  CHECK(spectrum(spec.center_freq * 0.7) / peak == doctest::Approx(ref).epsilon(0.01));
  CHECK(spectrum(spec.center_freq * 1.3) / peak == doctest::Approx(ref).epsilon(0.01));
}

TEST_CASE("phantom generation is a pure function of the spec") {
  PhantomSpec s;
  s.seed = 42;
  const Phantom a = generate_phantom(s), b = generate_phantom(s);
  REQUIRE(a.scatterers.size() == b.scatterers.size());
  CHECK(scatterer_matrix(a) == scatterer_matrix(b));
  s.seed = 43;
  CHECK(scatterer_matrix(generate_phantom(s)) != scatterer_matrix(a));
}

TEST_CASE("phantom contents respect the recipe") {
  PhantomSpec s;
  s.n_anechoic = {2, 2};
  s.n_hyperechoic = {1, 1};
  s.n_fibre = {2, 2};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    s.seed = seed;
    const Phantom p = generate_phantom(s);
    std::size_t counts[3] = {0, 0, 0};
    for (const Region& r : p.regions) ++counts[static_cast<int>(r.kind)];
    CHECK(counts[0] == 2);
    CHECK(counts[1] == 1);
    CHECK(counts[2] == 2);
    for (std::size_t i = 0; i < p.regions.size(); ++i)
      for (std::size_t j = i + 1; j < p.regions.size(); ++j)
        CHECK(std::hypot(p.regions[i].x - p.regions[j].x, p.regions[i].z - p.regions[j].z) >=
              p.regions[i].radius + p.regions[j].radius);
    std::size_t fibres = 0;
    for (const Scatterer& sc : p.scatterers) {
      CHECK(std::abs(sc.x) <= s.width / 2);
      CHECK(sc.z >= s.depth_start);
      CHECK(sc.z <= s.depth_start + s.depth);
      if (sc.reflectivity == s.fibre_amplitude) {
        ++fibres;
        continue;
      }
      double bound = s.speckle_amplitude.hi;
      for (const Region& r : p.regions) {
        const bool inside = std::hypot(sc.x - r.x, sc.z - r.z) <= r.radius;
        if (!inside) continue;
        CHECK(r.kind != RegionKind::anechoic);  // anechoic disks are empty
        if (r.kind == RegionKind::hyperechoic) bound *= r.gain;
      }
      CHECK(std::abs(sc.reflectivity) <= bound);
    }
    CHECK(fibres == 2);
  }
  // expected speckle count, minus what the anechoic disks remove
  PhantomSpec plain;
  plain.n_anechoic = plain.n_hyperechoic = plain.n_fibre = {0, 0};
  const auto n = generate_phantom(plain).scatterers.size();
  CHECK(static_cast<double>(n) ==
        doctest::Approx(plain.speckle_density * plain.width * plain.depth).epsilon(0.01));
}

TEST_CASE("impossible inclusions raise GenerationFailure") {
  PhantomSpec s;
  s.n_anechoic = {30, 30};
  s.anechoic_radius = {2.4e-3, 2.5e-3};
  CHECK_THROWS_AS(generate_phantom(s), GenerationFailure);
  PhantomSpec bad;
  bad.width = -1;
  CHECK_THROWS_AS(generate_phantom(bad), std::invalid_argument);
}

TEST_CASE("scatterer table round trip and spec json") {
  PhantomSpec s;
  s.seed = 9;
  const Phantom p = generate_phantom(s);
  CHECK(scatterer_matrix(phantom_from_matrix(scatterer_matrix(p))) == scatterer_matrix(p));
  nlohmann::json j = s;
  CHECK(j.get<PhantomSpec>() == s);
}

TEST_CASE("a point echo arrives at the two-way travel time with 1/sqrt(r) amplitude") {
  AcquisitionConfig c;
  c.angle = deg_to_rad(7.0);
  const double x = -1e-3, z = 12e-3;
  SimulationDiagnostics diag;
  const RFFrame f = simulate_rf(point_phantom(x, z, 2.0), c, &diag);
  CHECK(diag.contributions == 64);
  CHECK(diag.truncated == 0);
  const double fs = c.pulse.sampling_freq;
  for (std::size_t i = 0; i < 64; i += 9) {
    const double r = std::hypot(x - c.geometry.element_x(i), z);
    // wavefront written out independently of transmit_time
    const double s = std::sin(c.angle);
    const double t_tx = (x * s + z * std::cos(c.angle) - c.geometry.element_positions().minCoeff() * s) / c.c0;
    const double t = t_tx + r / c.c0;
    Eigen::Index row;
    const auto col = f.samples.col(static_cast<Eigen::Index>(i));
    col.maxCoeff(&row);
    CHECK(std::abs(static_cast<double>(row) / fs - t) <= 1.0 / fs);
    // the pulse peak is 1; at 4 samples per cycle the best sample is at most an
    // eighth of a period off the carrier crest, cos(pi/4) ~ 0.71
    CHECK(col.maxCoeff() <= 2.0 / std::sqrt(r) * (1 + 1e-12));
    CHECK(col.maxCoeff() >= 2.0 / std::sqrt(r) * 0.65);
  }
}

TEST_CASE("the echo model is linear in the reflectivity distribution") {
  AcquisitionConfig c = test::toy_acquisition();
  c.angle = deg_to_rad(-12.0);
  PhantomSpec s;
  s.width = 12e-3;
  s.depth_start = 1.5e-3;
  s.depth = 5.5e-3;
  s.seed = 3;
  Phantom a = generate_phantom(s);
  s.seed = 4;
  const Phantom b = generate_phantom(s);
  const Eigen::MatrixXd fa = simulate_rf(a, c).samples, fb = simulate_rf(b, c).samples;
  a.scatterers.insert(a.scatterers.end(), b.scatterers.begin(), b.scatterers.end());
  CHECK(test::rel_diff(simulate_rf(a, c).samples, (fa + fb).eval()) <= 1e-12);
  CHECK(simulate_rf(Phantom{}, c).samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("echoes past the record end are truncated and counted") {
  AcquisitionConfig c = test::toy_acquisition();
  SimulationDiagnostics diag;
  const double z_end = c.c0 * (static_cast<double>(c.n_samples) / c.pulse.sampling_freq) / 2;
  simulate_rf(point_phantom(0.0, z_end), c, &diag);
  CHECK(diag.truncated > 0);
  CHECK(diag.truncated <= diag.contributions);
}
