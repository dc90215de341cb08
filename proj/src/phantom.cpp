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

#include "pwfk/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

#include "pwfk/errors.hpp"

namespace pwfk {

namespace {

constexpr int kMaxPlacementAttempts = 1000;

void check_range(const Range& r, const char* name) {
  if (!(r.lo <= r.hi) || r.lo < 0.0 || !std::isfinite(r.hi))
    throw std::invalid_argument(std::string("PhantomSpec: bad range ") + name);
}

void check_range(const CountRange& r, const char* name) {
  if (r.lo > r.hi) throw std::invalid_argument(std::string("PhantomSpec: bad range ") + name);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_count(std::mt19937_64& rng, const CountRange& r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_int_distribution<std::size_t>(r.lo, r.hi)(rng);
}

bool inside(const Region& r, double x, double z) {
  const double dx = x - r.x;
  const double dz = z - r.z;
  return dx * dx + dz * dz <= r.radius * r.radius;
}

}  // namespace

void PhantomSpec::validate() const {
  if (!(width > 0.0) || !(depth > 0.0))
    throw std::invalid_argument("PhantomSpec: field of view must be positive");
  if (!(depth_start >= 0.0)) throw std::invalid_argument("PhantomSpec: depth_start must be >= 0");
  if (!(speckle_density >= 0.0))
    throw std::invalid_argument("PhantomSpec: speckle_density must be >= 0");
  check_range(speckle_amplitude, "speckle_amplitude");
  check_range(n_anechoic, "n_anechoic");
  check_range(anechoic_radius, "anechoic_radius");
  check_range(n_hyperechoic, "n_hyperechoic");
  check_range(hyperechoic_radius, "hyperechoic_radius");
  check_range(hyperechoic_gain, "hyperechoic_gain");
  check_range(n_fibre, "n_fibre");
  if (!(fibre_amplitude >= 0.0) || !(fibre_clearance >= 0.0))
    throw std::invalid_argument("PhantomSpec: fibre parameters must be >= 0");
}

std::string region_kind_name(RegionKind kind) {
  switch (kind) {
    case RegionKind::anechoic: return "anechoic";
    case RegionKind::hyperechoic: return "hyperechoic";
    case RegionKind::fibre: return "fibre";
  }
  return "unknown";
}

Phantom generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  Phantom phantom;

  const double x_lo = -0.5 * spec.width;
  const double x_hi = 0.5 * spec.width;
  const double z_lo = spec.depth_start;
  const double z_hi = spec.depth_start + spec.depth;

  const std::size_t n_an = uniform_count(rng, spec.n_anechoic);
  const std::size_t n_hyper = uniform_count(rng, spec.n_hyperechoic);
  const std::size_t n_fibre = uniform_count(rng, spec.n_fibre);

  auto place = [&](RegionKind kind, Range radius_range, double gain) {
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      const double r = uniform(rng, radius_range.lo, radius_range.hi);
      if (2.0 * r >= spec.width || 2.0 * r >= spec.depth) continue;
      Region region{kind, uniform(rng, x_lo + r, x_hi - r), uniform(rng, z_lo + r, z_hi - r), r,
                    gain};
      const bool overlaps = std::any_of(
          phantom.regions.begin(), phantom.regions.end(), [&](const Region& other) {
            return std::hypot(region.x - other.x, region.z - other.z) < region.radius + other.radius;
          });
      if (!overlaps) {
        phantom.regions.push_back(region);
        return;
      }
    }
    throw GenerationFailure("generate_phantom: cannot place " + region_kind_name(kind) +
                            " inclusion without overlap");
  };

  for (std::size_t i = 0; i < n_an; ++i) place(RegionKind::anechoic, spec.anechoic_radius, 0.0);
  for (std::size_t i = 0; i < n_hyper; ++i)
    place(RegionKind::hyperechoic, spec.hyperechoic_radius,
          uniform(rng, spec.hyperechoic_gain.lo, spec.hyperechoic_gain.hi));
  for (std::size_t i = 0; i < n_fibre; ++i)
    place(RegionKind::fibre, Range{spec.fibre_clearance, spec.fibre_clearance},
          spec.fibre_amplitude);

  const auto n_speckle =
      static_cast<std::size_t>(std::llround(spec.speckle_density * spec.width * spec.depth));
  std::bernoulli_distribution coin(0.5);
  phantom.scatterers.reserve(n_speckle + n_fibre);
  for (std::size_t i = 0; i < n_speckle; ++i) {
    Scatterer s;
    s.x = uniform(rng, x_lo, x_hi);
    s.z = uniform(rng, z_lo, z_hi);
    const double magnitude = uniform(rng, spec.speckle_amplitude.lo, spec.speckle_amplitude.hi);
    s.reflectivity = coin(rng) ? magnitude : -magnitude;
    for (const Region& r : phantom.regions) {
      if (r.kind == RegionKind::fibre || !inside(r, s.x, s.z)) continue;
      s.reflectivity *= r.gain;  // anechoic gain is 0
    }
    if (s.reflectivity != 0.0) phantom.scatterers.push_back(s);
  }
  for (const Region& r : phantom.regions)
    if (r.kind == RegionKind::fibre && r.gain != 0.0)
      phantom.scatterers.push_back(Scatterer{r.x, r.z, r.gain});
  return phantom;
}

Phantom point_phantom(double x, double z, double reflectivity) {
  Phantom p;
  p.scatterers.push_back(Scatterer{x, z, reflectivity});
  return p;
}

Eigen::MatrixXd scatterer_matrix(const Phantom& phantom) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(phantom.scatterers.size()), 3);
  for (std::size_t i = 0; i < phantom.scatterers.size(); ++i) {
    const auto& s = phantom.scatterers[i];
    m.row(static_cast<Eigen::Index>(i)) << s.x, s.z, s.reflectivity;
  }
  return m;
}

Phantom phantom_from_matrix(const Eigen::MatrixXd& m) {
  if (m.cols() != 3 && m.size() != 0)
    throw std::invalid_argument("phantom_from_matrix: expected n x 3 (x, z, reflectivity)");
  Phantom p;
  for (Eigen::Index i = 0; i < m.rows(); ++i) p.scatterers.push_back({m(i, 0), m(i, 1), m(i, 2)});
  return p;
}

Pulse::Pulse(const PulseSpec& spec) : center_freq(spec.center_freq) {
  spec.validate();
  // -6 dB amplitude half-width of the spectrum sits at fc * bw / 2
  const double neg_log_ref = -std::log(std::pow(10.0, -6.0 / 20.0));
  const double half_bw = 0.5 * spec.fractional_bandwidth * spec.center_freq;
  const double sigma_f = half_bw / std::sqrt(2.0 * neg_log_ref);
  sigma = 1.0 / (2.0 * std::numbers::pi * sigma_f);
}

double Pulse::operator()(double t) const {
  if (std::abs(t) > half_support()) return 0.0;
  return std::exp(-0.5 * t * t / (sigma * sigma)) * std::cos(2.0 * std::numbers::pi * center_freq * t);
}

RFFrame simulate_rf(const Phantom& phantom, const AcquisitionConfig& config,
                    SimulationDiagnostics* diagnostics) {
  config.validate();
  const Pulse pulse(config.pulse);
  const double fs = config.pulse.sampling_freq;
  const auto n_t = static_cast<long long>(config.n_samples);
  const auto n_x = static_cast<Eigen::Index>(config.geometry.n_elements());
  const double max_depth = 0.5 * config.c0 * (config.t_start + static_cast<double>(n_t) / fs);
  for (const auto& s : phantom.scatterers)
    if (!(s.z >= 0.0 && s.z <= max_depth) || !std::isfinite(s.x))
      throw std::invalid_argument("simulate_rf: scatterer outside the imaging depth");

  const Eigen::VectorXd ex = config.geometry.element_positions();
  Eigen::MatrixXd samples = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_t), n_x);
  SimulationDiagnostics diag;
  const double support = pulse.half_support();
  for (const auto& s : phantom.scatterers) {
    const double t_tx = transmit_time(config, s.x, s.z);
    for (Eigen::Index i = 0; i < n_x; ++i) {
      const double r = std::hypot(s.x - ex(i), s.z);
      const double arrival = t_tx + r / config.c0;
      const double amp = s.reflectivity / std::sqrt(std::max(r, 1e-6));
      const auto first =
          static_cast<long long>(std::ceil((arrival - support - config.t_start) * fs));
      const auto last =
          static_cast<long long>(std::floor((arrival + support - config.t_start) * fs));
      ++diag.contributions;
      if (first < 0 || last >= n_t) ++diag.truncated;
      for (long long n = std::max(first, 0LL); n <= std::min(last, n_t - 1); ++n) {
        const double t = config.t_start + static_cast<double>(n) / fs - arrival;
        samples(static_cast<Eigen::Index>(n), i) += amp * pulse(t);
      }
    }
  }
  if (diagnostics) *diagnostics = diag;
  return RFFrame(std::move(samples), config);
}

namespace {

const std::set<std::string> kPhantomKeys = {
    "width_m",         "depth_m",          "depth_start_m",        "speckle_density_per_m2",
    "speckle_amplitude", "n_anechoic",     "anechoic_radius_m",    "n_hyperechoic",
    "hyperechoic_radius_m", "hyperechoic_gain", "n_fibre",          "fibre_amplitude",
    "fibre_clearance_m", "seed"};

nlohmann::json pair(double lo, double hi) { return nlohmann::json::array({lo, hi}); }
nlohmann::json pair(std::size_t lo, std::size_t hi) { return nlohmann::json::array({lo, hi}); }

Range read_range(const nlohmann::json& j, const char* key, Range fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2)
    throw std::invalid_argument(std::string("phantom spec: '") + key + "' must be [lo, hi]");
  return Range{v[0].get<double>(), v[1].get<double>()};
}

CountRange read_count(const nlohmann::json& j, const char* key, CountRange fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2)
    throw std::invalid_argument(std::string("phantom spec: '") + key + "' must be [lo, hi]");
  return CountRange{v[0].get<std::size_t>(), v[1].get<std::size_t>()};
}

}  // namespace

void to_json(nlohmann::json& j, const PhantomSpec& s) {
  j = nlohmann::json{{"width_m", s.width},
                     {"depth_m", s.depth},
                     {"depth_start_m", s.depth_start},
                     {"speckle_density_per_m2", s.speckle_density},
                     {"speckle_amplitude", pair(s.speckle_amplitude.lo, s.speckle_amplitude.hi)},
                     {"n_anechoic", pair(s.n_anechoic.lo, s.n_anechoic.hi)},
                     {"anechoic_radius_m", pair(s.anechoic_radius.lo, s.anechoic_radius.hi)},
                     {"n_hyperechoic", pair(s.n_hyperechoic.lo, s.n_hyperechoic.hi)},
                     {"hyperechoic_radius_m", pair(s.hyperechoic_radius.lo, s.hyperechoic_radius.hi)},
                     {"hyperechoic_gain", pair(s.hyperechoic_gain.lo, s.hyperechoic_gain.hi)},
                     {"n_fibre", pair(s.n_fibre.lo, s.n_fibre.hi)},
                     {"fibre_amplitude", s.fibre_amplitude},
                     {"fibre_clearance_m", s.fibre_clearance},
                     {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, PhantomSpec& s) {
  if (!j.is_object()) throw std::invalid_argument("phantom spec: expected a JSON object");
  for (const auto& item : j.items())
    if (!kPhantomKeys.contains(item.key()))
      throw std::invalid_argument("phantom spec: unknown field '" + item.key() + "'");
  const PhantomSpec d;
  s.width = j.value("width_m", d.width);
  s.depth = j.value("depth_m", d.depth);
  s.depth_start = j.value("depth_start_m", d.depth_start);
  s.speckle_density = j.value("speckle_density_per_m2", d.speckle_density);
  s.speckle_amplitude = read_range(j, "speckle_amplitude", d.speckle_amplitude);
  s.n_anechoic = read_count(j, "n_anechoic", d.n_anechoic);
  s.anechoic_radius = read_range(j, "anechoic_radius_m", d.anechoic_radius);
  s.n_hyperechoic = read_count(j, "n_hyperechoic", d.n_hyperechoic);
  s.hyperechoic_radius = read_range(j, "hyperechoic_radius_m", d.hyperechoic_radius);
  s.hyperechoic_gain = read_range(j, "hyperechoic_gain", d.hyperechoic_gain);
  s.n_fibre = read_count(j, "n_fibre", d.n_fibre);
  s.fibre_amplitude = j.value("fibre_amplitude", d.fibre_amplitude);
  s.fibre_clearance = j.value("fibre_clearance_m", d.fibre_clearance);
  s.seed = j.value("seed", d.seed);
  s.validate();
}

}  // namespace pwfk
