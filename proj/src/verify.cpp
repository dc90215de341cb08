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


#include "pwfk/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "pwfk/compounding.hpp"
#include "pwfk/diffnet/grad_check.hpp"
#include "pwfk/envelope.hpp"
#include "pwfk/fk_migration.hpp"
#include "pwfk/phantom.hpp"
#include "pwfk/pipeline.hpp"

namespace pwfk {

namespace {

using Clock = std::chrono::steady_clock;

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename M>
M random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  M m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      if constexpr (std::is_same_v<typename M::Scalar, double>)
        m(i, j) = n(rng);
      else
        m(i, j) = {n(rng), n(rng)};
    }
  return m;
}

double real_dot(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a.conjugate().cwiseProduct(b)).real().sum();
}

}  // namespace

SuiteResult verify_adjoint(std::uint64_t seed) {
  SuiteResult r;
  r.suite = "adjoint";
  const auto t0 = Clock::now();
  constexpr double tol = 1e-10;
  double worst_full = 0.0;
  std::array<double, 5> worst_stage{};
  std::size_t cases = 0;
  for (std::size_t n : {32, 64, 128}) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      std::mt19937_64 rng(seed * 7919 + s * 131 + n);
      std::uniform_real_distribution<double> ang(-deg_to_rad(16.0), deg_to_rad(16.0));
      std::uniform_real_distribution<double> ts(0.0, 1e-6);
      AcquisitionConfig c;
      c.geometry = ArrayGeometry(n, 0.3e-3);
      c.n_samples = n;
      c.angle = ang(rng);
      c.t_start = ts(rng);
      const FkOperator op(c);
      const Eigen::MatrixXd f = random_matrix<Eigen::MatrixXd>(op.grid().n_t, op.n_x(), rng);
      const Eigen::MatrixXd u = random_matrix<Eigen::MatrixXd>(op.n_z(), op.n_x(), rng);
      const Eigen::MatrixXd bf = op.apply(f);
      const Eigen::MatrixXd btu = op.apply_adjoint(u);
      const double lhs = (bf.array() * u.array()).sum();
      const double rhs = (f.array() * btu.array()).sum();
      worst_full = std::max(worst_full, std::abs(lhs - rhs) / (bf.norm() * u.norm()));
      for (std::size_t k = 0; k < kFkStages.size(); ++k) {
        const FkStage st = kFkStages[k];
        const auto in = op.stage_input_shape(st);
        const auto out = op.stage_output_shape(st);
        const Eigen::MatrixXcd x = random_matrix<Eigen::MatrixXcd>(in[0], in[1], rng);
        const Eigen::MatrixXcd y = random_matrix<Eigen::MatrixXcd>(out[0], out[1], rng);
        const Eigen::MatrixXcd ax = op.apply_stage(st, x);
        const Eigen::MatrixXcd ahy = op.apply_stage_adjoint(st, y);
        const double e = std::abs(real_dot(ax, y) - real_dot(x, ahy)) / (ax.norm() * y.norm());
        worst_stage[k] = std::max(worst_stage[k], e);
      }
      ++cases;
    }
  }
  r.passed = worst_full <= tol;
  r.lines.push_back(format("full operator: max relative dot-product error %.3e over %zu cases (tol %.0e)",
                           worst_full, cases, tol));
  r.metrics["full"] = worst_full;
  for (std::size_t k = 0; k < kFkStages.size(); ++k) {
    const auto name = std::string(fk_stage_name(kFkStages[k]));
    r.lines.push_back(format("stage %-13s max relative error %.3e", name.c_str(), worst_stage[k]));
    r.metrics[name] = worst_stage[k];
    r.passed = r.passed && worst_stage[k] <= tol;
  }
  r.seconds = seconds_since(t0);
  r.metrics["seconds"] = r.seconds;
  return r;
}

SuiteResult verify_focus(std::uint64_t seed) {
  SuiteResult r;
  r.suite = "focus";
  const auto t0 = Clock::now();
  const AcquisitionConfig base;
  const double lambda = base.pulse.wavelength(base.c0);
  const auto angles75 = angle_sequence(75, deg_to_rad(16.0));
  const CompoundMigrator compound(base, CompoundConfig{angles75});
  const FkOperator& any = compound.operator_for(0.0);
  const double dz = any.dz(), dx = any.dx();
  const double tol_z = std::max(2 * dz, lambda), tol_x = std::max(2 * dx, lambda);

  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> ux(-3e-3, 3e-3), uz(6e-3, 20e-3);
  std::vector<std::pair<double, double>> points(20);
  for (auto& p : points) p = {ux(rng), uz(rng)};

  auto locate = [&](const Image& im) {
    const Peak p = find_peak(envelope(im.pixels));
    return std::pair<double, double>{base.geometry.element_x(static_cast<std::size_t>(p.col)),
                                     static_cast<double>(p.row) * im.dz};
  };

  bool ok = true;
  // first, middle and last angle of the sequence: -16, 0, +16 degrees
  for (std::size_t k : {std::size_t{0}, std::size_t{37}, std::size_t{74}}) {
    const double a = angles75[k];
    const double deg = rad_to_deg(a);
    const FkOperator& op = compound.operator_for(a);
    double ex = 0, ez = 0;
    for (const auto& [x, z] : points) {
      const auto [px, pz] = locate(migrate(op, simulate_rf(point_phantom(x, z), base.with_angle(a))));
      ex = std::max(ex, std::abs(px - x));
      ez = std::max(ez, std::abs(pz - z));
    }
    const bool pass = ex <= tol_x && ez <= tol_z;
    ok = ok && pass;
    r.lines.push_back(format("angle %+5.1f deg: max lateral error %.3f mm (tol %.3f), axial %.3f mm (tol %.3f) %s",
                             deg, ex * 1e3, tol_x * 1e3, ez * 1e3, tol_z * 1e3, pass ? "ok" : "FAIL"));
    r.metrics[format("angle_%+.0f", deg)] = {{"lateral_m", ex}, {"axial_m", ez}};
  }

  double cx = 0, cz = 0;
  for (const auto& [x, z] : points) {
    std::vector<RFFrame> frames;
    frames.reserve(angles75.size());
    const Phantom ph = point_phantom(x, z);
    for (double a : angles75) frames.push_back(simulate_rf(ph, base.with_angle(a)));
    const auto [px, pz] = locate(compound(frames));
    cx = std::max(cx, std::abs(px - x) / dx);
    cz = std::max(cz, std::abs(pz - z) / dz);
  }
  const bool cpass = cx <= 1.0 && cz <= 1.0;
  ok = ok && cpass;
  r.lines.push_back(format("75-angle compound: max error %.2f px lateral, %.2f px axial (tol 1 px) %s", cx,
                           cz, cpass ? "ok" : "FAIL"));
  r.metrics["compound_px"] = {{"lateral", cx}, {"axial", cz}};
  r.passed = ok;
  r.seconds = seconds_since(t0);
  r.metrics["seconds"] = r.seconds;
  return r;
}

SuiteResult verify_gradcheck(std::uint64_t seed) {
  SuiteResult r;
  r.suite = "gradcheck";
  const auto t0 = Clock::now();
  AcquisitionConfig c;
  c.geometry = ArrayGeometry(16, 0.3e-3);
  c.n_samples = 16;
  NetworkSpec spec;
  spec.pre_layers = 2;
  spec.post_layers = 2;
  spec.channels = 8;
  spec.acquisition = c;
  auto net = build_network<double>(spec, seed + 11);
  std::mt19937_64 rng(seed + 12);
  diffnet::Tensor<double> x({1, 16, 16}, random_matrix<Eigen::MatrixXd>(256, 1, rng).array());
  diffnet::GradCheckOptions opt;
  opt.seed = seed + 13;
  const auto rep = diffnet::grad_check(net, x, opt);
  r.passed = rep.passed;
  r.lines.push_back(format("parameters: %zu checked, max relative error %.3e", rep.n_params_checked,
                           rep.max_rel_error_params));
  r.lines.push_back(format("input pixels: %zu checked, max relative error %.3e", rep.n_inputs_checked,
                           rep.max_rel_error_input));
  r.lines.push_back(format("relu kinks: %zu coordinates skipped, %zu base points redrawn; tol %.0e %s",
                           rep.n_rejected, rep.n_resamples, rep.tolerance, rep.passed ? "ok" : "FAIL"));
  r.metrics = {{"max_rel_error_params", rep.max_rel_error_params},
               {"max_rel_error_input", rep.max_rel_error_input},
               {"n_params_checked", rep.n_params_checked},
               {"n_inputs_checked", rep.n_inputs_checked},
               {"n_rejected", rep.n_rejected},
               {"worst", rep.worst}};
  r.seconds = seconds_since(t0);
  r.metrics["seconds"] = r.seconds;
  return r;
}

SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed) {
  if (name == "adjoint") return verify_adjoint(seed);
  if (name == "focus") return verify_focus(seed);
  if (name == "gradcheck") return verify_gradcheck(seed);
  throw std::invalid_argument("unknown verify suite '" + name + "' (adjoint, focus, gradcheck)");
}

}  // namespace pwfk
