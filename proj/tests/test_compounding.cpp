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
#include <cstring>
#include <random>

#include "pwfk/compounding.hpp"
#include "pwfk/phantom.hpp"
#include "pwfk/pipeline.hpp"
#include "support.hpp"

using namespace pwfk;

namespace {

std::vector<RFFrame> steered_frames(const Phantom& ph, const AcquisitionConfig& base,
                                    const std::vector<double>& angles) {
  std::vector<RFFrame> out;
  for (double a : angles) out.push_back(simulate_rf(ph, base.with_angle(a)));
  return out;
}

Phantom test_phantom(std::uint64_t seed) {
  PhantomSpec s = test::toy_dataset_spec(1, 0, 0).phantom;
  s.seed = seed;
  return generate_phantom(s);
}

}  // namespace

TEST_CASE("coherent compound is the pixelwise mean") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<Image> ims(3);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(5, 4);
  for (auto& im : ims) {
    im.pixels = Eigen::MatrixXd::NullaryExpr(5, 4, [&] { return g(rng); });
    im.dz = 0.1;
    im.dx = 0.2;
    sum += im.pixels;
  }
  const Image c = coherent_compound(ims);
  CHECK(test::rel_diff(c.pixels, (sum / 3.0).eval()) <= 1e-15);
  CHECK(c.dz == 0.1);
  CHECK(c.dx == 0.2);
  CHECK_THROWS_AS(coherent_compound(std::span<const Image>{}), std::invalid_argument);
  ims[1].dx = 0.3;
  CHECK_THROWS_AS(coherent_compound(ims), std::invalid_argument);
}

TEST_CASE("compound migration averages per-angle migrations independent of frame order") {
  const AcquisitionConfig base = test::toy_acquisition();
  const auto angles = angle_sequence(5, deg_to_rad(16.0));
  const Phantom ph = test_phantom(2);
  std::vector<RFFrame> frames = steered_frames(ph, base, angles);
  const CompoundMigrator mig(base, CompoundConfig{angles});
  const Image c = mig(frames);

  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(64, 64);
  for (const auto& f : frames) mean += migrate(FkOperator(f.config), f).pixels;
  mean /= 5.0;
  CHECK(test::rel_diff(c.pixels, mean) <= 1e-12);

  std::reverse(frames.begin(), frames.end());
  std::swap(frames[0], frames[2]);
  const Image shuffled = mig(frames);
  CHECK(std::memcmp(shuffled.pixels.data(), c.pixels.data(), sizeof(double) * 64 * 64) == 0);
  const Image free_fn = compound_migrate(frames);
  CHECK(std::memcmp(free_fn.pixels.data(), c.pixels.data(), sizeof(double) * 64 * 64) == 0);
}

TEST_CASE("compounding rejects mixed geometries and unknown angles") {
  const AcquisitionConfig base = test::toy_acquisition();
  const auto angles = angle_sequence(3, deg_to_rad(10.0));
  const CompoundMigrator mig(base, CompoundConfig{angles});
  std::vector<RFFrame> frames = steered_frames(point_phantom(0, 4e-3), base, angles);
  AcquisitionConfig other = base.with_angle(angles[0]);
  other.c0 = 1500;
  frames.push_back(RFFrame::zeros(other));
  CHECK_THROWS_AS(mig(frames), std::invalid_argument);
  CHECK_THROWS_AS(compound_migrate(frames), std::invalid_argument);
  frames.pop_back();
  frames.push_back(RFFrame::zeros(base.with_angle(0.05)));
  CHECK_THROWS_AS(mig(frames), std::invalid_argument);
  CHECK_THROWS_AS(mig(std::span<const RFFrame>{}), std::invalid_argument);
  const CompoundConfig repeated{{0.1, 0.1}}, empty{};
  CHECK_THROWS_AS(repeated.validate(), std::invalid_argument);
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
}

TEST_CASE("symmetric subsets span the sequence around its centre") {
  CHECK(symmetric_subset(75, 1) == std::vector<std::size_t>{37});
  const auto all = symmetric_subset(75, 75);
  for (std::size_t i = 0; i < 75; ++i) CHECK(all[i] == i);
  for (std::size_t n : {5, 15, 25}) {
    const auto idx = symmetric_subset(75, n);
    REQUIRE(idx.size() == n);
    CHECK(idx.front() == 0);
    CHECK(idx.back() == 74);
    CHECK(idx[n / 2] == 37);
    for (std::size_t j = 0; j < n; ++j) CHECK(idx[j] + idx[n - 1 - j] == 74);
    CHECK(std::adjacent_find(idx.begin(), idx.end(), std::greater_equal<>()) == idx.end());
  }
  CHECK_THROWS_AS(symmetric_subset(75, 4), std::invalid_argument);
  CHECK_THROWS_AS(symmetric_subset(74, 5), std::invalid_argument);
  CHECK_THROWS_AS(symmetric_subset(5, 7), std::invalid_argument);
}

TEST_CASE("more angles bring the compound closer to the full reference") {
  const AcquisitionConfig base = test::toy_acquisition();
  const auto angles = angle_sequence(25, deg_to_rad(16.0));
  const Phantom ph = test_phantom(5);
  const auto frames = steered_frames(ph, base, angles);
  const CompoundMigrator mig(base, CompoundConfig{angles});
  const Image ref = mig(frames);
  const double peak = ref.pixels.cwiseAbs().maxCoeff();
  double last = -1;
  for (std::size_t n : {1, 5, 25}) {
    std::vector<RFFrame> sub;
    for (std::size_t k : symmetric_subset(25, n)) sub.push_back(frames[k]);
    const double p = psnr((mig(sub).pixels / peak).eval(), (ref.pixels / peak).eval());
    CAPTURE(n);
    CHECK(p > last);
    last = p;
  }
  CHECK(last == kPsnrCap);
}
