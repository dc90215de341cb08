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

#include "pwfk/envelope.hpp"

#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace pwfk {

Eigen::MatrixXd envelope(const Eigen::MatrixXd& image) {
  const Eigen::Index n = image.rows();
  Eigen::MatrixXd out(n, image.cols());
  if (n == 0) return out;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spec(static_cast<std::size_t>(n)), analytic(spec.size());
  std::vector<std::complex<double>> col(spec.size());
  for (Eigen::Index j = 0; j < image.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = image(i, j);
    fft.fwd(spec.data(), col.data(), n);
    // one-sided spectrum: keep DC (and Nyquist), double positive bins
    for (Eigen::Index k = 1; k < n; ++k) {
      const bool positive = 2 * k < n;
      const bool nyquist = 2 * k == n;
      auto& s = spec[static_cast<std::size_t>(k)];
      if (positive)
        s *= 2.0;
      else if (!nyquist)
        s = 0.0;
    }
    fft.inv(analytic.data(), spec.data(), n);
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = std::abs(analytic[static_cast<std::size_t>(i)]);
  }
  return out;
}

Peak find_peak(const Eigen::MatrixXd& m) {
  Peak p;
  p.value = m.maxCoeff(&p.row, &p.col);
  return p;
}

double peak_magnitude(const Eigen::MatrixXd& m) {
  const double peak = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  return peak > 0.0 ? peak : 1.0;
}

}  // namespace pwfk
