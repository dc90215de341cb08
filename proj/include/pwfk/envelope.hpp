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

#ifndef PWFK_ENVELOPE_HPP
#define PWFK_ENVELOPE_HPP

#include <Eigen/Dense>

namespace pwfk {

/// Magnitude of the analytic signal along each column (the axial direction).
Eigen::MatrixXd envelope(const Eigen::MatrixXd& image);

struct Peak {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  double value = 0.0;
};

/// Location of the largest entry; ties resolve to the first in column-major order.
Peak find_peak(const Eigen::MatrixXd& m);

/// max |m|, or 1 for an all-zero matrix.
double peak_magnitude(const Eigen::MatrixXd& m);

}  // namespace pwfk

#endif  // PWFK_ENVELOPE_HPP
