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

#ifndef PWFK_PWF_HPP
#define PWFK_PWF_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pwfk {

// PWF array container
//
//   offset  size        field
//   0       4           magic "PWF1"
//   4       1           dtype code (0 = f32, 1 = f64, 2 = complex f32, 3 = complex f64)
//   5       1           ndim
//   6       2           reserved, zero
//   8       8 * ndim    dims, u64 little-endian
//   ...     payload     row-major little-endian values; complex values are (re, im) pairs
//
// The payload length must equal product(dims) * dtype size.

enum class PwfDtype : std::uint8_t { f32 = 0, f64 = 1, c32 = 2, c64 = 3 };

std::size_t pwf_dtype_size(PwfDtype dtype);
bool pwf_dtype_is_complex(PwfDtype dtype);
PwfDtype pwf_dtype_from_name(const std::string& name);
std::string pwf_dtype_name(PwfDtype dtype);

struct PwfArray {
  PwfDtype dtype = PwfDtype::f64;
  std::vector<std::uint64_t> dims;
  std::vector<std::byte> payload;

  std::size_t element_count() const;
  bool operator==(const PwfArray&) const = default;
};

std::vector<std::byte> encode_pwf(const PwfArray& array);
/// Throws IoError on bad magic, reserved bytes, dtype or truncated payload.
PwfArray decode_pwf(std::span<const std::byte> bytes);

void write_pwf(const std::filesystem::path& path, const PwfArray& array);
PwfArray read_pwf(const std::filesystem::path& path);

/// Real values in row-major order. Narrowing to f32 rounds to nearest.
PwfArray pwf_from_values(std::vector<std::uint64_t> dims, std::span<const double> values,
                         PwfDtype dtype = PwfDtype::f64);
std::vector<double> pwf_values(const PwfArray& array);

PwfArray pwf_from_complex(std::vector<std::uint64_t> dims,
                          std::span<const std::complex<double>> values,
                          PwfDtype dtype = PwfDtype::c64);
std::vector<std::complex<double>> pwf_complex_values(const PwfArray& array);

/// 2-D real matrix stored with dims {rows, cols}.
PwfArray pwf_from_matrix(const Eigen::MatrixXd& m, PwfDtype dtype = PwfDtype::f64);
/// Accepts ndim 2, or ndim 3 with a leading unit dimension.
Eigen::MatrixXd pwf_to_matrix(const PwfArray& array);

}  // namespace pwfk

#endif  // PWFK_PWF_HPP
