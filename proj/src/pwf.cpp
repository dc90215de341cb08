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

#include "pwfk/pwf.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "pwfk/errors.hpp"

namespace pwfk {

namespace {

constexpr char kMagic[4] = {'P', 'W', 'F', '1'};
constexpr std::size_t kHeaderSize = 8;

static_assert(std::endian::native == std::endian::little,
              "PWF I/O assumes a little-endian host");

template <typename T>
void append_le(std::vector<std::byte>& out, T value) {
  const auto* p = reinterpret_cast<const std::byte*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T load_le(const std::byte* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  return value;
}

std::uint64_t checked_count(const std::vector<std::uint64_t>& dims) {
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > UINT64_MAX / d) throw IoError("pwf: dimension product overflows");
    n *= d;
  }
  return n;
}

}  // namespace

std::size_t pwf_dtype_size(PwfDtype dtype) {
  switch (dtype) {
    case PwfDtype::f32: return 4;
    case PwfDtype::f64: return 8;
    case PwfDtype::c32: return 8;
    case PwfDtype::c64: return 16;
  }
  throw std::invalid_argument("pwf: unknown dtype");
}

bool pwf_dtype_is_complex(PwfDtype dtype) {
  return dtype == PwfDtype::c32 || dtype == PwfDtype::c64;
}

PwfDtype pwf_dtype_from_name(const std::string& name) {
  if (name == "f32") return PwfDtype::f32;
  if (name == "f64") return PwfDtype::f64;
  if (name == "c32") return PwfDtype::c32;
  if (name == "c64") return PwfDtype::c64;
  throw std::invalid_argument("pwf: unknown dtype name '" + name + "'");
}

std::string pwf_dtype_name(PwfDtype dtype) {
  switch (dtype) {
    case PwfDtype::f32: return "f32";
    case PwfDtype::f64: return "f64";
    case PwfDtype::c32: return "c32";
    case PwfDtype::c64: return "c64";
  }
  throw std::invalid_argument("pwf: unknown dtype");
}

std::size_t PwfArray::element_count() const {
  return static_cast<std::size_t>(checked_count(dims));
}

std::vector<std::byte> encode_pwf(const PwfArray& array) {
  if (array.dims.size() > 255) throw std::invalid_argument("pwf: at most 255 dimensions");
  if (array.payload.size() != array.element_count() * pwf_dtype_size(array.dtype))
    throw std::invalid_argument("pwf: payload length does not match dims");
  std::vector<std::byte> out;
  out.reserve(kHeaderSize + 8 * array.dims.size() + array.payload.size());
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  out.push_back(static_cast<std::byte>(array.dtype));
  out.push_back(static_cast<std::byte>(array.dims.size()));
  out.push_back(std::byte{0});
  out.push_back(std::byte{0});
  for (auto d : array.dims) append_le<std::uint64_t>(out, d);
  out.insert(out.end(), array.payload.begin(), array.payload.end());
  return out;
}

PwfArray decode_pwf(std::span<const std::byte> bytes) {
  if (bytes.size() < kHeaderSize) throw IoError("pwf: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("pwf: bad magic");
  const auto code = static_cast<std::uint8_t>(bytes[4]);
  if (code > 3) throw IoError("pwf: unknown dtype code " + std::to_string(code));
  if (bytes[6] != std::byte{0} || bytes[7] != std::byte{0})
    throw IoError("pwf: reserved bytes must be zero");
  PwfArray array;
  array.dtype = static_cast<PwfDtype>(code);
  const std::size_t ndim = static_cast<std::uint8_t>(bytes[5]);
  if (bytes.size() < kHeaderSize + 8 * ndim) throw IoError("pwf: truncated dims");
  array.dims.resize(ndim);
  for (std::size_t i = 0; i < ndim; ++i)
    array.dims[i] = load_le<std::uint64_t>(bytes.data() + kHeaderSize + 8 * i);
  const std::size_t offset = kHeaderSize + 8 * ndim;
  const std::uint64_t expected = checked_count(array.dims) * pwf_dtype_size(array.dtype);
  if (bytes.size() - offset != expected) throw IoError("pwf: payload length does not match dims");
  array.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return array;
}

void write_pwf(const std::filesystem::path& path, const PwfArray& array) {
  const auto bytes = encode_pwf(array);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("pwf: cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("pwf: write failed for '" + path.string() + "'");
}

PwfArray read_pwf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("pwf: cannot open '" + path.string() + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pwf(std::as_bytes(std::span<const char>(raw)));
}

PwfArray pwf_from_values(std::vector<std::uint64_t> dims, std::span<const double> values,
                         PwfDtype dtype) {
  PwfArray array;
  array.dtype = dtype;
  array.dims = std::move(dims);
  if (values.size() != array.element_count())
    throw std::invalid_argument("pwf: value count does not match dims");
  array.payload.reserve(values.size() * pwf_dtype_size(dtype));
  switch (dtype) {
    case PwfDtype::f32:
      for (double v : values) append_le<float>(array.payload, static_cast<float>(v));
      break;
    case PwfDtype::f64:
      for (double v : values) append_le<double>(array.payload, v);
      break;
    default:
      throw std::invalid_argument("pwf_from_values: dtype must be real");
  }
  return array;
}

std::vector<double> pwf_values(const PwfArray& array) {
  const std::size_t n = array.element_count();
  std::vector<double> out(n);
  switch (array.dtype) {
    case PwfDtype::f32:
      for (std::size_t i = 0; i < n; ++i) out[i] = load_le<float>(array.payload.data() + 4 * i);
      break;
    case PwfDtype::f64:
      for (std::size_t i = 0; i < n; ++i) out[i] = load_le<double>(array.payload.data() + 8 * i);
      break;
    default:
      throw std::invalid_argument("pwf_values: container holds complex values");
  }
  return out;
}

PwfArray pwf_from_complex(std::vector<std::uint64_t> dims,
                          std::span<const std::complex<double>> values, PwfDtype dtype) {
  PwfArray array;
  array.dtype = dtype;
  array.dims = std::move(dims);
  if (values.size() != array.element_count())
    throw std::invalid_argument("pwf: value count does not match dims");
  array.payload.reserve(values.size() * pwf_dtype_size(dtype));
  switch (dtype) {
    case PwfDtype::c32:
      for (const auto& v : values) {
        append_le<float>(array.payload, static_cast<float>(v.real()));
        append_le<float>(array.payload, static_cast<float>(v.imag()));
      }
      break;
    case PwfDtype::c64:
      for (const auto& v : values) {
        append_le<double>(array.payload, v.real());
        append_le<double>(array.payload, v.imag());
      }
      break;
    default:
      throw std::invalid_argument("pwf_from_complex: dtype must be complex");
  }
  return array;
}

std::vector<std::complex<double>> pwf_complex_values(const PwfArray& array) {
  const std::size_t n = array.element_count();
  std::vector<std::complex<double>> out(n);
  const std::byte* p = array.payload.data();
  switch (array.dtype) {
    case PwfDtype::c32:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = {load_le<float>(p + 8 * i), load_le<float>(p + 8 * i + 4)};
      break;
    case PwfDtype::c64:
      for (std::size_t i = 0; i < n; ++i)
        out[i] = {load_le<double>(p + 16 * i), load_le<double>(p + 16 * i + 8)};
      break;
    default:
      throw std::invalid_argument("pwf_complex_values: container holds real values");
  }
  return out;
}

PwfArray pwf_from_matrix(const Eigen::MatrixXd& m, PwfDtype dtype) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  return pwf_from_values({static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())},
                         std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())),
                         dtype);
}

Eigen::MatrixXd pwf_to_matrix(const PwfArray& array) {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  if (array.dims.size() == 2) {
    rows = array.dims[0];
    cols = array.dims[1];
  } else if (array.dims.size() == 3 && array.dims[0] == 1) {
    rows = array.dims[1];
    cols = array.dims[2];
  } else {
    throw IoError("pwf: expected a 2-D array");
  }
  const auto values = pwf_values(array);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(values.data(), static_cast<Eigen::Index>(rows),
                                    static_cast<Eigen::Index>(cols));
}

}  // namespace pwfk
