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

#include "pwfk/fk_migration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/FFT>

namespace pwfk {

FkStage fk_stage_from_name(std::string_view name) {
  for (FkStage s : kFkStages)
    if (fk_stage_name(s) == name) return s;
  throw std::invalid_argument("unknown FK stage '" + std::string(name) + "'");
}

std::string_view fk_stage_name(FkStage stage) {
  switch (stage) {
    case FkStage::axial_fft: return "axial_fft";
    case FkStage::steer_phase: return "steer_phase";
    case FkStage::lateral_fft: return "lateral_fft";
    case FkStage::stolt_remap: return "stolt_remap";
    case FkStage::inverse_fft2: return "inverse_fft2";
  }
  throw std::invalid_argument("unknown FK stage id " + std::to_string(static_cast<int>(stage)));
}

Eigen::VectorXd fft_frequencies(std::size_t n, double sample_spacing) {
  Eigen::VectorXd f(static_cast<Eigen::Index>(n));
  const double scale = 1.0 / (static_cast<double>(n) * sample_spacing);
  const std::size_t n_pos = (n - 1) / 2 + 1;
  for (std::size_t k = 0; k < n; ++k) {
    const double signed_k = k < n_pos ? static_cast<double>(k)
                                      : static_cast<double>(k) - static_cast<double>(n);
    f(static_cast<Eigen::Index>(k)) = signed_k * scale;
  }
  return f;
}

double StoltMapping::source_frequency(double kx, double kz) const {
  const double k = erm_kz(kx, kz);
  const double mag = c_hat * std::sqrt(kx * kx + k * k);
  return k < 0.0 ? -mag : mag;
}

double StoltMapping::amplitude(double kx, double kz) const {
  const double k = erm_kz(kx, kz);
  if (k == 0.0) return 0.0;
  return amplitude_scale * std::abs(k) / std::sqrt(kx * kx + k * k);
}

bool StoltMapping::evanescent(double f, double kx) const {
  return std::abs(f) < c_hat * std::abs(kx);
}

StoltMapping stolt_mapping(const AcquisitionConfig& config) {
  const double cos_a = std::cos(config.angle);
  StoltMapping m;
  m.c_hat = config.c0 / (std::numbers::sqrt2 * cos_a * cos_a);
  m.depth_scale = std::numbers::sqrt2 / cos_a;
  m.lateral_shear = std::tan(config.angle);
  // keeps the Jacobian of the depth rescaling relative to the unsteered wave
  m.amplitude_scale = cos_a;
  return m;
}

template <typename Scalar>
RemapTable<Scalar> build_remap_table(const StoltMapping& mapping, const Eigen::VectorXd& freqs,
                                     const Eigen::VectorXd& kx, const Eigen::VectorXd& kz) {
  const Eigen::Index n_f = freqs.size();
  if (n_f < 2 || kz.size() < 1 || kx.size() < 1)
    throw std::invalid_argument("build_remap_table: empty grid");
  const double df = freqs(1) - freqs(0);
  // taps stay strictly below the Nyquist bin, whose sign is ambiguous
  const double max_bin = static_cast<double>((n_f - 1) / 2);

  RemapTable<Scalar> t;
  t.n_rows = kz.size();
  t.n_cols = kx.size();
  const auto n = static_cast<std::size_t>(t.n_rows * t.n_cols);
  t.tap0.assign(n, -1);
  t.tap1.assign(n, -1);
  t.w0.assign(n, Scalar(0));
  t.w1.assign(n, Scalar(0));
  t.source_freq.assign(n, 0.0);

  auto row_of = [n_f](long long signed_bin) {
    return static_cast<std::int32_t>(signed_bin >= 0 ? signed_bin : signed_bin + n_f);
  };

  for (Eigen::Index j = 0; j < t.n_cols; ++j) {
    for (Eigen::Index m = 0; m < t.n_rows; ++m) {
      const auto e = static_cast<std::size_t>(j * t.n_rows + m);
      const double a = mapping.amplitude(kx(j), kz(m));
      if (a == 0.0) continue;
      const double f = mapping.source_frequency(kx(j), kz(m));
      const double p = f / df;
      if (p < -max_bin || p > max_bin) continue;
      t.source_freq[e] = f;
      const double lo = std::floor(p);
      const double w = p - lo;
      const auto l = static_cast<long long>(lo);
      if (!mapping.evanescent(static_cast<double>(l) * df, kx(j))) {
        t.tap0[e] = row_of(l);
        t.w0[e] = static_cast<Scalar>(a * (1.0 - w));
      }
      if (w > 0.0 && !mapping.evanescent(static_cast<double>(l + 1) * df, kx(j))) {
        t.tap1[e] = row_of(l + 1);
        t.w1[e] = static_cast<Scalar>(a * w);
      }
    }
  }
  return t;
}

template <typename Scalar>
ComplexMatrixT<Scalar> remap_gather(const RemapTable<Scalar>& t, const ComplexMatrixT<Scalar>& in) {
  if (in.rows() != t.n_rows || in.cols() != t.n_cols)
    throw std::invalid_argument("remap_gather: input shape does not match the table");
  ComplexMatrixT<Scalar> out = ComplexMatrixT<Scalar>::Zero(t.n_rows, t.n_cols);
  for (Eigen::Index j = 0; j < t.n_cols; ++j) {
    for (Eigen::Index m = 0; m < t.n_rows; ++m) {
      const auto e = static_cast<std::size_t>(j * t.n_rows + m);
      std::complex<Scalar> acc(0);
      if (t.tap0[e] >= 0) acc += t.w0[e] * in(t.tap0[e], j);
      if (t.tap1[e] >= 0) acc += t.w1[e] * in(t.tap1[e], j);
      out(m, j) = acc;
    }
  }
  return out;
}

template <typename Scalar>
ComplexMatrixT<Scalar> remap_scatter(const RemapTable<Scalar>& t,
                                     const ComplexMatrixT<Scalar>& in) {
  if (in.rows() != t.n_rows || in.cols() != t.n_cols)
    throw std::invalid_argument("remap_scatter: input shape does not match the table");
  ComplexMatrixT<Scalar> out = ComplexMatrixT<Scalar>::Zero(t.n_rows, t.n_cols);
  for (Eigen::Index j = 0; j < t.n_cols; ++j) {
    for (Eigen::Index m = 0; m < t.n_rows; ++m) {
      const auto e = static_cast<std::size_t>(j * t.n_rows + m);
      if (t.tap0[e] >= 0) out(t.tap0[e], j) += t.w0[e] * in(m, j);
      if (t.tap1[e] >= 0) out(t.tap1[e], j) += t.w1[e] * in(m, j);
    }
  }
  return out;
}

namespace {

// kissfft caches twiddles per length and keeps scratch buffers, so one engine
// per thread lets a const operator be shared.
template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  thread_local Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::Unscaled);
  fft.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum);  // only affects real -> complex
  return fft;
}

// Unscaled transforms: forward is W, inverse is W^H.
template <typename Scalar>
void fft_columns(ComplexMatrixT<Scalar>& m, bool conjugate_transpose) {
  auto& fft = fft_engine<Scalar>();
  std::vector<std::complex<Scalar>> buf(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (conjugate_transpose)
      fft.inv(buf.data(), m.col(j).data(), m.rows());
    else
      fft.fwd(buf.data(), m.col(j).data(), m.rows());
    std::copy(buf.begin(), buf.end(), m.col(j).data());
  }
}

template <typename Scalar>
void fft_rows(ComplexMatrixT<Scalar>& m, bool conjugate_transpose) {
  // contiguous columns are much cheaper to transform than strided rows
  ComplexMatrixT<Scalar> t = m.transpose();
  fft_columns<Scalar>(t, conjugate_transpose);
  m = t.transpose();
}

template <typename Scalar>
ComplexMatrixT<Scalar> zero_pad(const ComplexMatrixT<Scalar>& in, Eigen::Index rows,
                                Eigen::Index cols) {
  ComplexMatrixT<Scalar> out = ComplexMatrixT<Scalar>::Zero(rows, cols);
  out.topLeftCorner(in.rows(), in.cols()) = in;
  return out;
}

}  // namespace

template <typename Scalar>
FkMigrationOperator<Scalar>::FkMigrationOperator(const AcquisitionConfig& config, FkOptions options)
    : config_(config), options_(options) {
  config_.validate();
  if (options_.axial_pad < 1 || options_.lateral_pad < 1)
    throw std::invalid_argument("FkMigrationOperator: padding factors must be >= 1");

  const double fs = config_.pulse.sampling_freq;
  dz_ = config_.c0 / (2.0 * fs);

  grid_.n_t = config_.n_samples;
  grid_.n_x = config_.geometry.n_elements();
  grid_.n_t_fft = grid_.n_t * options_.axial_pad;
  grid_.n_x_fft = grid_.n_x * options_.lateral_pad;
  grid_.freqs = fft_frequencies(grid_.n_t_fft, 1.0 / fs);
  grid_.kx = fft_frequencies(grid_.n_x_fft, config_.geometry.pitch());
  grid_.kz = fft_frequencies(grid_.n_t_fft, dz_);

  mapping_ = stolt_mapping(config_);
  remap_ = build_remap_table<Scalar>(mapping_, grid_.freqs, grid_.kx, grid_.kz);

  const Eigen::VectorXd tau = steering_delays(config_.geometry, config_.angle, config_.c0);
  const auto n_t_fft = static_cast<Eigen::Index>(grid_.n_t_fft);
  const auto n_x = static_cast<Eigen::Index>(grid_.n_x);
  steer_phase_.resize(n_t_fft, n_x);
  for (Eigen::Index i = 0; i < n_x; ++i) {
    const double shift = tau(i) - config_.t_start;
    for (Eigen::Index k = 0; k < n_t_fft; ++k) {
      if (shift == 0.0) {
        steer_phase_(k, i) = Complex(1);
        continue;
      }
      const double phi = 2.0 * std::numbers::pi * grid_.freqs(k) * shift;
      steer_phase_(k, i) = Complex(static_cast<Scalar>(std::cos(phi)),
                                   static_cast<Scalar>(std::sin(phi)));
    }
  }
}

template <typename Scalar>
std::array<Eigen::Index, 2> FkMigrationOperator<Scalar>::stage_input_shape(FkStage stage) const {
  const auto nt = static_cast<Eigen::Index>(grid_.n_t);
  const auto nx = static_cast<Eigen::Index>(grid_.n_x);
  const auto ntf = static_cast<Eigen::Index>(grid_.n_t_fft);
  const auto nxf = static_cast<Eigen::Index>(grid_.n_x_fft);
  switch (stage) {
    case FkStage::axial_fft: return {nt, nx};
    case FkStage::steer_phase: return {ntf, nx};
    case FkStage::lateral_fft: return {ntf, nx};
    case FkStage::stolt_remap: return {ntf, nxf};
    case FkStage::inverse_fft2: return {ntf, nxf};
  }
  throw std::invalid_argument("unknown FK stage");
}

template <typename Scalar>
std::array<Eigen::Index, 2> FkMigrationOperator<Scalar>::stage_output_shape(FkStage stage) const {
  switch (stage) {
    case FkStage::axial_fft: return stage_input_shape(FkStage::steer_phase);
    case FkStage::steer_phase: return stage_input_shape(FkStage::lateral_fft);
    case FkStage::lateral_fft: return stage_input_shape(FkStage::stolt_remap);
    case FkStage::stolt_remap: return stage_input_shape(FkStage::inverse_fft2);
    case FkStage::inverse_fft2: return {n_z(), n_x()};
  }
  throw std::invalid_argument("unknown FK stage");
}

template <typename Scalar>
void FkMigrationOperator<Scalar>::check_shape(FkStage stage, const ComplexMatrix& in,
                                             bool adjoint) const {
  const auto shape = adjoint ? stage_output_shape(stage) : stage_input_shape(stage);
  if (in.rows() != shape[0] || in.cols() != shape[1])
    throw std::invalid_argument(std::string("FK stage '") + std::string(fk_stage_name(stage)) +
                                "': got " + std::to_string(in.rows()) + "x" +
                                std::to_string(in.cols()) + ", expected " +
                                std::to_string(shape[0]) + "x" + std::to_string(shape[1]));
}

template <typename Scalar>
auto FkMigrationOperator<Scalar>::apply_stage(FkStage stage, const ComplexMatrix& in) const
    -> ComplexMatrix {
  check_shape(stage, in, false);
  const auto ntf = static_cast<Eigen::Index>(grid_.n_t_fft);
  const auto nxf = static_cast<Eigen::Index>(grid_.n_x_fft);
  switch (stage) {
    case FkStage::axial_fft: {
      ComplexMatrix out = zero_pad<Scalar>(in, ntf, in.cols());
      fft_columns<Scalar>(out, false);
      return out;
    }
    case FkStage::steer_phase:
      return in.cwiseProduct(steer_phase_);
    case FkStage::lateral_fft: {
      ComplexMatrix out = zero_pad<Scalar>(in, in.rows(), nxf);
      fft_rows<Scalar>(out, false);
      return out;
    }
    case FkStage::stolt_remap:
      return remap_gather(remap_, in);
    case FkStage::inverse_fft2: {
      // only the rows that survive the crop need the lateral transform
      ComplexMatrix out = in;
      fft_columns<Scalar>(out, true);
      ComplexMatrix top = out.topRows(n_z());
      fft_rows<Scalar>(top, true);
      const Scalar norm = Scalar(1) / static_cast<Scalar>(ntf * nxf);
      return top.leftCols(n_x()) * norm;
    }
  }
  throw std::invalid_argument("unknown FK stage");
}

template <typename Scalar>
auto FkMigrationOperator<Scalar>::apply_stage_adjoint(FkStage stage, const ComplexMatrix& in) const
    -> ComplexMatrix {
  check_shape(stage, in, true);
  const auto ntf = static_cast<Eigen::Index>(grid_.n_t_fft);
  const auto nxf = static_cast<Eigen::Index>(grid_.n_x_fft);
  switch (stage) {
    case FkStage::axial_fft: {
      ComplexMatrix out = in;
      fft_columns<Scalar>(out, true);
      return out.topRows(static_cast<Eigen::Index>(grid_.n_t));
    }
    case FkStage::steer_phase:
      return in.cwiseProduct(steer_phase_.conjugate());
    case FkStage::lateral_fft: {
      ComplexMatrix out = in;
      fft_rows<Scalar>(out, true);
      return out.leftCols(static_cast<Eigen::Index>(grid_.n_x));
    }
    case FkStage::stolt_remap:
      return remap_scatter(remap_, in);
    case FkStage::inverse_fft2: {
      ComplexMatrix top = zero_pad<Scalar>(in, n_z(), nxf);
      fft_rows<Scalar>(top, false);
      ComplexMatrix out = zero_pad<Scalar>(top, ntf, nxf);
      fft_columns<Scalar>(out, false);
      const Scalar norm = Scalar(1) / static_cast<Scalar>(ntf * nxf);
      return out * norm;
    }
  }
  throw std::invalid_argument("unknown FK stage");
}

namespace {

// dst.topLeftCorner(cols, rows) = src.topLeftCorner(rows, cols)^T, in tiles so
// neither side is walked with a full-column stride
template <typename Scalar>
void transpose_into(const ComplexMatrixT<Scalar>& src, Eigen::Index rows, Eigen::Index cols,
                    ComplexMatrixT<Scalar>& dst) {
  constexpr Eigen::Index tile = 32;
  for (Eigen::Index j0 = 0; j0 < cols; j0 += tile)
    for (Eigen::Index i0 = 0; i0 < rows; i0 += tile) {
      const Eigen::Index j1 = std::min(cols, j0 + tile), i1 = std::min(rows, i0 + tile);
      for (Eigen::Index j = j0; j < j1; ++j)
        for (Eigen::Index i = i0; i < i1; ++i) dst(j, i) = src(i, j);
    }
}

// in-place unscaled transforms of the first n columns
template <typename Scalar>
void fft_leading_columns(ComplexMatrixT<Scalar>& m, Eigen::Index n, bool inverse) {
  auto& fft = fft_engine<Scalar>();
  std::vector<std::complex<Scalar>> buf(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index j = 0; j < n; ++j) {
    if (inverse)
      fft.inv(buf.data(), m.col(j).data(), m.rows());
    else
      fft.fwd(buf.data(), m.col(j).data(), m.rows());
    std::copy(buf.begin(), buf.end(), m.col(j).data());
  }
}

}  // namespace

// apply / apply_adjoint do not run the stage chain. Both ends of the operator
// are real, so the spectra are Hermitian and only the axial bins
// 0..n_t_fft/2 are transformed; the other half is read through the mirror
// X(-k, -l) = conj X(k, l). Equal to the stage chain up to rounding.
template <typename Scalar>
auto FkMigrationOperator<Scalar>::apply(const Eigen::Ref<const RealMatrix>& data) const
    -> RealMatrix {
  if (data.rows() != static_cast<Eigen::Index>(grid_.n_t) ||
      data.cols() != static_cast<Eigen::Index>(grid_.n_x))
    throw std::invalid_argument("FK migrate: data is " + std::to_string(data.rows()) + "x" +
                                std::to_string(data.cols()) + ", operator expects " +
                                std::to_string(grid_.n_t) + "x" + std::to_string(grid_.n_x));
  const Eigen::Index nt = data.rows(), nx = data.cols();
  const auto ntf = static_cast<Eigen::Index>(grid_.n_t_fft);
  const auto nxf = static_cast<Eigen::Index>(grid_.n_x_fft);
  const Eigen::Index half = ntf / 2 + 1;
  auto& fft = fft_engine<Scalar>();

  // axial transform and steering, (k, element)
  ComplexMatrix steered(half, nx);
  {
    std::vector<Scalar> trace(static_cast<std::size_t>(ntf), Scalar(0));
    for (Eigen::Index i = 0; i < nx; ++i) {
      for (Eigen::Index t = 0; t < nt; ++t) trace[static_cast<std::size_t>(t)] = data(t, i);
      fft.fwd(steered.col(i).data(), trace.data(), ntf);
      steered.col(i).array() *= steer_phase_.col(i).head(half).array();
    }
  }
  // lateral transform runs along contiguous columns of the transposed spectrum
  ComplexMatrix rows_kx = ComplexMatrix::Zero(nxf, half);
  transpose_into<Scalar>(steered, half, nx, rows_kx);
  fft_leading_columns<Scalar>(rows_kx, half, false);
  ComplexMatrix spec(half, nxf);
  transpose_into<Scalar>(rows_kx, nxf, half, spec);

  ComplexMatrix remapped(ntf, nxf);
  for (Eigen::Index l = 0; l < nxf; ++l) {
    const Eigen::Index lm = (nxf - l) % nxf;
    for (Eigen::Index m = 0; m < ntf; ++m) {
      const auto e = static_cast<std::size_t>(l * ntf + m);
      Complex acc(0);
      for (int tap = 0; tap < 2; ++tap) {
        const std::int32_t k = tap == 0 ? remap_.tap0[e] : remap_.tap1[e];
        if (k < 0) continue;
        const Scalar w = tap == 0 ? remap_.w0[e] : remap_.w1[e];
        acc += w * (k < half ? spec(k, l) : std::conj(spec(ntf - k, lm)));
      }
      remapped(m, l) = acc;
    }
  }

  // Re(ifft2(X)) is the ifft2 of the Hermitian part of X
  ComplexMatrix herm(half, nxf);
  for (Eigen::Index l = 0; l < nxf; ++l) {
    const Eigen::Index lm = (nxf - l) % nxf;
    for (Eigen::Index m = 0; m < half; ++m)
      herm(m, l) = Scalar(0.5) * (remapped(m, l) + std::conj(remapped((ntf - m) % ntf, lm)));
  }
  ComplexMatrix herm_t(nxf, half);
  transpose_into<Scalar>(herm, half, nxf, herm_t);
  fft_leading_columns<Scalar>(herm_t, half, true);
  ComplexMatrix lines(half, nx);
  transpose_into<Scalar>(herm_t, nx, half, lines);

  const Scalar norm = Scalar(1) / static_cast<Scalar>(ntf * nxf);
  RealMatrix out(n_z(), nx);
  std::vector<Scalar> column(static_cast<std::size_t>(ntf));
  for (Eigen::Index x = 0; x < nx; ++x) {
    fft.inv(column.data(), lines.col(x).data(), ntf);
    for (Eigen::Index m = 0; m < n_z(); ++m) out(m, x) = column[static_cast<std::size_t>(m)] * norm;
  }
  return out;
}

template <typename Scalar>
auto FkMigrationOperator<Scalar>::apply_adjoint(const Eigen::Ref<const RealMatrix>& image) const
    -> RealMatrix {
  if (image.rows() != n_z() || image.cols() != n_x())
    throw std::invalid_argument("FK adjoint: image is " + std::to_string(image.rows()) + "x" +
                                std::to_string(image.cols()) + ", operator expects " +
                                std::to_string(n_z()) + "x" + std::to_string(n_x()));
  const Eigen::Index nz = n_z(), nx = n_x();
  const auto nt = static_cast<Eigen::Index>(grid_.n_t);
  const auto ntf = static_cast<Eigen::Index>(grid_.n_t_fft);
  const auto nxf = static_cast<Eigen::Index>(grid_.n_x_fft);
  const Eigen::Index half = ntf / 2 + 1;
  auto& fft = fft_engine<Scalar>();
  const Scalar norm = Scalar(1) / static_cast<Scalar>(ntf * nxf);

  // 2-D spectrum of the zero-padded image
  ComplexMatrix axial(half, nx);
  {
    std::vector<Scalar> column(static_cast<std::size_t>(ntf), Scalar(0));
    for (Eigen::Index x = 0; x < nx; ++x) {
      for (Eigen::Index m = 0; m < nz; ++m) column[static_cast<std::size_t>(m)] = image(m, x) * norm;
      fft.fwd(axial.col(x).data(), column.data(), ntf);
    }
  }
  ComplexMatrix rows_kx = ComplexMatrix::Zero(nxf, half);
  transpose_into<Scalar>(axial, half, nx, rows_kx);
  fft_leading_columns<Scalar>(rows_kx, half, false);
  ComplexMatrix spec(half, nxf);
  transpose_into<Scalar>(rows_kx, nxf, half, spec);

  ComplexMatrix gathered = ComplexMatrix::Zero(ntf, nxf);
  for (Eigen::Index l = 0; l < nxf; ++l) {
    const Eigen::Index lm = (nxf - l) % nxf;
    for (Eigen::Index m = 0; m < ntf; ++m) {
      const auto e = static_cast<std::size_t>(l * ntf + m);
      if (remap_.tap0[e] < 0 && remap_.tap1[e] < 0) continue;
      const Complex v = m < half ? spec(m, l) : std::conj(spec(ntf - m, lm));
      if (remap_.tap0[e] >= 0) gathered(remap_.tap0[e], l) += remap_.w0[e] * v;
      if (remap_.tap1[e] >= 0) gathered(remap_.tap1[e], l) += remap_.w1[e] * v;
    }
  }

  // Taking the Hermitian part commutes with the lateral transform and the
  // conjugate steering phase, except at the Nyquist bin, whose phase is not
  // mirrored; there the real part is taken after the phase instead.
  const Eigen::Index nyquist = ntf % 2 == 0 ? ntf / 2 : -1;
  ComplexMatrix herm(half, nxf);
  for (Eigen::Index l = 0; l < nxf; ++l) {
    const Eigen::Index lm = (nxf - l) % nxf;
    for (Eigen::Index k = 0; k < half; ++k)
      herm(k, l) = k == nyquist
                       ? gathered(k, l)
                       : Scalar(0.5) * (gathered(k, l) + std::conj(gathered((ntf - k) % ntf, lm)));
  }
  ComplexMatrix herm_t(nxf, half);
  transpose_into<Scalar>(herm, half, nxf, herm_t);
  fft_leading_columns<Scalar>(herm_t, half, true);
  ComplexMatrix lines(half, nx);
  transpose_into<Scalar>(herm_t, nx, half, lines);
  lines.array() *= steer_phase_.topRows(half).conjugate().array();
  if (nyquist >= 0) lines.row(nyquist) = lines.row(nyquist).real().template cast<Complex>();

  RealMatrix out(nt, nx);
  std::vector<Scalar> trace(static_cast<std::size_t>(ntf));
  for (Eigen::Index i = 0; i < nx; ++i) {
    fft.inv(trace.data(), lines.col(i).data(), ntf);
    for (Eigen::Index t = 0; t < nt; ++t) out(t, i) = trace[static_cast<std::size_t>(t)];
  }
  return out;
}

template struct RemapTable<float>;
template struct RemapTable<double>;
template RemapTable<float> build_remap_table<float>(const StoltMapping&, const Eigen::VectorXd&,
                                                    const Eigen::VectorXd&, const Eigen::VectorXd&);
template RemapTable<double> build_remap_table<double>(const StoltMapping&, const Eigen::VectorXd&,
                                                      const Eigen::VectorXd&,
                                                      const Eigen::VectorXd&);
template ComplexMatrixT<float> remap_gather<float>(const RemapTable<float>&,
                                                   const ComplexMatrixT<float>&);
template ComplexMatrixT<double> remap_gather<double>(const RemapTable<double>&,
                                                     const ComplexMatrixT<double>&);
template ComplexMatrixT<float> remap_scatter<float>(const RemapTable<float>&,
                                                    const ComplexMatrixT<float>&);
template ComplexMatrixT<double> remap_scatter<double>(const RemapTable<double>&,
                                                      const ComplexMatrixT<double>&);
template class FkMigrationOperator<float>;
template class FkMigrationOperator<double>;

FkOperator build_operator(const AcquisitionConfig& config, FkOptions options) {
  return FkOperator(config, options);
}

Image migrate(const FkOperator& op, const RFFrame& frame) {
  if (!(frame.config == op.config()))
    throw std::invalid_argument("migrate: frame acquisition does not match the operator");
  return Image{op.apply(frame.samples), op.dz(), op.dx()};
}

RFFrame adjoint(const FkOperator& op, const Image& image) {
  return RFFrame(op.apply_adjoint(image.pixels), op.config());
}

}  // namespace pwfk
