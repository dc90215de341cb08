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

#ifndef PWFK_FK_MIGRATION_HPP
#define PWFK_FK_MIGRATION_HPP

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pwfk/acquisition.hpp"

namespace pwfk {

/**
 * Stolt (f-k) migration of steered plane-wave data, written as a chain of
 * linear stages so that the exact adjoint is available stage by stage:
 *
 *   axial_fft     zero-pad in time, FFT along each trace
 *   steer_phase   advance every trace by its firing delay (and by t_start)
 *   lateral_fft   zero-pad across elements, FFT along the array
 *   stolt_remap   gather the data spectrum onto the image (kz, kx) grid
 *                 with two-tap linear interpolation in frequency
 *   inverse_fft2  normalised 2-D inverse FFT, cropped to the image grid
 *
 * The migrated image is the real part of the last stage. Complex spaces use
 * the real inner product Re(sum conj(a) * b), so every stage adjoint is the
 * conjugate transpose and the operator adjoint is exact for real data.
 */
enum class FkStage { axial_fft, steer_phase, lateral_fft, stolt_remap, inverse_fft2 };

inline constexpr std::array<FkStage, 5> kFkStages = {
    FkStage::axial_fft, FkStage::steer_phase, FkStage::lateral_fft, FkStage::stolt_remap,
    FkStage::inverse_fft2};

/// Throws std::invalid_argument for unknown names.
FkStage fk_stage_from_name(std::string_view name);
std::string_view fk_stage_name(FkStage stage);

/// Zero-padding factors of the internal transforms. Output dims do not depend on them.
struct FkOptions {
  std::size_t axial_pad = 4;
  std::size_t lateral_pad = 2;

  bool operator==(const FkOptions&) const = default;
};

/// Signed FFT bin frequencies, numpy.fft.fftfreq layout (DC, positive, negative).
Eigen::VectorXd fft_frequencies(std::size_t n, double sample_spacing);

struct SpectralGrid {
  std::size_t n_t = 0;      // data rows (time samples)
  std::size_t n_x = 0;      // data columns (elements)
  std::size_t n_t_fft = 0;  // padded axial transform length, also the kz grid length
  std::size_t n_x_fft = 0;  // padded lateral transform length
  Eigen::VectorXd freqs;    // Hz
  Eigen::VectorXd kx;       // cycles / m
  Eigen::VectorXd kz;       // cycles / m, physical depth
};

/**
 * Dispersion relation of the exploding-reflector model for one steering angle.
 *
 * A point at physical (x, z) is imaged by an exploding reflector of speed
 * c_hat located at (x + lateral_shear * z, depth_scale * z). The three
 * parameters match apex time and apex curvature of the steered diffraction
 * hyperbola; for angle 0 they reduce to c_hat = c0 / sqrt(2), depth_scale =
 * sqrt(2), lateral_shear = 0.
 */
struct StoltMapping {
  double c_hat = 0.0;
  double depth_scale = 1.0;
  double lateral_shear = 0.0;
  double amplitude_scale = 1.0;

  /// Depth wavenumber of the exploding-reflector image for image wavenumbers (kx, kz).
  double erm_kz(double kx, double kz) const { return (kz - lateral_shear * kx) / depth_scale; }
  /// c_hat * sign(kz') * sqrt(kx^2 + kz'^2) with kz' = erm_kz(kx, kz).
  double source_frequency(double kx, double kz) const;
  /// Jacobian factor |kz'| / sqrt(kx^2 + kz'^2), times amplitude_scale; 0 at kz' = 0.
  double amplitude(double kx, double kz) const;
  /// True when (f, kx) has no preimage on the image grid.
  bool evanescent(double f, double kx) const;
};

StoltMapping stolt_mapping(const AcquisitionConfig& config);

/**
 * Two-tap gather table of the Stolt remap. Entry e = col * n_rows + row of the
 * output reads  w0[e] * in(tap0[e], col) + w1[e] * in(tap1[e], col);  a tap
 * index of -1 contributes nothing.
 */
template <typename Scalar>
struct RemapTable {
  Eigen::Index n_rows = 0;  // output rows == input rows
  Eigen::Index n_cols = 0;
  std::vector<std::int32_t> tap0, tap1;
  std::vector<Scalar> w0, w1;
  std::vector<double> source_freq;  // interpolation abscissa, Hz (0 where unused)

  bool operator==(const RemapTable&) const = default;
};

/// Rows of @p freqs are the input bins, rows of @p kz the output bins; columns share @p kx.
template <typename Scalar>
RemapTable<Scalar> build_remap_table(const StoltMapping& mapping, const Eigen::VectorXd& freqs,
                                     const Eigen::VectorXd& kx, const Eigen::VectorXd& kz);

template <typename Scalar>
using ComplexMatrixT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// out = R * in
template <typename Scalar>
ComplexMatrixT<Scalar> remap_gather(const RemapTable<Scalar>& table,
                                    const ComplexMatrixT<Scalar>& in);
/// out = R^T * in (scatter-add with the same weights)
template <typename Scalar>
ComplexMatrixT<Scalar> remap_scatter(const RemapTable<Scalar>& table,
                                     const ComplexMatrixT<Scalar>& in);

/**
 * Linear migration operator B for one acquisition geometry and angle. The
 * operator is immutable and holds no per-call state, so it may be shared
 * across threads.
 */
template <typename Scalar>
class FkMigrationOperator {
 public:
  using Complex = std::complex<Scalar>;
  using RealMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using ComplexMatrix = ComplexMatrixT<Scalar>;

  explicit FkMigrationOperator(const AcquisitionConfig& config, FkOptions options = {});

  /// u = B f, data n_samples x n_elements, image n_z x n_x.
  RealMatrix apply(const Eigen::Ref<const RealMatrix>& data) const;
  /// f = B^T u
  RealMatrix apply_adjoint(const Eigen::Ref<const RealMatrix>& image) const;

  ComplexMatrix apply_stage(FkStage stage, const ComplexMatrix& in) const;
  ComplexMatrix apply_stage_adjoint(FkStage stage, const ComplexMatrix& in) const;
  /// (rows, cols) accepted by apply_stage.
  std::array<Eigen::Index, 2> stage_input_shape(FkStage stage) const;
  std::array<Eigen::Index, 2> stage_output_shape(FkStage stage) const;

  const AcquisitionConfig& config() const { return config_; }
  const FkOptions& options() const { return options_; }
  const SpectralGrid& grid() const { return grid_; }
  const StoltMapping& mapping() const { return mapping_; }
  const RemapTable<Scalar>& remap() const { return remap_; }
  /// exp(2 pi i f (tau_i - t_start)), n_t_fft x n_elements
  const ComplexMatrix& steer_phase() const { return steer_phase_; }

  Eigen::Index n_z() const { return static_cast<Eigen::Index>(grid_.n_t); }
  Eigen::Index n_x() const { return static_cast<Eigen::Index>(grid_.n_x); }
  /// Physical depth spacing c0 / (2 fs).
  double dz() const { return dz_; }
  double dx() const { return config_.geometry.pitch(); }

 private:
  void check_shape(FkStage stage, const ComplexMatrix& in, bool adjoint) const;

  AcquisitionConfig config_;
  FkOptions options_;
  SpectralGrid grid_;
  StoltMapping mapping_;
  RemapTable<Scalar> remap_;
  ComplexMatrix steer_phase_;
  double dz_ = 0.0;
};

extern template class FkMigrationOperator<float>;
extern template class FkMigrationOperator<double>;

using FkOperator = FkMigrationOperator<double>;

/// Migrated image. Pixel (m, j) sits at depth m * dz below the array and at element_x(j).
struct Image {
  Eigen::MatrixXd pixels;
  double dz = 0.0;
  double dx = 0.0;

  Eigen::Index rows() const { return pixels.rows(); }
  Eigen::Index cols() const { return pixels.cols(); }
};

FkOperator build_operator(const AcquisitionConfig& config, FkOptions options = {});
/// Throws std::invalid_argument when the frame was acquired with a different config.
Image migrate(const FkOperator& op, const RFFrame& frame);
RFFrame adjoint(const FkOperator& op, const Image& image);

}  // namespace pwfk

#endif  // PWFK_FK_MIGRATION_HPP
