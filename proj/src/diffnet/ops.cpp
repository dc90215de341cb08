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

#include "pwfk/diffnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pwfk::diffnet {

namespace {

template <typename Scalar>
using RowMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Node = typename Tensor<Scalar>::Node;

void require_rank(const Shape& s, std::size_t rank, const char* what) {
  if (s.size() != rank)
    throw std::invalid_argument(std::string(what) + ": expected a rank-" + std::to_string(rank) +
                                " tensor, got " + shape_string(s));
}

struct ConvDims {
  Eigen::Index c_in, c_out, h, w, k;
};

// cols(row = (c * k + di) * k + dj, col = y * w + x) = input(c, y + di - k/2, x + dj - k/2)
template <typename Scalar>
void im2col(const Scalar* in, const ConvDims& d, RowMat<Scalar>& cols) {
  const Eigen::Index pad = d.k / 2;
  cols.setZero(d.c_in * d.k * d.k, d.h * d.w);
  for (Eigen::Index c = 0; c < d.c_in; ++c)
    for (Eigen::Index di = 0; di < d.k; ++di)
      for (Eigen::Index dj = 0; dj < d.k; ++dj) {
        const Eigen::Index row = (c * d.k + di) * d.k + dj;
        const Eigen::Index x_lo = std::max<Eigen::Index>(0, pad - dj);
        const Eigen::Index x_hi = std::min<Eigen::Index>(d.w, d.w + pad - dj);
        Scalar* dst = cols.row(row).data();
        for (Eigen::Index y = 0; y < d.h; ++y) {
          const Eigen::Index ys = y + di - pad;
          if (ys < 0 || ys >= d.h) continue;
          const Scalar* src = in + (c * d.h + ys) * d.w + (dj - pad);
          for (Eigen::Index x = x_lo; x < x_hi; ++x) dst[y * d.w + x] = src[x];
        }
      }
}

template <typename Scalar>
void col2im(const RowMat<Scalar>& cols, const ConvDims& d, Scalar* out) {
  const Eigen::Index pad = d.k / 2;
  for (Eigen::Index c = 0; c < d.c_in; ++c)
    for (Eigen::Index di = 0; di < d.k; ++di)
      for (Eigen::Index dj = 0; dj < d.k; ++dj) {
        const Eigen::Index row = (c * d.k + di) * d.k + dj;
        const Eigen::Index x_lo = std::max<Eigen::Index>(0, pad - dj);
        const Eigen::Index x_hi = std::min<Eigen::Index>(d.w, d.w + pad - dj);
        const Scalar* src = cols.row(row).data();
        for (Eigen::Index y = 0; y < d.h; ++y) {
          const Eigen::Index ys = y + di - pad;
          if (ys < 0 || ys >= d.h) continue;
          Scalar* dst = out + (c * d.h + ys) * d.w + (dj - pad);
          for (Eigen::Index x = x_lo; x < x_hi; ++x) dst[x] += src[y * d.w + x];
        }
      }
}

}  // namespace

template <typename Scalar>
Tensor<Scalar> conv2d(const Tensor<Scalar>& input, const Tensor<Scalar>& weights,
                      const Tensor<Scalar>& bias) {
  require_rank(input.shape(), 3, "conv2d input");
  require_rank(weights.shape(), 4, "conv2d weights");
  require_rank(bias.shape(), 1, "conv2d bias");
  const auto& ws = weights.shape();
  ConvDims d{static_cast<Eigen::Index>(ws[1]), static_cast<Eigen::Index>(ws[0]),
             static_cast<Eigen::Index>(input.dim(1)), static_cast<Eigen::Index>(input.dim(2)),
             static_cast<Eigen::Index>(ws[2])};
  if (ws[2] != ws[3] || ws[2] % 2 == 0)
    throw std::invalid_argument("conv2d: kernel must be square with odd size");
  if (input.dim(0) != ws[1])
    throw std::invalid_argument("conv2d: input has " + std::to_string(input.dim(0)) +
                                " channels, weights expect " + std::to_string(ws[1]));
  if (bias.dim(0) != ws[0]) throw std::invalid_argument("conv2d: bias length must equal C_out");

  auto cols = std::make_shared<RowMat<Scalar>>();
  im2col(input.values().data(), d, *cols);
  const Eigen::Index kk = d.c_in * d.k * d.k;
  const Eigen::Index hw = d.h * d.w;
  Eigen::Map<const RowMat<Scalar>> wm(weights.values().data(), d.c_out, kk);

  typename Tensor<Scalar>::Array out(d.c_out * hw);
  Eigen::Map<RowMat<Scalar>> om(out.data(), d.c_out, hw);
  om.noalias() = wm * (*cols);
  om.colwise() += bias.values().matrix();

  return Tensor<Scalar>::make_result(
      {ws[0], input.dim(1), input.dim(2)}, std::move(out), {input, weights, bias},
      [cols, d, kk, hw](Node<Scalar>& self) {
        Eigen::Map<const RowMat<Scalar>> gy(self.grad.data(), d.c_out, hw);
        auto& in = *self.parents[0];
        auto& w = *self.parents[1];
        auto& b = *self.parents[2];
        if (w.requires_grad) {
          typename Tensor<Scalar>::Array gw(d.c_out * kk);
          Eigen::Map<RowMat<Scalar>>(gw.data(), d.c_out, kk).noalias() = gy * cols->transpose();
          w.accumulate(gw);
        }
        if (b.requires_grad) b.accumulate(gy.rowwise().sum().array());
        if (in.requires_grad) {
          Eigen::Map<const RowMat<Scalar>> wm(w.value.data(), d.c_out, kk);
          RowMat<Scalar> gcols = wm.transpose() * gy;
          typename Tensor<Scalar>::Array gx = Tensor<Scalar>::Array::Zero(d.c_in * hw);
          col2im(gcols, d, gx.data());
          in.accumulate(gx);
        }
      });
}

template <typename Scalar>
Tensor<Scalar> weight_standardize(const Tensor<Scalar>& weights, Scalar eps) {
  if (!(eps > Scalar(0))) throw std::invalid_argument("weight_standardize: eps must be positive");
  if (weights.shape().empty() || weights.numel() == 0)
    throw std::invalid_argument("weight_standardize: empty weights");
  const auto rows = static_cast<Eigen::Index>(weights.dim(0));
  const auto n = static_cast<Eigen::Index>(weights.numel()) / rows;
  Eigen::Map<const RowMat<Scalar>> w(weights.values().data(), rows, n);

  typename Tensor<Scalar>::Array out(rows * n);
  Eigen::Map<RowMat<Scalar>> o(out.data(), rows, n);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> sigma(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Scalar mean = w.row(r).mean();
    const auto centered = (w.row(r).array() - mean).eval();
    sigma(r) = std::sqrt(centered.square().mean());
    o.row(r) = centered / (sigma(r) + eps);
  }

  return Tensor<Scalar>::make_result(
      weights.shape(), out, {weights}, [out, sigma, rows, n, eps](Node<Scalar>& self) {
        Eigen::Map<const RowMat<Scalar>> g(self.grad.data(), rows, n);
        Eigen::Map<const RowMat<Scalar>> wh(out.data(), rows, n);
        typename Tensor<Scalar>::Array gw(rows * n);
        Eigen::Map<RowMat<Scalar>> gm(gw.data(), rows, n);
        for (Eigen::Index r = 0; r < rows; ++r) {
          const Scalar s = sigma(r) + eps;
          // w_hat = d / s with d centred and s = sigma(d) + eps
          auto gd = (g.row(r).array() / s).eval();
          if (sigma(r) > Scalar(0)) {
            const Scalar proj = (g.row(r).array() * wh.row(r).array()).sum();
            gd -= wh.row(r).array() * (proj / (sigma(r) * static_cast<Scalar>(n)));
          }
          gm.row(r) = gd - gd.mean();
        }
        self.parents[0]->accumulate(gw);
      });
}

template <typename Scalar>
Tensor<Scalar> group_norm(const Tensor<Scalar>& input, std::size_t groups,
                          const Tensor<Scalar>& scale, const Tensor<Scalar>& shift, Scalar eps) {
  require_rank(input.shape(), 3, "group_norm input");
  const std::size_t channels = input.dim(0);
  if (groups == 0 || channels % groups != 0)
    throw std::invalid_argument("group_norm: " + std::to_string(channels) +
                                " channels are not divisible into " + std::to_string(groups) +
                                " groups");
  if (scale.numel() != channels || shift.numel() != channels)
    throw std::invalid_argument("group_norm: scale and shift need one entry per channel");
  if (!(eps > Scalar(0))) throw std::invalid_argument("group_norm: eps must be positive");

  const auto hw = static_cast<Eigen::Index>(input.dim(1) * input.dim(2));
  const auto per_group = static_cast<Eigen::Index>(channels / groups);
  const auto g_len = per_group * hw;
  const auto n_groups = static_cast<Eigen::Index>(groups);
  const auto& x = input.values();

  typename Tensor<Scalar>::Array xhat(x.size());
  Eigen::Array<Scalar, Eigen::Dynamic, 1> inv_std(n_groups);
  for (Eigen::Index g = 0; g < n_groups; ++g) {
    const auto seg = x.segment(g * g_len, g_len);
    const Scalar mean = seg.mean();
    const Scalar var = (seg - mean).square().mean();
    inv_std(g) = Scalar(1) / std::sqrt(var + eps);
    xhat.segment(g * g_len, g_len) = (seg - mean) * inv_std(g);
  }
  typename Tensor<Scalar>::Array out(x.size());
  const auto& gamma = scale.values();
  const auto& beta = shift.values();
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(channels); ++c)
    out.segment(c * hw, hw) = xhat.segment(c * hw, hw) * gamma(c) + beta(c);

  return Tensor<Scalar>::make_result(
      input.shape(), std::move(out), {input, scale, shift},
      [xhat, inv_std, hw, per_group, g_len, n_groups](Node<Scalar>& self) {
        const auto& gy = self.grad;
        auto& in = *self.parents[0];
        auto& sc = *self.parents[1];
        auto& sh = *self.parents[2];
        const Eigen::Index channels = per_group * n_groups;
        if (sc.requires_grad || sh.requires_grad) {
          typename Tensor<Scalar>::Array g_scale(channels), g_shift(channels);
          for (Eigen::Index c = 0; c < channels; ++c) {
            g_scale(c) = (gy.segment(c * hw, hw) * xhat.segment(c * hw, hw)).sum();
            g_shift(c) = gy.segment(c * hw, hw).sum();
          }
          if (sc.requires_grad) sc.accumulate(g_scale);
          if (sh.requires_grad) sh.accumulate(g_shift);
        }
        if (in.requires_grad) {
          typename Tensor<Scalar>::Array gxhat(gy.size());
          for (Eigen::Index c = 0; c < channels; ++c)
            gxhat.segment(c * hw, hw) = gy.segment(c * hw, hw) * sc.value(c);
          typename Tensor<Scalar>::Array gx(gy.size());
          for (Eigen::Index g = 0; g < n_groups; ++g) {
            const auto gxh = gxhat.segment(g * g_len, g_len);
            const auto xh = xhat.segment(g * g_len, g_len);
            const Scalar m1 = gxh.mean();
            const Scalar m2 = (gxh * xh).mean();
            gx.segment(g * g_len, g_len) = (gxh - m1 - xh * m2) * inv_std(g);
          }
          in.accumulate(gx);
        }
      });
}

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& input) {
  const auto& x = input.values();
  typename Tensor<Scalar>::Array out = x.max(Scalar(0));
  return Tensor<Scalar>::make_result(input.shape(), std::move(out), {input}, [](Node<Scalar>& self) {
    auto& in = *self.parents[0];
    in.accumulate((in.value > Scalar(0)).select(self.grad, Scalar(0)));
  });
}

template <typename Scalar>
Tensor<Scalar> add_bias(const Tensor<Scalar>& input, const Tensor<Scalar>& bias) {
  require_rank(input.shape(), 3, "add_bias input");
  const std::size_t channels = input.dim(0);
  if (bias.numel() != channels)
    throw std::invalid_argument("add_bias: bias needs one entry per channel");
  const auto hw = static_cast<Eigen::Index>(input.dim(1) * input.dim(2));
  typename Tensor<Scalar>::Array out = input.values();
  for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(channels); ++c)
    out.segment(c * hw, hw) += bias.values()(c);
  return Tensor<Scalar>::make_result(
      input.shape(), std::move(out), {input, bias}, [hw](Node<Scalar>& self) {
        auto& in = *self.parents[0];
        auto& b = *self.parents[1];
        if (in.requires_grad) in.accumulate(self.grad);
        if (b.requires_grad) {
          typename Tensor<Scalar>::Array gb(b.value.size());
          for (Eigen::Index c = 0; c < gb.size(); ++c) gb(c) = self.grad.segment(c * hw, hw).sum();
          b.accumulate(gb);
        }
      });
}

template <typename Scalar>
Tensor<Scalar> fk_layer(const Tensor<Scalar>& input,
                        std::shared_ptr<const FkMigrationOperator<Scalar>> op) {
  if (!op) throw std::invalid_argument("fk_layer: no operator");
  require_rank(input.shape(), 3, "fk_layer input");
  const auto n_t = static_cast<std::size_t>(op->grid().n_t);
  const auto n_x = static_cast<std::size_t>(op->n_x());
  if (input.dim(0) != 1 || input.dim(1) != n_t || input.dim(2) != n_x)
    throw std::invalid_argument("fk_layer: input " + shape_string(input.shape()) +
                                " does not match operator data shape " +
                                shape_string({1, n_t, n_x}));
  using RowMap = Eigen::Map<const RowMat<Scalar>>;
  const auto image = op->apply(RowMap(input.values().data(), static_cast<Eigen::Index>(n_t),
                                      static_cast<Eigen::Index>(n_x)));
  typename Tensor<Scalar>::Array out(image.size());
  Eigen::Map<RowMat<Scalar>>(out.data(), image.rows(), image.cols()) = image;
  const Shape out_shape{1, static_cast<std::size_t>(image.rows()), static_cast<std::size_t>(image.cols())};
  return Tensor<Scalar>::make_result(out_shape, std::move(out), {input}, [op](Node<Scalar>& self) {
    const auto g = op->apply_adjoint(RowMap(self.grad.data(), op->n_z(), op->n_x()));
    typename Tensor<Scalar>::Array gx(g.size());
    Eigen::Map<RowMat<Scalar>>(gx.data(), g.rows(), g.cols()) = g;
    self.parents[0]->accumulate(gx);
  });
}

template <typename Scalar>
Tensor<Scalar> mse_loss(const Tensor<Scalar>& pred, const Tensor<Scalar>& target) {
  if (pred.shape() != target.shape())
    throw std::invalid_argument("mse_loss: shape " + shape_string(pred.shape()) + " vs " +
                                shape_string(target.shape()));
  const auto diff = (pred.values() - target.values()).eval();
  const auto n = static_cast<Scalar>(diff.size());
  typename Tensor<Scalar>::Array out(1);
  out(0) = diff.square().sum() / n;
  return Tensor<Scalar>::make_result({1}, std::move(out), {pred, target},
                                     [diff, n](Node<Scalar>& self) {
                                       const auto g = (diff * (Scalar(2) * self.grad(0) / n)).eval();
                                       if (self.parents[0]->requires_grad) self.parents[0]->accumulate(g);
                                       if (self.parents[1]->requires_grad) self.parents[1]->accumulate(-g);
                                     });
}

template <typename Scalar>
Tensor<Scalar> weighted_sum(const Tensor<Scalar>& input,
                            const typename Tensor<Scalar>::Array& weights) {
  if (static_cast<std::size_t>(weights.size()) != input.numel())
    throw std::invalid_argument("weighted_sum: weight count does not match the input");
  typename Tensor<Scalar>::Array out(1);
  out(0) = (input.values() * weights).sum();
  return Tensor<Scalar>::make_result({1}, std::move(out), {input}, [weights](Node<Scalar>& self) {
    self.parents[0]->accumulate(weights * self.grad(0));
  });
}

#define PWFK_INSTANTIATE_OPS(S)                                                                \
  template Tensor<S> conv2d<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&);          \
  template Tensor<S> weight_standardize<S>(const Tensor<S>&, S);                               \
  template Tensor<S> group_norm<S>(const Tensor<S>&, std::size_t, const Tensor<S>&,            \
                                   const Tensor<S>&, S);                                       \
  template Tensor<S> relu<S>(const Tensor<S>&);                                                \
  template Tensor<S> add_bias<S>(const Tensor<S>&, const Tensor<S>&);                          \
  template Tensor<S> fk_layer<S>(const Tensor<S>&, std::shared_ptr<const FkMigrationOperator<S>>); \
  template Tensor<S> mse_loss<S>(const Tensor<S>&, const Tensor<S>&);                          \
  template Tensor<S> weighted_sum<S>(const Tensor<S>&, const typename Tensor<S>::Array&);

PWFK_INSTANTIATE_OPS(float)
PWFK_INSTANTIATE_OPS(double)

#undef PWFK_INSTANTIATE_OPS

}  // namespace pwfk::diffnet
