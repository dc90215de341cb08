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

#ifndef PWFK_DIFFNET_TENSOR_HPP
#define PWFK_DIFFNET_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pwfk::diffnet {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/**
 * Dense row-major array with a gradient slot. Copies share the underlying
 * node, so a Tensor behaves like a handle. Operations on tensors that
 * require gradients record a backward closure; backward() on a scalar
 * result walks the recorded graph in reverse topological order and
 * accumulates into the grad of every contributing tensor.
 */
template <typename Scalar>
class Tensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  struct Node {
    Shape shape;
    Array value;
    Array grad;  // empty until something flows into it
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;

    void accumulate(const Array& g);
  };

  Tensor() = default;
  Tensor(Shape shape, Array values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  /// [1 x rows x cols] tensor from a matrix.
  static Tensor from_matrix(const Matrix& m, bool requires_grad = false);
  /// Result of an operation; backward runs only if some parent requires a gradient.
  static Tensor make_result(Shape shape, Array values, std::vector<Tensor> parents,
                            std::function<void(Node&)> backward);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return static_cast<std::size_t>(node_->value.size()); }
  const Array& values() const { return node_->value; }
  /// Direct value access for leaves (parameters, inputs).
  Array& mutable_values() { return node_->value; }
  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  /// Gradient, or zeros when nothing has flowed into this tensor.
  Array grad() const;
  void zero_grad() { node_->grad.resize(0); }

  Scalar item() const;
  /// Last two dims as a matrix (leading dims must be 1).
  Matrix to_matrix() const;

  /// Seeds d(this)/d(this) = 1 and back-propagates. The tensor must hold one element.
  void backward() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace pwfk::diffnet

#endif  // PWFK_DIFFNET_TENSOR_HPP
