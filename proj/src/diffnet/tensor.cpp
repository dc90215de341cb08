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

#include "pwfk/diffnet/tensor.hpp"

#include <cassert>
#include <stdexcept>
#include <unordered_set>

namespace pwfk::diffnet {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename Scalar>
void Tensor<Scalar>::Node::accumulate(const Array& g) {
  if (grad.size() == 0)
    grad = g;
  else
    grad += g;
}

template <typename Scalar>
Tensor<Scalar>::Tensor(Shape shape, Array values, bool requires_grad)
    : node_(std::make_shared<Node>()) {
  if (static_cast<std::size_t>(values.size()) != shape_numel(shape))
    throw std::invalid_argument("Tensor: " + std::to_string(values.size()) +
                                " values for shape " + shape_string(shape));
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::zeros(Shape shape, bool requires_grad) {
  const auto n = static_cast<Eigen::Index>(shape_numel(shape));
  return Tensor(std::move(shape), Array::Zero(n), requires_grad);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::from_matrix(const Matrix& m, bool requires_grad) {
  Array values(m.size());
  Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), m.rows(), m.cols()) = m;
  return Tensor({1, static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())},
                std::move(values), requires_grad);
}

template <typename Scalar>
Tensor<Scalar> Tensor<Scalar>::make_result(Shape shape, Array values, std::vector<Tensor> parents,
                                           std::function<void(Node&)> backward) {
  assert(values.allFinite() && "non-finite values produced by a diffnet op");
  Tensor out(std::move(shape), std::move(values), false);
  for (const auto& p : parents) {
    out.node_->requires_grad = out.node_->requires_grad || p.requires_grad();
  }
  if (out.node_->requires_grad) {
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = std::move(backward);
  }
  return out;
}

template <typename Scalar>
auto Tensor<Scalar>::grad() const -> Array {
  if (node_->grad.size() == 0) return Array::Zero(node_->value.size());
  return node_->grad;
}

template <typename Scalar>
Scalar Tensor<Scalar>::item() const {
  if (numel() != 1) throw std::invalid_argument("Tensor::item: tensor has " + std::to_string(numel()) + " elements");
  return node_->value(0);
}

template <typename Scalar>
auto Tensor<Scalar>::to_matrix() const -> Matrix {
  const auto& s = node_->shape;
  if (s.size() < 2) throw std::invalid_argument("Tensor::to_matrix: need at least 2 dims");
  for (std::size_t i = 0; i + 2 < s.size(); ++i)
    if (s[i] != 1) throw std::invalid_argument("Tensor::to_matrix: leading dims must be 1");
  const auto rows = static_cast<Eigen::Index>(s[s.size() - 2]);
  const auto cols = static_cast<Eigen::Index>(s[s.size() - 1]);
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      node_->value.data(), rows, cols);
}

template <typename Scalar>
void Tensor<Scalar>::backward() const {
  if (numel() != 1) throw std::invalid_argument("Tensor::backward: output must be a scalar");
  if (!node_->requires_grad) return;

  // iterative post-order DFS gives a topological order (parents before children)
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->accumulate(Array::Ones(1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && n->grad.size() != 0) n->backward(*n);
  }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace pwfk::diffnet
