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

#ifndef PWFK_ERRORS_HPP
#define PWFK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pwfk {

// Bad arguments, shape mismatches and violated preconditions all surface as
// std::invalid_argument. The types below cover the remaining failure kinds.

/// Phantom generation could not place the requested inclusions.
class GenerationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-system or container-format failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pwfk

#endif  // PWFK_ERRORS_HPP
