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


#ifndef PWFK_VERIFY_HPP
#define PWFK_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace pwfk {

/// Outcome of one oracle suite; lines are human-readable summaries.
struct SuiteResult {
  std::string suite;
  bool passed = false;
  std::vector<std::string> lines;
  nlohmann::json metrics = nlohmann::json::object();
  double seconds = 0.0;
};

/// Dot-product test of the full operator and of every stage, 10 seeds on 32, 64 and 128 grids.
SuiteResult verify_adjoint(std::uint64_t seed = 0);
/// Envelope peaks of single scatterers at -16, 0 and +16 degrees, and of their 75-angle compound.
SuiteResult verify_focus(std::uint64_t seed = 0);
/// Finite-difference check of a 16x16 data-to-image network (2 + FK + 2 layers, 8 channels).
SuiteResult verify_gradcheck(std::uint64_t seed = 0);

/// "adjoint", "focus" or "gradcheck"; std::invalid_argument otherwise.
SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed = 0);

}  // namespace pwfk

#endif  // PWFK_VERIFY_HPP
