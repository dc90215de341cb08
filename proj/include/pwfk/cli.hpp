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


#ifndef PWFK_CLI_HPP
#define PWFK_CLI_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <utility>

#include <json.hpp>

#include "pwfk/dataset.hpp"

namespace pwfk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // generation failure, divergence, anything unexpected
inline constexpr int kExitUsage = 2;    // bad flags or invalid arguments
inline constexpr int kExitIo = 3;
inline constexpr int kExitVerify = 4;

/// Subcommands simulate, migrate, compound, train, eval, verify. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "75,16" -> {75, 16.0}
std::pair<std::size_t, double> parse_angles(const std::string& text);

/**
 * Dataset spec of cmd_simulate. @p file may hold phantom, acquisition,
 * frame_dtype, fk and n_test; n_test defaults to round(n / 15).
 */
DatasetSpec simulate_spec(const nlohmann::json& file, std::size_t n, std::size_t n_angles,
                          double half_span_deg, std::uint64_t seed);

}  // namespace pwfk::cli

#endif  // PWFK_CLI_HPP
