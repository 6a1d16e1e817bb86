/*
 * Copyright 2026 The mislmm Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mislmm/genosim.hpp"
#include "mislmm/varest.hpp"

namespace mislmm
{

// Study configuration: one `key = value` per line, `#` starts a comment.
// List-valued keys take comma-separated values and expand as a Cartesian
// product, in the order (n, p) x m x (a, b) x mu.
//
//   n, p             sizes; or np = 1000x10000, 2000x20000 for paired sizes
//   m                causal counts; or omega = fractions of p (rounded, >= 1)
//   a, b             variance parameters; or ab = 0.4:0.6, 0.8:0.2 for pairs
//   mu               intercept (default 0)
//   reps             replications per scenario (default 300)
//   levels           CI levels lambda (default 0.01, 0.05, 0.1)
//   random_causal    true | false (default false)
//   fixed_genotypes  true | false (default false)
//   exponent_mode    quartic | quadratic-literal (default quartic)
//   gamma_mode       doubled | literal (default doubled)
struct StudyConfig
{
    std::vector<SimConfig> scenarios;
    VarianceOptions variance{};
};

/// Scenario i gets seed derive_seed(seed, i). Throws InputError naming the
/// offending key or line.
StudyConfig parse_study_config(const std::string& text, std::uint64_t seed,
                               const std::string& source = "<config>");
StudyConfig load_study_config(const std::filesystem::path& path, std::uint64_t seed);

}  // namespace mislmm
