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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mislmm/mcstudy.hpp"
#include "mislmm/report.hpp"
#include "mislmm/varest.hpp"

namespace mislmm
{

/// A command failure tagged with the pipeline stage and the exit status the
/// CLI should return: 2 for bad input, 3 for numerical failure.
class StageError : public std::runtime_error
{
public:
    StageError(std::string stage, int exit_code, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage_(std::move(stage)), exit_code_(exit_code)
    {
    }

    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }
    [[nodiscard]] int exit_code() const noexcept { return exit_code_; }

private:
    std::string stage_;
    int exit_code_;
};

struct FitOptions
{
    std::filesystem::path genotypes;
    std::filesystem::path phenotype;
    std::optional<std::filesystem::path> covariates;
    double maf_min = 0.05;
    double miss_max = 0.05;
    std::vector<double> levels{0.05};
    int bootstrap = 0;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    VarianceOptions variance{};
};

/// load -> qc -> standardize -> spectral -> fit -> variance -> intervals
/// -> bootstrap. Throws StageError.
FitReport run_fit(const FitOptions& opts);
/// run_fit, then writes `out` (JSON) and `out` with a .txt extension.
FitReport cmd_fit(const FitOptions& opts, const std::filesystem::path& out);

struct McOptions
{
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::filesystem::path out_dir = ".";
};

/// Writes mc_table.csv and mc_table.txt into out_dir.
std::vector<ScenarioOutcome> cmd_mc(const McOptions& opts);

struct SimulateOptions
{
    Index n = 0;
    Index p = 0;
    Index m = 0;
    double a = 0.4;
    double b = 0.6;
    double mu = 0.0;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = ".";
};

/// Writes genotypes.tsv, phenotype.tsv and truth.json into out_dir. The data
/// are replication 0 of the scenario the options describe.
void cmd_simulate(const SimulateOptions& opts);

/// Aligned text rendering of an mc CSV table.
std::string cmd_report(const std::filesystem::path& input);

}  // namespace mislmm
