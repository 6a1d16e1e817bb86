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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mislmm/ci.hpp"
#include "mislmm/dataset.hpp"
#include "mislmm/mcstudy.hpp"
#include "mislmm/varest.hpp"

namespace mislmm
{

/// Coverage columns of the Monte Carlo table.
inline constexpr std::array<double, 3> kTableLevels{0.01, 0.05, 0.1};

/// One Monte Carlo table row: a scenario and one parameter. Only the fields
/// up to t_cov go to CSV; the rest feed the text rendering when known.
struct McRow
{
    std::size_t scenario = 0;
    Index n = 0;
    Index p = 0;
    Index m = 0;
    double a = 0.0;
    double b = 0.0;
    std::string parameter;
    double pct_rb = 0.0;
    double var_theta = 0.0;
    double mean_v = 0.0;
    double sd_v = 0.0;
    std::array<double, 3> n_cov{};
    std::array<double, 3> t_cov{};

    std::optional<std::size_t> reps;
    std::optional<std::size_t> failures;
    std::optional<std::size_t> boundary;
    std::optional<double> mean_theta;
    std::string status = "ok";
};

/// "%.6g", or "NA" for non-finite values.
std::string format_value(double v);

/// Two rows per scenario, sigma2_eps then h2. Failed scenarios keep their
/// identifying columns and carry NA statistics.
std::vector<McRow> mc_rows(std::span<const ScenarioOutcome> outcomes);

std::string mc_csv(std::span<const McRow> rows);
/// Inverse of mc_csv; NA parses to NaN. Throws InputError on malformed input.
std::vector<McRow> parse_mc_csv(const std::string& text);

/// Fixed-width columns for reading in a terminal.
std::string mc_text(std::span<const McRow> rows);

/// Everything the fit command reports.
struct FitReport
{
    std::string genotype_path;
    std::string phenotype_path;
    std::string covariate_path;

    Index n = 0;
    Index snps_used = 0;
    Index snps_monomorphic = 0;
    std::vector<std::string> covariate_names;
    std::size_t dropped_genotype = 0;
    std::size_t dropped_phenotype = 0;
    std::size_t dropped_covariate = 0;
    QcReport qc;

    RemlFit fit;
    AbcStats abc;
    VarianceEstimates variances;
    // lambda is 1 - level of each interval.
    std::vector<Interval> intervals;
    int bootstrap_draws = 0;
    int bootstrap_failures = 0;
    std::optional<std::uint64_t> seed;
};

/// Structured report; intervals keyed by parameter, then level lambda, then
/// interval kind.
std::string fit_report_json(const FitReport& report);
/// Short plain-text summary of the same report.
std::string fit_report_text(const FitReport& report);

}  // namespace mislmm
