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

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mislmm/ci.hpp"
#include "mislmm/genosim.hpp"
#include "mislmm/reml.hpp"
#include "mislmm/varest.hpp"

namespace mislmm
{

struct IntervalRecord
{
    Interval interval;
    double lambda = 0.05;
    bool covered = false;
};

struct ReplicationResult
{
    std::size_t rep_index = 0;
    bool failed = false;
    std::string failure;

    RemlFit fit;
    double v_sigma2_eps = 0.0;          // quartic
    double v_sigma2_eps_literal = 0.0;  // quadratic-literal
    double v_gamma = 0.0;
    double v_h2 = 0.0;
    double v_gamma_literal = 0.0;
    double v_h2_literal = 0.0;

    // Per (parameter, lambda, kind) for parameter in {sigma2_eps, h2}.
    std::vector<IntervalRecord> intervals;

    [[nodiscard]] const IntervalRecord* find(Parameter parameter, double lambda,
                                             IntervalKind kind) const noexcept;
};

struct ReplicationOptions
{
    VarianceOptions variance{};
    SolverOptions solver{};
    // Test seam: lets a caller corrupt the simulated phenotype.
    std::function<void(Eigen::VectorXd&)> phenotype_hook;
};

/// Coverage of one interval kind at one level; nan when no interval existed.
struct Coverage
{
    double lambda = 0.05;
    double rate = 0.0;
    std::size_t hits = 0;
    std::size_t count = 0;
};

struct ParameterSummary
{
    Parameter parameter = Parameter::sigma2_eps;
    double truth = 0.0;
    double mean_theta = 0.0;
    double pct_rb = 0.0;
    double var_theta_hat = 0.0;
    double mean_v = 0.0;
    double sd_v = 0.0;
    std::vector<Coverage> n_lambda;
    std::vector<Coverage> t_lambda;
};

struct McSummary
{
    SimConfig config;
    std::size_t scenario = 0;
    std::size_t rep_count = 0;
    std::size_t failure_count = 0;
    std::size_t boundary_count = 0;
    ParameterSummary sigma2_eps;
    ParameterSummary h2;
};

struct ScenarioOutcome
{
    McSummary summary;
    bool failed = false;
    std::string error;
};

struct SimulatedReplication
{
    StandardizedDesign design;
    Eigen::VectorXd phenotype;
    std::vector<Index> causal;
};

/// The data of replication `rep_index`: frequencies, genotypes, causal set
/// and phenotype, each from its own stream derived from the scenario seed.
SimulatedReplication simulate_replication(const SimConfig& config, std::size_t rep_index);

/// Simulate, fit and build intervals for replication `rep_index` of a
/// scenario. Failures are recorded in the result, never thrown.
ReplicationResult run_replication(const SimConfig& config, std::size_t rep_index,
                                  const ReplicationOptions& opts = {});

/// Throws NumericalError when no replication succeeded.
McSummary summarize(std::span<const ReplicationResult> results, const SimConfig& config,
                    ExponentMode mode = ExponentMode::quartic,
                    GammaMode gamma_mode = GammaMode::doubled);

/// Runs every (scenario, replication) pair across `parallelism` workers.
/// Output order follows the grid; results do not depend on parallelism.
std::vector<ScenarioOutcome> run_study(std::span<const SimConfig> grid, int parallelism,
                                       const ReplicationOptions& opts = {});

/// Replications of one scenario in parallel, in index order.
std::vector<ReplicationResult> run_replications(const SimConfig& config, int parallelism,
                                                const ReplicationOptions& opts = {});
/// Serial reference for run_replications.
std::vector<ReplicationResult> run_replications_serial(const SimConfig& config,
                                                       const ReplicationOptions& opts = {});

/// Sample variance with denominator R - 1 (two-pass).
double sample_variance(std::span<const double> values);

}  // namespace mislmm
