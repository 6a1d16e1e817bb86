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
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mislmm/grm.hpp"
#include "mislmm/reml.hpp"

namespace mislmm
{

enum class IntervalKind
{
    normal,
    truncated,
    bootstrap,
};

enum class Parameter
{
    sigma2_eps,
    gamma,
    h2,
};

struct Interval
{
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;  // 1 - lambda
    IntervalKind kind = IntervalKind::normal;
    Parameter parameter = Parameter::sigma2_eps;

    [[nodiscard]] bool contains(double theta) const noexcept
    {
        return lower <= theta && theta <= upper;
    }
    [[nodiscard]] double width() const noexcept { return upper - lower; }
};

struct Bounds
{
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
};

/// [0, inf) for variances and the ratio, [0, 1] for heritability.
Bounds parameter_bounds(Parameter parameter) noexcept;

double normal_cdf(double x) noexcept;
/// 1 - Phi(x) without cancellation.
double normal_sf(double x) noexcept;
/// Inverse standard normal CDF; throws InputError outside (0, 1).
double normal_quantile(double t);

/// theta_hat -/+ z_{lambda/2} sqrt(v_hat).
Interval normal_ci(double theta_hat, double v_hat, double lambda,
                   Parameter parameter = Parameter::sigma2_eps);

/// lambda/2 and 1 - lambda/2 quantiles of N(theta_hat, v_hat) truncated to
/// `bounds`.
Interval truncated_ci(double theta_hat, double v_hat, double lambda, Bounds bounds,
                      Parameter parameter = Parameter::sigma2_eps);

/// CDF and quantile of the truncated normal used by truncated_ci.
double truncated_cdf(double x, double mean, double var, Bounds bounds);
double truncated_quantile(double t, double mean, double var, Bounds bounds);

/// Type-7 empirical quantile of an ascending sample.
double empirical_quantile(std::span<const double> sorted, double t);

/// (theta_hat / q_{1-lambda/2}, theta_hat / q_{lambda/2}) for ratio draws
/// r_b = theta*_b / theta_hat.
Interval ratio_interval(double theta_hat, std::vector<double> ratios, double lambda,
                        Parameter parameter);

struct BootstrapOptions
{
    int n_boot = 200;
    double lambda = 0.05;
    std::uint64_t seed = 0;
    int threads = 1;
    SolverOptions solver{};
};

struct BootstrapResult
{
    Interval interval;
    int failures = 0;
    std::vector<double> ratios;  // successful draws, ascending
};

/// Parametric bootstrap from the fitted working model. Draws
/// y* ~ N(X beta_hat, s2_eps (I + gamma_hat K)) directly in the eigenbasis,
/// refits, and inverts the ratio distribution. Replicate b uses stream
/// derive(seed, b).
BootstrapResult bootstrap_ci(const RemlFit& fit, const SpectralGrm& spec,
                             Parameter parameter, const BootstrapOptions& opts);

/// The refits behind bootstrap_ci, one per replicate; empty where the refit
/// failed. Lets several parameters and levels share one set of draws.
std::vector<std::optional<RemlFit>> bootstrap_refits(const RemlFit& fit, const SpectralGrm& spec,
                                                     const BootstrapOptions& opts);
/// Ratio interval from precomputed refits. Throws when more than 5% failed.
BootstrapResult bootstrap_interval(const RemlFit& fit,
                                   std::span<const std::optional<RemlFit>> refits,
                                   Parameter parameter, double lambda);

double parameter_value(const RemlFit& fit, Parameter parameter) noexcept;

std::string_view to_string(IntervalKind kind) noexcept;
std::string_view to_string(Parameter parameter) noexcept;

}  // namespace mislmm
