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

#include <string_view>

#include "mislmm/grm.hpp"
#include "mislmm/reml.hpp"

namespace mislmm
{

// Misspecification-robust variance estimates for the REML fit. Everything
// is a trace functional of P and Q = PKP at gamma-hat:
//
//   A = tr(QK) [tr(P^2) tr(QK) - tr(Q)^2] / [tr(P)^2 tr(PK)^2]
//   B = tr(QK)/tr(PK) - tr(Q)/tr(P)
//   C = tr[(P/tr(P) - PK/tr(PK))^2]
//
//   var(sigma2_eps) ~ 2 sigma^4 A / B^2
//   var(gamma)      ~ 2 C / B^2
//   var(h2)         ~ var(gamma) / (1 + gamma)^4
//
// Both factors follow from var(y'My | Z) = 2 tr(M Sigma M Sigma) with
// Sigma = sigma^2 V_gamma and PVP = P. The alternative forms without the
// square on sigma^2 and without the 2 on C are kept behind the mode enums.

struct AbcStats
{
    double a_hat = 0.0;
    double b_hat = 0.0;
    double c_hat = 0.0;
    // max(1, tr(QK)/tr(PK)); the scale that |B| is compared against.
    double b_scale = 1.0;
};

/// Scaling of the residual-variance estimator: 2 s^4 A/B^2 or 2 s^2 A/B^2.
enum class ExponentMode
{
    quartic,
    quadratic_literal,
};

/// Scaling of the variance-ratio estimator: 2 C/B^2 or C/B^2.
enum class GammaMode
{
    doubled,
    literal,
};

struct VarianceOptions
{
    ExponentMode exponent = ExponentMode::quartic;
    GammaMode gamma = GammaMode::doubled;
};

struct VarianceEstimates
{
    double var_sigma2_eps = 0.0;
    double var_gamma = 0.0;
    double var_h2 = 0.0;
    ExponentMode exponent_mode = ExponentMode::quartic;
    GammaMode gamma_mode = GammaMode::doubled;
};

AbcStats abc_statistics(const TraceBundle& tb);
AbcStats abc_statistics(const SpectralGrm& spec, double gamma_hat);

/// |B| below 1e-14 * b_scale.
bool degenerate(const AbcStats& abc) noexcept;

// The three estimators throw NumericalError on a degenerate B.
double var_sigma_eps(const RemlFit& fit, const AbcStats& abc,
                     ExponentMode mode = ExponentMode::quartic);
double var_gamma(const AbcStats& abc, GammaMode mode = GammaMode::doubled);
double var_h2(const RemlFit& fit, const AbcStats& abc, GammaMode mode = GammaMode::doubled);

VarianceEstimates estimate_variances(const RemlFit& fit, const AbcStats& abc,
                                     const VarianceOptions& opts = {});

std::string_view to_string(ExponentMode mode) noexcept;
std::string_view to_string(GammaMode mode) noexcept;
ExponentMode parse_exponent_mode(std::string_view text);
GammaMode parse_gamma_mode(std::string_view text);

}  // namespace mislmm
