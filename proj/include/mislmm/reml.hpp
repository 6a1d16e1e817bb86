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

#include "mislmm/grm.hpp"

namespace mislmm
{

struct SolverOptions
{
    double gamma_min = 1e-8;
    double gamma_max = 1e6;
    int grid_points = 141;  // ten per decade over [1e-8, 1e6]
    double rel_tol = 1e-10;
    int max_iter = 200;
};

/// Result of the variance-ratio search.
struct GammaSolution
{
    double gamma = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    int iterations = 0;
    int sign_changes = 0;  // local maxima of the restricted likelihood found on the grid
    bool boundary = false;
};

/// REML estimates under the working single-component model.
struct RemlFit
{
    double gamma_hat = 0.0;
    double sigma2_eps_hat = 0.0;
    double sigma2_alpha_hat = 0.0;
    double h2_hat = 0.0;
    int iterations = 0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    int sign_changes = 0;
    bool boundary = false;
};

/// g(gamma) = y'Qy / tr(PK) - y'P^2 y / tr(P). Zero at a REML stationary
/// point; positive where the restricted likelihood increases in gamma.
double estimating_gap(const SpectralGrm& spec, double gamma);
double estimating_gap(const TraceBundle& tb);

/// Restricted log-likelihood with sigma^2 profiled out, up to a constant:
/// -0.5 [(n-q) log(y'Py/(n-q)) + log det V + log det(X'V^{-1}X)].
double restricted_loglik(const SpectralGrm& spec, double gamma);

/// Sign changes of g on a geometric grid, each refined by Brent. When several
/// roots are maxima of the restricted likelihood, the one with the largest
/// likelihood wins; boundary optima are flagged.
GammaSolution solve_gamma(const SpectralGrm& spec, const SolverOptions& opts = {});

/// y'P^2 y / tr(P) at gamma.
double sigma_eps(const SpectralGrm& spec, double gamma);

RemlFit fit(const SpectralGrm& spec, const SolverOptions& opts = {});

/// Assemble a fit from gamma and sigma^2_eps.
RemlFit make_fit(double gamma_hat, double sigma2_eps_hat);

}  // namespace mislmm
