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

#include "mislmm/reml.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "mislmm/brent.hpp"
#include "mislmm/error.hpp"

namespace mislmm
{

double estimating_gap(const TraceBundle& tb)
{
    if (tb.tr_pk <= 0.0)
    {
        // K vanishes on the residual space; y'Qy = 0 as well.
        return -tb.quad_p2 / tb.tr_p;
    }
    return tb.quad_q / tb.tr_pk - tb.quad_p2 / tb.tr_p;
}

double estimating_gap(const SpectralGrm& spec, double gamma)
{
    return estimating_gap(trace_bundle(spec, gamma));
}

double restricted_loglik(const SpectralGrm& spec, double gamma)
{
    const TraceBundle tb = trace_bundle(spec, gamma);
    const double dof = static_cast<double>(spec.n() - spec.q());
    return -0.5 * (dof * std::log(tb.quad_p / dof) + tb.logdet_v + tb.logdet_xvx);
}

GammaSolution solve_gamma(const SpectralGrm& spec, const SolverOptions& opts)
{
    if (!(opts.gamma_min > 0.0 && opts.gamma_max > opts.gamma_min) || opts.grid_points < 2)
    {
        throw InputError("solve_gamma: invalid search range");
    }
    const double residual = trace_bundle(spec, 0.0).quad_p;
    if (!(residual > 1e-24 * spec.rot_y.squaredNorm()))
    {
        throw InputError("solve_gamma: phenotype lies in the span of the covariates");
    }

    const int npts = opts.grid_points;
    std::vector<double> grid(static_cast<std::size_t>(npts));
    std::vector<double> gap(grid.size());
    const double log_lo = std::log(opts.gamma_min);
    const double step = (std::log(opts.gamma_max) - log_lo) / (npts - 1);
    for (int k = 0; k < npts; ++k)
    {
        const double gamma = k == 0 ? opts.gamma_min
                           : k == npts - 1 ? opts.gamma_max
                                           : std::exp(log_lo + step * k);
        grid[static_cast<std::size_t>(k)] = gamma;
        const double g = estimating_gap(spec, gamma);
        if (!std::isfinite(g))
        {
            throw NumericalError("solve_gamma: non-finite estimating equation at gamma = "
                                 + std::to_string(gamma));
        }
        gap[static_cast<std::size_t>(k)] = g;
    }

    GammaSolution best;
    double best_ll = -std::numeric_limits<double>::infinity();
    auto consider = [&](GammaSolution cand) {
        const double ll = restricted_loglik(spec, cand.gamma);
        if (ll > best_ll)
        {
            best_ll = ll;
            best = cand;
        }
    };

    int maxima = 0;
    auto g_of = [&spec](double gamma) { return estimating_gap(spec, gamma); };
    for (int k = 0; k + 1 < npts; ++k)
    {
        const double g0 = gap[static_cast<std::size_t>(k)];
        const double g1 = gap[static_cast<std::size_t>(k + 1)];
        // Restricted likelihood rises then falls: a local maximum inside.
        if (g0 > 0.0 && g1 <= 0.0)
        {
            ++maxima;
            const auto r = brent_root(g_of, grid[static_cast<std::size_t>(k)],
                                      grid[static_cast<std::size_t>(k + 1)], opts.rel_tol,
                                      opts.max_iter);
            consider({r.root, r.lower, r.upper, r.iterations, 0, false});
        }
    }
    if (gap.front() < 0.0)
    {
        consider({opts.gamma_min, opts.gamma_min, grid[1], 0, 0, true});
    }
    if (gap.back() > 0.0)
    {
        consider({opts.gamma_max, grid[static_cast<std::size_t>(npts - 2)], opts.gamma_max, 0, 0,
                  true});
    }
    if (!std::isfinite(best_ll))
    {
        throw NumericalError("solve_gamma: no admissible solution (estimating equation vanishes)");
    }
    best.sign_changes = maxima;
    return best;
}

double sigma_eps(const SpectralGrm& spec, double gamma)
{
    const TraceBundle tb = trace_bundle(spec, gamma);
    if (!(tb.tr_p > 0.0))
    {
        throw NumericalError("sigma_eps: tr(P) is not positive");
    }
    return tb.quad_p2 / tb.tr_p;
}

RemlFit make_fit(double gamma_hat, double sigma2_eps_hat)
{
    RemlFit f;
    f.gamma_hat = gamma_hat;
    f.sigma2_eps_hat = sigma2_eps_hat;
    f.sigma2_alpha_hat = gamma_hat * sigma2_eps_hat;
    f.h2_hat = gamma_hat / (1.0 + gamma_hat);
    return f;
}

RemlFit fit(const SpectralGrm& spec, const SolverOptions& opts)
{
    const GammaSolution sol = solve_gamma(spec, opts);
    const double s2 = sigma_eps(spec, sol.gamma);
    if (!(s2 > 0.0) || !std::isfinite(s2))
    {
        throw NumericalError("fit: residual variance estimate is not positive");
    }
    RemlFit f = make_fit(sol.gamma, s2);
    f.iterations = sol.iterations;
    f.bracket_lo = sol.bracket_lo;
    f.bracket_hi = sol.bracket_hi;
    f.sign_changes = sol.sign_changes;
    f.boundary = sol.boundary;
    return f;
}

}  // namespace mislmm
