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

#include "mislmm/varest.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mislmm/error.hpp"

namespace mislmm
{

AbcStats abc_statistics(const TraceBundle& tb)
{
    AbcStats s;
    const double tp = tb.tr_p;
    const double tpk = tb.tr_pk;
    if (!(tp > 0.0)) throw NumericalError("abc_statistics: tr(P) is not positive");

    // With K = 0 on the residual space every K-trace vanishes.
    const double qk_over_pk = tpk > 0.0 ? tb.tr_qk / tpk : 0.0;
    s.b_scale = std::max(1.0, qk_over_pk);
    s.b_hat = qk_over_pk - tb.tr_q / tp;
    if (tpk > 0.0)
    {
        s.a_hat = tb.tr_qk * (tb.tr_p2 * tb.tr_qk - tb.tr_q * tb.tr_q) / (tp * tp * tpk * tpk);
        s.c_hat = tb.tr_p2 / (tp * tp) - 2.0 * tb.tr_q / (tp * tpk) + tb.tr_qk / (tpk * tpk);
    }
    else
    {
        s.a_hat = 0.0;
        s.c_hat = tb.tr_p2 / (tp * tp);
    }
    return s;
}

AbcStats abc_statistics(const SpectralGrm& spec, double gamma_hat)
{
    return abc_statistics(trace_bundle(spec, gamma_hat));
}

bool degenerate(const AbcStats& abc) noexcept
{
    return !(std::abs(abc.b_hat) >= 1e-14 * abc.b_scale);
}

namespace
{

void require_nondegenerate(const AbcStats& abc, const char* who)
{
    if (degenerate(abc))
    {
        throw NumericalError(std::string(who) + ": degenerate denominator |B| = "
                             + std::to_string(std::abs(abc.b_hat))
                             + "; variance approximation undefined");
    }
}

}  // namespace

double var_sigma_eps(const RemlFit& fit, const AbcStats& abc, ExponentMode mode)
{
    require_nondegenerate(abc, "var_sigma_eps");
    const double s2 = fit.sigma2_eps_hat;
    const double factor = mode == ExponentMode::quartic ? s2 * s2 : s2;
    return std::max(0.0, 2.0 * factor * abc.a_hat / (abc.b_hat * abc.b_hat));
}

double var_gamma(const AbcStats& abc, GammaMode mode)
{
    require_nondegenerate(abc, "var_gamma");
    const double factor = mode == GammaMode::doubled ? 2.0 : 1.0;
    return std::max(0.0, factor * abc.c_hat / (abc.b_hat * abc.b_hat));
}

double var_h2(const RemlFit& fit, const AbcStats& abc, GammaMode mode)
{
    const double g1 = 1.0 + fit.gamma_hat;
    return var_gamma(abc, mode) / (g1 * g1 * g1 * g1);
}

VarianceEstimates estimate_variances(const RemlFit& fit, const AbcStats& abc,
                                     const VarianceOptions& opts)
{
    VarianceEstimates v;
    v.var_sigma2_eps = var_sigma_eps(fit, abc, opts.exponent);
    v.var_gamma = var_gamma(abc, opts.gamma);
    v.var_h2 = var_h2(fit, abc, opts.gamma);
    v.exponent_mode = opts.exponent;
    v.gamma_mode = opts.gamma;
    return v;
}

std::string_view to_string(ExponentMode mode) noexcept
{
    return mode == ExponentMode::quartic ? "quartic" : "quadratic-literal";
}

std::string_view to_string(GammaMode mode) noexcept
{
    return mode == GammaMode::doubled ? "doubled" : "literal";
}

ExponentMode parse_exponent_mode(std::string_view text)
{
    if (text == "quartic") return ExponentMode::quartic;
    if (text == "quadratic-literal") return ExponentMode::quadratic_literal;
    throw InputError("unknown exponent mode '" + std::string(text)
                     + "' (expected quartic or quadratic-literal)");
}

GammaMode parse_gamma_mode(std::string_view text)
{
    if (text == "doubled") return GammaMode::doubled;
    if (text == "literal") return GammaMode::literal;
    throw InputError("unknown gamma mode '" + std::string(text) + "' (expected doubled or literal)");
}

}  // namespace mislmm
