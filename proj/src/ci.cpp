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

#include "mislmm/ci.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string>

#include <Eigen/Cholesky>

#include "mislmm/error.hpp"
#include "mislmm/rng.hpp"

namespace mislmm
{

Bounds parameter_bounds(Parameter parameter) noexcept
{
    if (parameter == Parameter::h2) return {0.0, 1.0};
    return {0.0, std::numeric_limits<double>::infinity()};
}

double normal_cdf(double x) noexcept
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_sf(double x) noexcept
{
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

namespace
{

// Wichura's AS 241 (PPND16), about 1e-16 relative accuracy.
double ppnd16(double p)
{
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425)
    {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r
                 + 45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r
              + 133.14166789178437745) * r + 3.387132872796366608);
        const double den =
            (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r
                 + 21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r
              + 42.313330701600911252) * r + 1.0);
        return q * num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0)
    {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                   + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                 + 3.64784832476320460504) * r + 5.7694972214606914055) * r
               + 4.6303378461565452959) * r + 1.42343711074968357734)
              / (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                     + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                   + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                 + 2.05319162663775882187) * r + 1.0);
    }
    else
    {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                   + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                 + 0.29656057182850489123) * r + 1.7848265399172913358) * r
               + 5.4637849111641143699) * r + 6.6579046435011037772)
              / (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                     + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                   + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                 + 0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double normal_pdf(double x) noexcept
{
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double normal_quantile(double t)
{
    if (!(t > 0.0 && t < 1.0))
    {
        throw InputError("normal_quantile: probability " + std::to_string(t) + " outside (0, 1)");
    }
    // Work in the lower tail, where 1 - t is exact for t >= 0.5.
    const bool upper = t > 0.5;
    const double p = upper ? 1.0 - t : t;
    double x = ppnd16(p);
    const double pdf = normal_pdf(x);
    if (pdf > 0.0) x -= (normal_cdf(x) - p) / pdf;
    return upper ? -x : x;
}

Interval normal_ci(double theta_hat, double v_hat, double lambda, Parameter parameter)
{
    if (!(v_hat >= 0.0)) throw InputError("normal_ci: variance must be >= 0");
    if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("normal_ci: lambda outside (0, 1)");
    const double half = -normal_quantile(0.5 * lambda) * std::sqrt(v_hat);
    return {theta_hat - half, theta_hat + half, 1.0 - lambda, IntervalKind::normal, parameter};
}

namespace
{

struct TruncatedLaw
{
    double mean;
    double sd;
    double a;  // standardized bounds
    double b;
    bool upper_tail;  // work with survival functions
    double base;      // Phi(a) or Q(a)
    double mass;
};

TruncatedLaw make_law(double mean, double var, Bounds bounds)
{
    if (!(var > 0.0) || !std::isfinite(var))
    {
        throw InputError("truncated normal: variance must be finite and > 0");
    }
    if (!(bounds.lo < bounds.hi)) throw InputError("truncated normal: need lo < hi");
    TruncatedLaw law{};
    law.mean = mean;
    law.sd = std::sqrt(var);
    law.a = (bounds.lo - mean) / law.sd;
    law.b = (bounds.hi - mean) / law.sd;
    law.upper_tail = law.a > 0.0;
    if (law.upper_tail)
    {
        law.base = normal_sf(law.a);
        law.mass = law.base - normal_sf(law.b);
    }
    else
    {
        law.base = normal_cdf(law.a);
        law.mass = normal_cdf(law.b) - law.base;
    }
    if (!(law.mass >= 1e-12))
    {
        throw NumericalError("truncated normal: truncation mass below 1e-12");
    }
    return law;
}

}  // namespace

double truncated_cdf(double x, double mean, double var, Bounds bounds)
{
    const auto law = make_law(mean, var, bounds);
    if (x <= bounds.lo) return 0.0;
    if (x >= bounds.hi) return 1.0;
    const double z = (x - mean) / law.sd;
    if (law.upper_tail) return (law.base - normal_sf(z)) / law.mass;
    return (normal_cdf(z) - law.base) / law.mass;
}

double truncated_quantile(double t, double mean, double var, Bounds bounds)
{
    if (!(t >= 0.0 && t <= 1.0)) throw InputError("truncated_quantile: t outside [0, 1]");
    const auto law = make_law(mean, var, bounds);
    if (t == 0.0) return bounds.lo;
    if (t == 1.0) return bounds.hi;
    double z;
    if (law.upper_tail)
    {
        z = -normal_quantile(law.base - t * law.mass);
    }
    else
    {
        z = normal_quantile(law.base + t * law.mass);
    }
    return std::clamp(mean + law.sd * z, bounds.lo, bounds.hi);
}

Interval truncated_ci(double theta_hat, double v_hat, double lambda, Bounds bounds,
                      Parameter parameter)
{
    if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("truncated_ci: lambda outside (0, 1)");
    return {truncated_quantile(0.5 * lambda, theta_hat, v_hat, bounds),
            truncated_quantile(1.0 - 0.5 * lambda, theta_hat, v_hat, bounds), 1.0 - lambda,
            IntervalKind::truncated, parameter};
}

double empirical_quantile(std::span<const double> sorted, double t)
{
    if (sorted.empty()) throw InputError("empirical_quantile: empty sample");
    if (!(t >= 0.0 && t <= 1.0)) throw InputError("empirical_quantile: t outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * t;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Interval ratio_interval(double theta_hat, std::vector<double> ratios, double lambda,
                        Parameter parameter)
{
    if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("ratio_interval: lambda outside (0, 1)");
    std::sort(ratios.begin(), ratios.end());
    const double q_lo = empirical_quantile(ratios, 0.5 * lambda);
    const double q_hi = empirical_quantile(ratios, 1.0 - 0.5 * lambda);
    const double inf = std::numeric_limits<double>::infinity();
    const double lower = q_hi > 0.0 ? theta_hat / q_hi : 0.0;
    const double upper = q_lo > 0.0 ? theta_hat / q_lo : inf;
    return {lower, upper, 1.0 - lambda, IntervalKind::bootstrap, parameter};
}

double parameter_value(const RemlFit& fit, Parameter parameter) noexcept
{
    switch (parameter)
    {
    case Parameter::sigma2_eps:
        return fit.sigma2_eps_hat;
    case Parameter::gamma:
        return fit.gamma_hat;
    case Parameter::h2:
        return fit.h2_hat;
    }
    return fit.sigma2_eps_hat;
}

std::vector<std::optional<RemlFit>> bootstrap_refits(const RemlFit& fit, const SpectralGrm& spec,
                                                     const BootstrapOptions& opts)
{
    if (fit.boundary) throw InputError("bootstrap: fit is at a search boundary");
    if (opts.n_boot < 100) throw InputError("bootstrap: need n_boot >= 100");

    // GLS fixed effects at gamma-hat, in the eigenbasis.
    const Eigen::VectorXd w = (1.0 + fit.gamma_hat * spec.eigvals.array()).inverse().matrix();
    const Eigen::MatrixXd xw = spec.rot_x.transpose() * w.asDiagonal();
    const Eigen::VectorXd beta = (xw * spec.rot_x).ldlt().solve(xw * spec.rot_y);
    const Eigen::VectorXd mean = spec.rot_x * beta;
    const Eigen::VectorXd sd =
        (fit.sigma2_eps_hat * (1.0 + fit.gamma_hat * spec.eigvals.array())).sqrt().matrix();

    const int nb = opts.n_boot;
    std::vector<std::optional<RemlFit>> refits(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, opts.threads))
    for (int b = 0; b < nb; ++b)
    {
        Rng rng = make_stream(opts.seed, static_cast<std::uint64_t>(b));
        std::normal_distribution<double> std_normal(0.0, 1.0);
        Eigen::VectorXd y(spec.n());
        for (Index i = 0; i < spec.n(); ++i) y(i) = mean(i) + sd(i) * std_normal(rng);
        try
        {
            refits[static_cast<std::size_t>(b)] =
                mislmm::fit(with_rotated_phenotype(spec, std::move(y)), opts.solver);
        }
        catch (const std::exception&)
        {
            refits[static_cast<std::size_t>(b)].reset();
        }
    }
    return refits;
}

BootstrapResult bootstrap_interval(const RemlFit& fit,
                                   std::span<const std::optional<RemlFit>> refits,
                                   Parameter parameter, double lambda)
{
    const double theta_hat = parameter_value(fit, parameter);
    if (!(theta_hat > 0.0)) throw NumericalError("bootstrap: estimate must be positive");
    BootstrapResult out;
    for (const auto& refit : refits)
    {
        if (refit) out.ratios.push_back(parameter_value(*refit, parameter) / theta_hat);
        else ++out.failures;
    }
    if (out.failures * 20 > static_cast<int>(refits.size()))
    {
        throw NumericalError("bootstrap: " + std::to_string(out.failures) + " of "
                             + std::to_string(refits.size()) + " refits failed");
    }
    std::sort(out.ratios.begin(), out.ratios.end());
    out.interval = ratio_interval(theta_hat, out.ratios, lambda, parameter);
    return out;
}

BootstrapResult bootstrap_ci(const RemlFit& fit, const SpectralGrm& spec, Parameter parameter,
                             const BootstrapOptions& opts)
{
    if (!(parameter_value(fit, parameter) > 0.0))
    {
        throw NumericalError("bootstrap: estimate must be positive");
    }
    const auto refits = bootstrap_refits(fit, spec, opts);
    return bootstrap_interval(fit, refits, parameter, opts.lambda);
}

std::string_view to_string(IntervalKind kind) noexcept
{
    switch (kind)
    {
    case IntervalKind::normal:
        return "normal";
    case IntervalKind::truncated:
        return "truncated";
    case IntervalKind::bootstrap:
        return "bootstrap";
    }
    return "normal";
}

std::string_view to_string(Parameter parameter) noexcept
{
    switch (parameter)
    {
    case Parameter::sigma2_eps:
        return "sigma2_eps";
    case Parameter::gamma:
        return "gamma";
    case Parameter::h2:
        return "h2";
    }
    return "sigma2_eps";
}

}  // namespace mislmm
