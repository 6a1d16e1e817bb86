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

#include "mislmm/mcstudy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "blas_threads.hpp"
#include "mislmm/error.hpp"
#include "mislmm/grm.hpp"

namespace mislmm
{

namespace
{

constexpr std::uint64_t kGenotypeStream = 0;
constexpr std::uint64_t kPhenotypeStream = 1;
constexpr std::uint64_t kCausalStream = 2;
constexpr std::uint64_t kFixedGenotypeStream = 0x6765'6e6f'7479'7065ULL;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void add_intervals(ReplicationResult& r, Parameter parameter, double theta_hat, double v_hat,
                   double truth, std::span<const double> levels)
{
    for (double lambda : levels)
    {
        const Interval n_ci = normal_ci(theta_hat, v_hat, lambda, parameter);
        r.intervals.push_back({n_ci, lambda, n_ci.contains(truth)});
        if (v_hat > 0.0)
        {
            try
            {
                const Interval t_ci =
                    truncated_ci(theta_hat, v_hat, lambda, parameter_bounds(parameter), parameter);
                r.intervals.push_back({t_ci, lambda, t_ci.contains(truth)});
            }
            catch (const NumericalError&)
            {
                // No truncated interval when the truncation mass vanishes.
            }
        }
    }
}

}  // namespace

const IntervalRecord* ReplicationResult::find(Parameter parameter, double lambda,
                                              IntervalKind kind) const noexcept
{
    for (const auto& rec : intervals)
    {
        if (rec.interval.parameter == parameter && rec.interval.kind == kind && rec.lambda == lambda)
        {
            return &rec;
        }
    }
    return nullptr;
}

SimulatedReplication simulate_replication(const SimConfig& config, std::size_t rep_index)
{
    config.validate();
    const std::uint64_t rep_seed = derive_seed(config.seed, rep_index);

    Rng geno_rng = config.fixed_genotypes ? make_stream(config.seed, kFixedGenotypeStream)
                                          : make_stream(rep_seed, kGenotypeStream);
    const auto freqs = draw_allele_freqs(config.p, geno_rng);
    StandardizedDesign design = standardize(draw_genotypes(freqs, config.n, geno_rng));

    Rng causal_rng = make_stream(rep_seed, kCausalStream);
    auto causal = causal_columns(config, causal_rng);
    Rng pheno_rng = make_stream(rep_seed, kPhenotypeStream);
    Eigen::VectorXd y = simulate_phenotype(design, config, causal, pheno_rng);
    return {std::move(design), std::move(y), std::move(causal)};
}

ReplicationResult run_replication(const SimConfig& config, std::size_t rep_index,
                                  const ReplicationOptions& opts)
{
    ReplicationResult r;
    r.rep_index = rep_index;
    try
    {
        config.validate();
        SimulatedReplication sim = simulate_replication(config, rep_index);
        const StandardizedDesign& design = sim.design;
        Eigen::VectorXd& y = sim.phenotype;
        if (opts.phenotype_hook) opts.phenotype_hook(y);

        const SpectralGrm spec = spectral(design, intercept_only(config.n), y);
        r.fit = fit(spec, opts.solver);

        const AbcStats abc = abc_statistics(spec, r.fit.gamma_hat);
        r.v_sigma2_eps = var_sigma_eps(r.fit, abc, ExponentMode::quartic);
        r.v_sigma2_eps_literal = var_sigma_eps(r.fit, abc, ExponentMode::quadratic_literal);
        r.v_gamma = var_gamma(abc, GammaMode::doubled);
        r.v_gamma_literal = var_gamma(abc, GammaMode::literal);
        r.v_h2 = var_h2(r.fit, abc, GammaMode::doubled);
        r.v_h2_literal = var_h2(r.fit, abc, GammaMode::literal);

        const double v_s2 = opts.variance.exponent == ExponentMode::quartic ? r.v_sigma2_eps
                                                                            : r.v_sigma2_eps_literal;
        const double v_h2 = opts.variance.gamma == GammaMode::doubled ? r.v_h2 : r.v_h2_literal;
        add_intervals(r, Parameter::sigma2_eps, r.fit.sigma2_eps_hat, v_s2, config.a, config.levels);
        add_intervals(r, Parameter::h2, r.fit.h2_hat, v_h2, true_heritability(config), config.levels);
    }
    catch (const std::exception& e)
    {
        r.failed = true;
        r.failure = e.what();
        r.intervals.clear();
    }
    return r;
}

double sample_variance(std::span<const double> values)
{
    if (values.size() < 2) return kNaN;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(values.size() - 1);
}

namespace
{

ParameterSummary summarize_parameter(std::span<const ReplicationResult* const> ok,
                                     Parameter parameter, double truth,
                                     std::span<const double> levels, ExponentMode mode,
                                     GammaMode gamma_mode)
{
    ParameterSummary s;
    s.parameter = parameter;
    s.truth = truth;
    std::vector<double> theta;
    std::vector<double> v;
    for (const auto* r : ok)
    {
        theta.push_back(parameter_value(r->fit, parameter));
        if (parameter == Parameter::sigma2_eps)
        {
            v.push_back(mode == ExponentMode::quartic ? r->v_sigma2_eps : r->v_sigma2_eps_literal);
        }
        else
        {
            v.push_back(gamma_mode == GammaMode::doubled ? r->v_h2 : r->v_h2_literal);
        }
    }
    double sum_theta = 0.0;
    for (double t : theta) sum_theta += t;
    s.mean_theta = sum_theta / static_cast<double>(theta.size());
    double sum_v = 0.0;
    for (double x : v) sum_v += x;
    s.mean_v = sum_v / static_cast<double>(v.size());
    s.var_theta_hat = sample_variance(theta);
    const double var_v = sample_variance(v);
    s.sd_v = std::isnan(var_v) ? kNaN : std::sqrt(var_v);
    s.pct_rb = 100.0 * (s.mean_v - s.var_theta_hat) / s.var_theta_hat;

    for (IntervalKind kind : {IntervalKind::normal, IntervalKind::truncated})
    {
        auto& out = kind == IntervalKind::normal ? s.n_lambda : s.t_lambda;
        for (double lambda : levels)
        {
            Coverage c;
            c.lambda = lambda;
            for (const auto* r : ok)
            {
                if (const auto* rec = r->find(parameter, lambda, kind))
                {
                    ++c.count;
                    if (rec->covered) ++c.hits;
                }
            }
            c.rate = c.count == 0 ? kNaN
                                  : static_cast<double>(c.hits) / static_cast<double>(c.count);
            out.push_back(c);
        }
    }
    return s;
}

}  // namespace

McSummary summarize(std::span<const ReplicationResult> results, const SimConfig& config,
                    ExponentMode mode, GammaMode gamma_mode)
{
    McSummary s;
    s.config = config;
    std::vector<const ReplicationResult*> ok;
    for (const auto& r : results)
    {
        if (r.failed)
        {
            ++s.failure_count;
            continue;
        }
        ok.push_back(&r);
        if (r.fit.boundary) ++s.boundary_count;
    }
    // Reduce in replication order.
    std::stable_sort(ok.begin(), ok.end(), [](const auto* x, const auto* y) {
        return x->rep_index < y->rep_index;
    });
    s.rep_count = ok.size();
    if (ok.empty())
    {
        throw NumericalError("summarize: all " + std::to_string(results.size())
                             + " replications failed");
    }
    s.sigma2_eps = summarize_parameter(ok, Parameter::sigma2_eps, config.a, config.levels, mode,
                                       gamma_mode);
    s.h2 = summarize_parameter(ok, Parameter::h2, true_heritability(config), config.levels, mode,
                               gamma_mode);
    return s;
}

std::vector<ReplicationResult> run_replications(const SimConfig& config, int parallelism,
                                                const ReplicationOptions& opts)
{
    detail::ScopedBlasThreads blas(1);
    const int reps = std::max(config.n_reps, 0);
    std::vector<ReplicationResult> out(static_cast<std::size_t>(reps));
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, parallelism))
    for (int r = 0; r < reps; ++r)
    {
        out[static_cast<std::size_t>(r)] = run_replication(config, static_cast<std::size_t>(r), opts);
    }
    return out;
}

std::vector<ReplicationResult> run_replications_serial(const SimConfig& config,
                                                       const ReplicationOptions& opts)
{
    detail::ScopedBlasThreads blas(1);
    std::vector<ReplicationResult> out;
    for (int r = 0; r < config.n_reps; ++r)
    {
        out.push_back(run_replication(config, static_cast<std::size_t>(r), opts));
    }
    return out;
}

std::vector<ScenarioOutcome> run_study(std::span<const SimConfig> grid, int parallelism,
                                       const ReplicationOptions& opts)
{
    if (grid.empty()) throw InputError("run_study: empty scenario grid");
    for (const auto& c : grid) c.validate();

    struct Task
    {
        std::size_t scenario;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<ReplicationResult>> results(grid.size());
    for (std::size_t s = 0; s < grid.size(); ++s)
    {
        results[s].resize(static_cast<std::size_t>(grid[s].n_reps));
        for (std::size_t r = 0; r < results[s].size(); ++r) tasks.push_back({s, r});
    }

    detail::ScopedBlasThreads blas(1);
    const auto ntasks = static_cast<long>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, parallelism))
    for (long t = 0; t < ntasks; ++t)
    {
        const Task task = tasks[static_cast<std::size_t>(t)];
        results[task.scenario][task.rep] = run_replication(grid[task.scenario], task.rep, opts);
    }

    std::vector<ScenarioOutcome> out;
    for (std::size_t s = 0; s < grid.size(); ++s)
    {
        ScenarioOutcome o;
        try
        {
            o.summary = summarize(results[s], grid[s], opts.variance.exponent, opts.variance.gamma);
        }
        catch (const NumericalError& e)
        {
            o.failed = true;
            o.error = e.what();
            o.summary.config = grid[s];
            o.summary.failure_count = results[s].size();
        }
        o.summary.scenario = s;
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace mislmm
