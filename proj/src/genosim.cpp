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

#include "mislmm/genosim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mislmm/error.hpp"
#include "mislmm/grm.hpp"

namespace mislmm
{

void SimConfig::validate() const
{
    if (n < 2) throw InputError("SimConfig: n must be >= 2");
    if (p < 1) throw InputError("SimConfig: p must be >= 1");
    if (m < 1 || m > p) throw InputError("SimConfig: m must satisfy 1 <= m <= p");
    if (!(a > 0.0) || !std::isfinite(a)) throw InputError("SimConfig: a must be > 0");
    if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("SimConfig: b must be >= 0");
    if (!std::isfinite(mu)) throw InputError("SimConfig: mu must be finite");
    if (n_reps < 1) throw InputError("SimConfig: n_reps must be >= 1");
    for (double level : levels)
    {
        if (!(level > 0.0 && level < 1.0))
        {
            throw InputError("SimConfig: level " + std::to_string(level) + " outside (0, 1)");
        }
    }
}

std::vector<double> draw_allele_freqs(Index p, Rng& rng)
{
    std::uniform_real_distribution<double> unif(0.05, 0.5);
    std::vector<double> f(static_cast<std::size_t>(std::max<Index>(p, 0)));
    for (auto& v : f) v = unif(rng);
    return f;
}

namespace
{

void check_freqs(std::span<const double> freqs)
{
    for (std::size_t j = 0; j < freqs.size(); ++j)
    {
        if (!(freqs[j] > 0.0 && freqs[j] < 1.0))
        {
            throw InputError("draw_genotypes: frequency " + std::to_string(freqs[j])
                             + " of column " + std::to_string(j) + " outside (0, 1)");
        }
    }
}

void fill_column(std::span<std::int8_t> col, double f, std::uint64_t key)
{
    const double t0 = (1.0 - f) * (1.0 - f);
    const double t1 = t0 + 2.0 * f * (1.0 - f);
    CounterStream stream(key);
    for (auto& cell : col)
    {
        const double u = stream.uniform();
        cell = static_cast<std::int8_t>(u < t0 ? 0 : (u < t1 ? 1 : 2));
    }
}

}  // namespace

GenotypeMatrix draw_genotypes(std::span<const double> freqs, Index n, Rng& rng)
{
    check_freqs(freqs);
    const std::uint64_t key = rng();
    const auto p = static_cast<Index>(freqs.size());
    GenotypeMatrix g(n, p);
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < p; ++j)
    {
        fill_column(g.column(j), freqs[static_cast<std::size_t>(j)],
                    derive_seed(key, static_cast<std::uint64_t>(j)));
    }
    g.freqs.assign(freqs.begin(), freqs.end());
    return g;
}

GenotypeMatrix draw_genotypes_serial(std::span<const double> freqs, Index n, Rng& rng)
{
    check_freqs(freqs);
    const std::uint64_t key = rng();
    const auto p = static_cast<Index>(freqs.size());
    GenotypeMatrix g(n, p);
    for (Index j = 0; j < p; ++j)
    {
        fill_column(g.column(j), freqs[static_cast<std::size_t>(j)],
                    derive_seed(key, static_cast<std::uint64_t>(j)));
    }
    g.freqs.assign(freqs.begin(), freqs.end());
    return g;
}

std::vector<Index> causal_columns(const SimConfig& config, Rng& rng)
{
    std::vector<Index> cols(static_cast<std::size_t>(config.p));
    std::iota(cols.begin(), cols.end(), Index{0});
    if (config.random_causal)
    {
        // Partial Fisher-Yates; the chosen set is then sorted.
        for (Index k = 0; k < config.m; ++k)
        {
            std::uniform_int_distribution<Index> pick(k, config.p - 1);
            std::swap(cols[static_cast<std::size_t>(k)],
                      cols[static_cast<std::size_t>(pick(rng))]);
        }
        cols.resize(static_cast<std::size_t>(config.m));
        std::sort(cols.begin(), cols.end());
    }
    else
    {
        cols.resize(static_cast<std::size_t>(config.m));
    }
    return cols;
}

Eigen::VectorXd simulate_phenotype(const StandardizedDesign& design,
                                   const SimConfig& config,
                                   Rng& rng)
{
    Rng causal_rng = make_stream(rng(), 0);
    const auto causal = causal_columns(config, causal_rng);
    return simulate_phenotype(design, config, causal, rng);
}

Eigen::VectorXd simulate_phenotype(const StandardizedDesign& design,
                                   const SimConfig& config,
                                   std::span<const Index> causal,
                                   Rng& rng)
{
    if (design.n() != config.n)
    {
        throw InputError("simulate_phenotype: design has " + std::to_string(design.n())
                         + " rows but config.n = " + std::to_string(config.n));
    }
    if (design.genotypes().p() != config.p)
    {
        throw InputError("simulate_phenotype: design has " + std::to_string(design.genotypes().p())
                         + " columns but config.p = " + std::to_string(config.p));
    }
    if (static_cast<Index>(causal.size()) != config.m)
    {
        throw InputError("simulate_phenotype: causal set size does not match m");
    }

    const Index n = config.n;
    std::normal_distribution<double> std_normal(0.0, 1.0);
    const double sd_alpha = std::sqrt(config.sigma2_alpha());
    const double sd_eps = std::sqrt(config.a);

    // Effects first, then noise, so both come from disjoint stretches of the stream.
    Eigen::VectorXd alpha(config.m);
    for (Index k = 0; k < config.m; ++k) alpha(k) = sd_alpha * std_normal(rng);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(n, config.mu);
    for (Index i = 0; i < n; ++i) y(i) += sd_eps * std_normal(rng);

    if (sd_alpha > 0.0)
    {
        // z~_ij = scale (u_ij - mean_j) / sd_j, missing cells standardize to 0.
        const auto& g = design.genotypes();
        for (Index k = 0; k < config.m; ++k)
        {
            const Index j = causal[static_cast<std::size_t>(k)];
            if (design.retained_position(j) < 0) continue;
            const double mean = design.col_means()[static_cast<std::size_t>(j)];
            const double coef = alpha(k) * design.scale() / design.col_sds()[static_cast<std::size_t>(j)];
            const auto col = g.column(j);
            for (Index i = 0; i < n; ++i)
            {
                const auto u = col[static_cast<std::size_t>(i)];
                if (u != GenotypeMatrix::kMissing) y(i) += coef * (u - mean);
            }
        }
    }
    return y;
}

double true_heritability(const SimConfig& config)
{
    const double genetic = config.omega() * config.sigma2_alpha();
    const double total = genetic + config.a;
    if (!(total > 0.0))
    {
        throw InputError("true_heritability: both variance components are zero");
    }
    return genetic / total;
}

}  // namespace mislmm
