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
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mislmm/genotype.hpp"
#include "mislmm/rng.hpp"

namespace mislmm
{

class StandardizedDesign;

/// One simulation scenario. The true model has residual variance a and
/// m causal SNPs with effect variance b * p / m, so that the genetic
/// share of phenotypic variance is b / (a + b) whatever m is.
struct SimConfig
{
    Index n = 0;
    Index p = 0;
    Index m = 0;
    double a = 1.0;  // sigma^2_eps
    double b = 0.0;
    double mu = 0.0;
    std::uint64_t seed = 0;
    int n_reps = 300;
    std::vector<double> levels{0.01, 0.05, 0.1};
    // Causal SNPs are the first m columns unless this is set.
    bool random_causal = false;
    // Draw one genotype matrix per scenario instead of one per replication.
    bool fixed_genotypes = false;

    [[nodiscard]] double sigma2_eps() const noexcept { return a; }
    [[nodiscard]] double sigma2_alpha() const noexcept
    {
        return b * static_cast<double>(p) / static_cast<double>(m);
    }
    [[nodiscard]] double omega() const noexcept
    {
        return static_cast<double>(m) / static_cast<double>(p);
    }

    /// Throws InputError when an invariant is violated.
    void validate() const;
};

/// p draws from Uniform[0.05, 0.5].
std::vector<double> draw_allele_freqs(Index p, Rng& rng);

/// Hardy-Weinberg genotypes, independent across cells. Column j uses its own
/// counter stream keyed from a single draw of `rng`, so the result does not
/// depend on how columns are scheduled across threads.
GenotypeMatrix draw_genotypes(std::span<const double> freqs, Index n, Rng& rng);

/// Serial reference for draw_genotypes; produces identical output.
GenotypeMatrix draw_genotypes_serial(std::span<const double> freqs, Index n, Rng& rng);

/// Original column indices of the causal SNPs.
std::vector<Index> causal_columns(const SimConfig& config, Rng& rng);

/// y = mu 1 + Ztilde_(1) alpha_(1) + eps over the causal columns. Causal
/// columns excluded from the design for zero variance contribute nothing.
Eigen::VectorXd simulate_phenotype(const StandardizedDesign& design,
                                   const SimConfig& config,
                                   Rng& rng);

Eigen::VectorXd simulate_phenotype(const StandardizedDesign& design,
                                   const SimConfig& config,
                                   std::span<const Index> causal,
                                   Rng& rng);

/// (m/p) sigma^2_alpha / ((m/p) sigma^2_alpha + sigma^2_eps) = b / (a + b).
double true_heritability(const SimConfig& config);

}  // namespace mislmm
