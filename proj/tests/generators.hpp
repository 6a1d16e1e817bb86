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

// Hand-rolled generators for property tests.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mislmm/genotype.hpp"
#include "oracles.hpp"

namespace gen
{

struct Instance
{
    int n = 0;
    int p = 0;
    std::vector<std::vector<int>> dosage;  // by column; -1 marks missing
    Eigen::MatrixXd x;                     // intercept first
    Eigen::VectorXd y;
    Eigen::MatrixXd k;                     // dense oracle GRM
    double gamma_true = 0.0;

    [[nodiscard]] mislmm::GenotypeMatrix genotypes() const
    {
        mislmm::GenotypeMatrix g(n, p);
        for (int j = 0; j < p; ++j)
        {
            for (int i = 0; i < n; ++i)
            {
                g(i, j) = dosage[j][i] < 0 ? mislmm::GenotypeMatrix::kMissing
                                           : static_cast<std::int8_t>(dosage[j][i]);
            }
        }
        return g;
    }
};

inline int uniform_int(std::mt19937_64& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// n in [n_lo, n_max], p in [p_lo, p_max], q in [1, q_max]; y drawn from the
/// working model with gamma log-uniform on [0.05, 20].
inline Instance random_instance(std::mt19937_64& rng, int n_max = 50, int p_max = 80,
                                int q_max = 3, double missing_rate = 0.0, int n_lo = 10,
                                int p_lo = 5)
{
    Instance in;
    in.n = uniform_int(rng, n_lo, n_max);
    in.p = uniform_int(rng, p_lo, p_max);
    const int q = uniform_int(rng, 1, q_max);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    in.dosage.assign(in.p, std::vector<int>(in.n, 0));
    for (int j = 0; j < in.p; ++j)
    {
        const double f = uniform(rng, 0.05, 0.5);
        for (int i = 0; i < in.n; ++i)
        {
            const double u = unit(rng);
            in.dosage[j][i] = u < (1 - f) * (1 - f) ? 0 : (u < 1 - f * f ? 1 : 2);
            if (missing_rate > 0.0 && unit(rng) < missing_rate) in.dosage[j][i] = -1;
        }
    }
    const Eigen::MatrixXd z = oracle::standardized(in.dosage, in.n);
    in.k = z * z.transpose();

    in.x.resize(in.n, q);
    in.x.col(0).setOnes();
    for (int c = 1; c < q; ++c)
    {
        for (int i = 0; i < in.n; ++i) in.x(i, c) = normal(rng);
    }

    in.gamma_true = std::exp(uniform(rng, std::log(0.05), std::log(20.0)));
    Eigen::VectorXd alpha(z.cols());
    for (Eigen::Index j = 0; j < alpha.size(); ++j) alpha(j) = std::sqrt(in.gamma_true) * normal(rng);
    Eigen::VectorXd beta(q);
    for (int c = 0; c < q; ++c) beta(c) = uniform(rng, -2.0, 2.0);
    in.y = in.x * beta + z * alpha;
    for (int i = 0; i < in.n; ++i) in.y(i) += normal(rng);
    return in;
}

}  // namespace gen
