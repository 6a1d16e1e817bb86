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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "mislmm/error.hpp"
#include "mislmm/genosim.hpp"
#include "mislmm/grm.hpp"
#include "mislmm/rng.hpp"

using namespace mislmm;  // NOLINT
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

SimConfig small_config()
{
    SimConfig c;
    c.n = 200;
    c.p = 300;
    c.m = 30;
    c.a = 0.4;
    c.b = 0.6;
    c.seed = 99;
    return c;
}

double sample_var(const Eigen::VectorXd& y)
{
    const double mean = y.mean();
    return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

}  // namespace

TEST_CASE("derive_seed separates streams", "[genosim]")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 20; ++s)
    {
        for (std::uint64_t i = 0; i < 50; ++i) seen.insert(derive_seed(s, i));
    }
    REQUIRE(seen.size() == 1000);
    REQUIRE(derive_seed(1, 2, 3) == derive_seed(derive_seed(1, 2), 3));

    CounterStream a(17);
    CounterStream b(17);
    for (int k = 0; k < 100; ++k)
    {
        const double u = a.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        REQUIRE(u == b.uniform());
    }
}

TEST_CASE("draw_allele_freqs", "[genosim]")
{
    Rng rng(1);
    SECTION("empty")
    {
        REQUIRE(draw_allele_freqs(0, rng).empty());
    }
    SECTION("range")
    {
        const auto f = draw_allele_freqs(10000, rng);
        REQUIRE(f.size() == 10000);
        for (double v : f)
        {
            REQUIRE(v >= 0.05);
            REQUIRE(v <= 0.5);
        }
    }
    SECTION("mean of a large sample")
    {
        const auto f = draw_allele_freqs(100000, rng);
        const double mean = std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
        REQUIRE_THAT(mean, WithinAbs(0.275, 0.005));
        REQUIRE(*std::min_element(f.begin(), f.end()) >= 0.05);
    }
    SECTION("deterministic")
    {
        Rng r1(5);
        Rng r2(5);
        REQUIRE(draw_allele_freqs(100, r1) == draw_allele_freqs(100, r2));
    }
}

TEST_CASE("draw_genotypes follows Hardy-Weinberg proportions", "[genosim]")
{
    constexpr Index n = 100000;
    Rng rng(2024);
    const std::vector<double> f{0.5, 0.2, 1e-9};
    const GenotypeMatrix g = draw_genotypes(f, n, rng);
    REQUIRE(g.n() == n);
    REQUIRE(g.p() == 3);
    REQUIRE_FALSE(g.has_missing());

    std::array<double, 3> counts{};
    double sum_02 = 0.0;
    for (Index i = 0; i < n; ++i)
    {
        counts[static_cast<std::size_t>(g(i, 0))] += 1.0;
        sum_02 += g(i, 1);
    }
    REQUIRE_THAT(counts[0] / n, WithinAbs(0.25, 0.01));
    REQUIRE_THAT(counts[1] / n, WithinAbs(0.50, 0.01));
    REQUIRE_THAT(counts[2] / n, WithinAbs(0.25, 0.01));
    REQUIRE_THAT(sum_02 / n, WithinAbs(0.4, 0.01));

    Index nonzero = 0;
    for (Index i = 0; i < n; ++i) nonzero += g(i, 2) != 0;
    REQUIRE(nonzero == 0);
}

TEST_CASE("column means converge to 2f", "[genosim]")
{
    constexpr Index n = 100000;
    Rng rng(77);
    const auto f = draw_allele_freqs(20, rng);
    const GenotypeMatrix g = draw_genotypes(f, n, rng);
    for (Index j = 0; j < g.p(); ++j)
    {
        double sum = 0.0;
        for (auto u : g.column(j)) sum += u;
        const double fj = f[static_cast<std::size_t>(j)];
        const double tol = 3.0 * std::sqrt(2.0 * fj * (1.0 - fj) / n) * 2.0;
        REQUIRE_THAT(sum / n, WithinAbs(2.0 * fj, tol));
    }
}

TEST_CASE("draw_genotypes rejects degenerate frequencies", "[genosim]")
{
    Rng rng(3);
    const std::vector<double> zero{0.3, 0.0};
    const std::vector<double> one{1.0};
    REQUIRE_THROWS_AS(draw_genotypes(zero, 10, rng), InputError);
    REQUIRE_THROWS_AS(draw_genotypes(one, 10, rng), InputError);
}

TEST_CASE("parallel genotype sampler matches the serial reference", "[genosim]")
{
    Rng freq_rng(8);
    const auto f = draw_allele_freqs(257, freq_rng);
    Rng r1(11);
    Rng r2(11);
    const GenotypeMatrix a = draw_genotypes(f, 123, r1);
    const GenotypeMatrix b = draw_genotypes_serial(f, 123, r2);
    for (Index j = 0; j < a.p(); ++j)
    {
        REQUIRE(std::equal(a.column(j).begin(), a.column(j).end(), b.column(j).begin()));
    }
    REQUIRE(r1() == r2());
}

TEST_CASE("SimConfig validation", "[genosim]")
{
    SimConfig c = small_config();
    REQUIRE_NOTHROW(c.validate());
    REQUIRE_THAT(c.sigma2_alpha(), WithinRel(0.6 * 300 / 30, 1e-15));
    REQUIRE_THAT(c.omega(), WithinRel(0.1, 1e-15));

    auto broken = [&](auto edit) {
        SimConfig d = small_config();
        edit(d);
        return d;
    };
    REQUIRE_THROWS_AS(broken([](SimConfig& d) { d.n = 1; }).validate(), InputError);
    REQUIRE_THROWS_AS(broken([](SimConfig& d) { d.m = 0; }).validate(), InputError);
    REQUIRE_THROWS_AS(broken([](SimConfig& d) { d.m = d.p + 1; }).validate(), InputError);
    REQUIRE_THROWS_AS(broken([](SimConfig& d) { d.a = 0.0; }).validate(), InputError);
    REQUIRE_THROWS_AS(broken([](SimConfig& d) { d.b = -0.1; }).validate(), InputError);
    REQUIRE_THROWS_AS(broken([](SimConfig& d) { d.levels = {0.05, 1.0}; }).validate(), InputError);
}

TEST_CASE("true_heritability", "[genosim]")
{
    SimConfig c = small_config();
    c.a = 0.2;
    c.b = 0.8;
    REQUIRE_THAT(true_heritability(c), WithinAbs(0.8, 1e-15));
    c.a = 0.4;
    c.b = 0.6;
    REQUIRE_THAT(true_heritability(c), WithinAbs(0.6, 1e-15));
    c.b = 0.0;
    REQUIRE(true_heritability(c) == 0.0);

    for (double scale : {0.01, 3.0, 250.0})
    {
        SimConfig s = small_config();
        s.a *= scale;
        s.b *= scale;
        REQUIRE_THAT(true_heritability(s), WithinAbs(true_heritability(small_config()), 1e-14));
    }

    c.a = 0.0;
    REQUIRE_THROWS_AS(true_heritability(c), InputError);
}

TEST_CASE("causal_columns", "[genosim]")
{
    SimConfig c = small_config();
    Rng rng(4);
    const auto first = causal_columns(c, rng);
    REQUIRE(first.size() == 30);
    for (Index k = 0; k < 30; ++k) REQUIRE(first[static_cast<std::size_t>(k)] == k);

    c.random_causal = true;
    const auto random = causal_columns(c, rng);
    REQUIRE(random.size() == 30);
    REQUIRE(std::is_sorted(random.begin(), random.end()));
    REQUIRE(std::adjacent_find(random.begin(), random.end()) == random.end());
    REQUIRE(random.back() < c.p);
}

TEST_CASE("simulate_phenotype", "[genosim]")
{
    SECTION("no genetic signal leaves mu plus noise")
    {
        SimConfig c = small_config();
        c.n = 5000;
        c.p = 50;
        c.m = 5;
        c.b = 0.0;
        c.mu = 3.0;
        Rng rng(10);
        const auto design = standardize(draw_genotypes(draw_allele_freqs(c.p, rng), c.n, rng));
        const Eigen::VectorXd y = simulate_phenotype(design, c, rng);
        REQUIRE_THAT(y.mean(), WithinAbs(3.0, 0.05));
        REQUIRE_THAT(sample_var(y), WithinAbs(0.4, 0.03));
    }
    SECTION("zero noise and no signal gives a constant")
    {
        SimConfig c = small_config();
        c.b = 0.0;
        c.a = 1e-300;
        c.mu = -1.5;
        Rng rng(12);
        const auto design = standardize(draw_genotypes(draw_allele_freqs(c.p, rng), c.n, rng));
        const Eigen::VectorXd y = simulate_phenotype(design, c, rng);
        REQUIRE((y.array() + 1.5).abs().maxCoeff() < 1e-140);
    }
    SECTION("total variance is a + b")
    {
        SimConfig c;
        c.n = 5000;
        c.p = 1000;
        c.m = 100;
        c.a = 0.4;
        c.b = 0.6;
        c.mu = 0.0;
        Rng rng(13);
        const auto design = standardize(draw_genotypes(draw_allele_freqs(c.p, rng), c.n, rng));
        const Eigen::VectorXd y = simulate_phenotype(design, c, rng);
        REQUIRE_THAT(sample_var(y), WithinAbs(1.0, 0.1));
    }
    SECTION("genetic part equals Ztilde_(1) alpha_(1)")
    {
        SimConfig c = small_config();
        Rng rng(14);
        const auto design = standardize(draw_genotypes(draw_allele_freqs(c.p, rng), c.n, rng));
        std::vector<Index> causal(static_cast<std::size_t>(c.m));
        std::iota(causal.begin(), causal.end(), Index{0});

        Rng r1(15);
        const Eigen::VectorXd y = simulate_phenotype(design, c, causal, r1);
        // Replay the stream: effects first, then noise.
        Rng r2(15);
        std::normal_distribution<double> z(0.0, 1.0);
        Eigen::VectorXd alpha(c.m);
        for (Index k = 0; k < c.m; ++k) alpha(k) = std::sqrt(c.sigma2_alpha()) * z(r2);
        Eigen::VectorXd expect(c.n);
        for (Index i = 0; i < c.n; ++i) expect(i) = c.mu + std::sqrt(c.a) * z(r2);
        REQUIRE(design.excluded_cols().empty());
        const Eigen::MatrixXd zt = design.dense();
        expect += zt.leftCols(c.m) * alpha;
        REQUIRE((y - expect).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("dimension mismatch")
    {
        SimConfig c = small_config();
        Rng rng(16);
        const auto design = standardize(draw_genotypes(draw_allele_freqs(c.p, rng), c.n + 1, rng));
        REQUIRE_THROWS_AS(simulate_phenotype(design, c, rng), InputError);
    }
}

TEST_CASE("permuting non-causal columns does not change y", "[genosim]")
{
    SimConfig c = small_config();
    Rng rng(21);
    GenotypeMatrix g = draw_genotypes(draw_allele_freqs(c.p, rng), c.n, rng);
    std::vector<Index> order(static_cast<std::size_t>(c.p));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin() + c.m, order.end(), rng);
    const GenotypeMatrix permuted = g.select_columns(order);

    const auto d1 = standardize(std::move(g));
    const auto d2 = standardize(permuted);
    Rng r1(22);
    Rng r2(22);
    std::vector<Index> causal(static_cast<std::size_t>(c.m));
    std::iota(causal.begin(), causal.end(), Index{0});
    const Eigen::VectorXd y1 = simulate_phenotype(d1, c, causal, r1);
    const Eigen::VectorXd y2 = simulate_phenotype(d2, c, causal, r2);
    REQUIRE((y1 - y2).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("identical seeds reproduce genotypes and phenotypes", "[genosim]")
{
    SimConfig c = small_config();
    auto run = [&] {
        Rng rng(c.seed);
        auto design = standardize(draw_genotypes(draw_allele_freqs(c.p, rng), c.n, rng));
        Eigen::VectorXd y = simulate_phenotype(design, c, rng);
        return std::make_pair(design.dense(), y);
    };
    const auto [z1, y1] = run();
    const auto [z2, y2] = run();
    REQUIRE(z1 == z2);
    REQUIRE(y1 == y2);
}
