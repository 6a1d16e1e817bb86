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
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "mislmm/error.hpp"
#include "mislmm/mcstudy.hpp"
#include "mislmm/study_config.hpp"

using namespace mislmm;  // NOLINT
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

SimConfig tiny(std::uint64_t seed = 1)
{
    SimConfig c;
    c.n = 80;
    c.p = 160;
    c.m = 16;
    c.a = 0.4;
    c.b = 0.6;
    c.seed = seed;
    c.n_reps = 12;
    return c;
}

ReplicationResult synthetic(std::size_t index, double theta, double v)
{
    ReplicationResult r;
    r.rep_index = index;
    r.fit.sigma2_eps_hat = theta;
    r.fit.h2_hat = theta / 10.0;
    r.v_sigma2_eps = v;
    r.v_h2 = v / 100.0;
    return r;
}

bool same(const ReplicationResult& a, const ReplicationResult& b)
{
    if (a.failed != b.failed || a.intervals.size() != b.intervals.size()) return false;
    if (a.fit.gamma_hat != b.fit.gamma_hat || a.fit.sigma2_eps_hat != b.fit.sigma2_eps_hat) return false;
    if (a.v_sigma2_eps != b.v_sigma2_eps || a.v_h2 != b.v_h2) return false;
    for (std::size_t k = 0; k < a.intervals.size(); ++k)
    {
        if (a.intervals[k].interval.lower != b.intervals[k].interval.lower) return false;
        if (a.intervals[k].interval.upper != b.intervals[k].interval.upper) return false;
        if (a.intervals[k].covered != b.intervals[k].covered) return false;
    }
    return true;
}

bool same(const ParameterSummary& a, const ParameterSummary& b)
{
    auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    if (!eq(a.pct_rb, b.pct_rb) || !eq(a.var_theta_hat, b.var_theta_hat)) return false;
    if (!eq(a.mean_v, b.mean_v) || !eq(a.sd_v, b.sd_v) || !eq(a.mean_theta, b.mean_theta)) return false;
    for (std::size_t k = 0; k < a.n_lambda.size(); ++k)
    {
        if (!eq(a.n_lambda[k].rate, b.n_lambda[k].rate)) return false;
        if (!eq(a.t_lambda[k].rate, b.t_lambda[k].rate)) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("run_replication is deterministic", "[mcstudy]")
{
    const SimConfig c = tiny();
    const auto a = run_replication(c, 3);
    const auto b = run_replication(c, 3);
    REQUIRE_FALSE(a.failed);
    REQUIRE(same(a, b));
    REQUIRE_FALSE(same(a, run_replication(c, 4)));
    // Three levels, two kinds, two parameters.
    REQUIRE(a.intervals.size() == 12);
}

TEST_CASE("fixed genotypes share the design across replications", "[mcstudy]")
{
    SimConfig c = tiny();
    c.fixed_genotypes = true;
    const auto s0 = simulate_replication(c, 0);
    const auto s1 = simulate_replication(c, 1);
    REQUIRE(s0.design.dense() == s1.design.dense());
    REQUIRE(s0.phenotype != s1.phenotype);
    c.fixed_genotypes = false;
    REQUIRE(simulate_replication(c, 0).design.dense() != simulate_replication(c, 1).design.dense());
}

TEST_CASE("zero genetic variance exercises truncation at the boundary", "[mcstudy]")
{
    SimConfig c = tiny(5);
    c.b = 0.0;
    c.n_reps = 20;
    const auto results = run_replications(c, 2);
    int boundary = 0;
    for (const auto& r : results)
    {
        REQUIRE_FALSE(r.failed);
        for (double lambda : c.levels)
        {
            const auto* t = r.find(Parameter::h2, lambda, IntervalKind::truncated);
            const auto* n = r.find(Parameter::h2, lambda, IntervalKind::normal);
            REQUIRE(n != nullptr);
            if (t == nullptr) continue;
            REQUIRE(t->interval.lower >= 0.0);
            REQUIRE(t->interval.upper <= 1.0);
            if (r.fit.boundary && lambda == 0.05)
            {
                ++boundary;
                REQUIRE(n->interval.lower < 0.0);
                REQUIRE(t->interval.lower < 0.05 * t->interval.upper);
            }
        }
    }
    REQUIRE(boundary > 0);
    const McSummary s = summarize(results, c);
    REQUIRE(s.h2.truth == 0.0);
    for (const auto& cov : s.h2.t_lambda) REQUIRE(cov.count > 0);
}

TEST_CASE("summarize: hand-computable cases", "[mcstudy]")
{
    SimConfig c = tiny();
    SECTION("%RB is zero when E(v) equals var(theta)")
    {
        std::vector<ReplicationResult> rs{synthetic(0, 1.0, 1.0), synthetic(1, 3.0, 1.0),
                                          synthetic(2, 2.0, 1.0)};
        const McSummary s = summarize(rs, c);
        REQUIRE_THAT(s.sigma2_eps.var_theta_hat, WithinRel(1.0, 1e-15));
        REQUIRE_THAT(s.sigma2_eps.pct_rb, WithinAbs(0.0, 1e-12));
    }
    SECTION("theta in {1,2,3}, v = 2")
    {
        std::vector<ReplicationResult> rs{synthetic(0, 1.0, 2.0), synthetic(1, 2.0, 2.0),
                                          synthetic(2, 3.0, 2.0)};
        const McSummary s = summarize(rs, c);
        REQUIRE(s.sigma2_eps.var_theta_hat == 1.0);
        REQUIRE(s.sigma2_eps.mean_v == 2.0);
        REQUIRE(s.sigma2_eps.pct_rb == 100.0);
        REQUIRE(s.sigma2_eps.sd_v == 0.0);
        REQUIRE(s.rep_count == 3);
        REQUIRE(std::isnan(s.sigma2_eps.n_lambda.front().rate));
    }
    SECTION("failures are excluded and counted")
    {
        std::vector<ReplicationResult> rs{synthetic(0, 1.0, 2.0), synthetic(1, 2.0, 2.0),
                                          synthetic(2, 3.0, 2.0), synthetic(3, 100.0, 5.0)};
        rs[3].failed = true;
        const McSummary s = summarize(rs, c);
        REQUIRE(s.failure_count == 1);
        REQUIRE(s.rep_count == 3);
        REQUIRE(s.sigma2_eps.pct_rb == 100.0);
        for (auto& r : rs) r.failed = true;
        REQUIRE_THROWS_AS(summarize(rs, c), NumericalError);
    }
    SECTION("a single replication leaves the spread undefined")
    {
        std::vector<ReplicationResult> rs{synthetic(0, 1.0, 2.0)};
        const McSummary s = summarize(rs, c);
        REQUIRE(s.rep_count == 1);
        REQUIRE(std::isnan(s.sigma2_eps.var_theta_hat));
        REQUIRE(std::isnan(s.sigma2_eps.pct_rb));
    }
}

TEST_CASE("sample_variance against a two-pass oracle", "[mcstudy][property]")
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal(1e6, 3.0);
    for (int rep = 0; rep < 50; ++rep)
    {
        std::vector<double> x(static_cast<std::size_t>(2 + rep * 7));
        for (auto& v : x) v = normal(rng);
        long double mean = 0.0L;
        for (double v : x) mean += v;
        mean /= static_cast<long double>(x.size());
        long double ss = 0.0L;
        for (double v : x) ss += (v - mean) * (v - mean);
        const double ref = static_cast<double>(ss / static_cast<long double>(x.size() - 1));
        REQUIRE_THAT(sample_variance(x), WithinRel(ref, 1e-9));
    }
    REQUIRE(std::isnan(sample_variance(std::vector<double>{1.0})));
}

TEST_CASE("summaries do not depend on replication order", "[mcstudy][property]")
{
    const SimConfig c = tiny(11);
    auto results = run_replications_serial(c);
    const McSummary ref = summarize(results, c);
    std::mt19937_64 rng(12);
    for (int k = 0; k < 5; ++k)
    {
        std::shuffle(results.begin(), results.end(), rng);
        const McSummary s = summarize(results, c);
        REQUIRE(same(s.sigma2_eps, ref.sigma2_eps));
        REQUIRE(same(s.h2, ref.h2));
    }
}

TEST_CASE("coverage indicators are monotone in the level", "[mcstudy][property]")
{
    const SimConfig c = tiny(13);
    for (const auto& r : run_replications(c, 2))
    {
        for (Parameter p : {Parameter::sigma2_eps, Parameter::h2})
        {
            for (IntervalKind kind : {IntervalKind::normal, IntervalKind::truncated})
            {
                const auto* i01 = r.find(p, 0.01, kind);
                const auto* i05 = r.find(p, 0.05, kind);
                const auto* i10 = r.find(p, 0.1, kind);
                if (!i01 || !i05 || !i10) continue;
                REQUIRE(i01->interval.lower <= i05->interval.lower);
                REQUIRE(i05->interval.lower <= i10->interval.lower);
                REQUIRE(i10->interval.upper <= i05->interval.upper);
                REQUIRE(i05->interval.upper <= i01->interval.upper);
                REQUIRE(int(i01->covered) >= int(i05->covered));
                REQUIRE(int(i05->covered) >= int(i10->covered));
            }
        }
        // Far from zero the truncated and normal indicators for sigma2_eps agree.
        if (r.fit.sigma2_eps_hat > 8.0 * std::sqrt(r.v_sigma2_eps))
        {
            for (double lambda : c.levels)
            {
                REQUIRE(r.find(Parameter::sigma2_eps, lambda, IntervalKind::normal)->covered
                        == r.find(Parameter::sigma2_eps, lambda, IntervalKind::truncated)->covered);
            }
        }
    }
}

TEST_CASE("parallel replications match the serial reference", "[mcstudy]")
{
    const SimConfig c = tiny(14);
    const auto serial = run_replications_serial(c);
    const auto parallel = run_replications(c, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t k = 0; k < serial.size(); ++k) REQUIRE(same(serial[k], parallel[k]));
}

TEST_CASE("run_study: order and determinism under parallelism", "[mcstudy]")
{
    std::vector<SimConfig> grid{tiny(21), tiny(22), tiny(23)};
    grid[1].n = 60;
    grid[2].b = 0.2;
    const auto one = run_study(grid, 1);
    const auto many = run_study(grid, 8);
    REQUIRE(one.size() == 3);
    for (std::size_t s = 0; s < 3; ++s)
    {
        REQUIRE(one[s].summary.scenario == s);
        REQUIRE(one[s].summary.config.n == grid[s].n);
        REQUIRE(same(one[s].summary.sigma2_eps, many[s].summary.sigma2_eps));
        REQUIRE(same(one[s].summary.h2, many[s].summary.h2));
    }
    REQUIRE_THROWS_AS(run_study(std::vector<SimConfig>{}, 1), InputError);
}

TEST_CASE("run_study: a scenario where every replication fails", "[mcstudy]")
{
    std::vector<SimConfig> grid{tiny(31), tiny(32)};
    grid[1].n = 70;
    ReplicationOptions opts;
    opts.phenotype_hook = [](Eigen::VectorXd& y) {
        if (y.size() == 70) y.resize(0);
    };
    const auto out = run_study(grid, 2, opts);
    REQUIRE(out.size() == 2);
    REQUIRE_FALSE(out[0].failed);
    REQUIRE(out[1].failed);
    REQUIRE(out[1].summary.failure_count == 12);
    REQUIRE_FALSE(out[1].error.empty());
}

TEST_CASE("a four-by-five variance grid expands to twenty scenarios", "[mcstudy]")
{
    const StudyConfig study = parse_study_config(
        "n = 60\np = 200\nomega = 0.005, 0.01, 0.05, 0.1, 0.5\n"
        "ab = 0.8:0.2, 0.6:0.4, 0.4:0.6, 0.2:0.8\nreps = 3\n",
        5);
    REQUIRE(study.scenarios.size() == 20);
    const auto out = run_study(study.scenarios, 2);
    REQUIRE(out.size() == 20);
    for (std::size_t s = 0; s < 20; ++s) REQUIRE(out[s].summary.scenario == s);
}

TEST_CASE("heritability is consistent at reduced scale", "[mcstudy]")
{
    SimConfig c;
    c.n = 200;
    c.p = 500;
    c.m = 50;
    c.a = 0.4;
    c.b = 0.6;
    c.seed = 4040;
    c.n_reps = 300;
    const McSummary s = summarize(run_replications(c, 4), c);
    INFO("mean h2 " << s.h2.mean_theta);
    REQUIRE(std::abs(s.h2.mean_theta - 0.6) <= 0.1);
}
