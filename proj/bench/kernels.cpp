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

// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "mislmm/genosim.hpp"
#include "mislmm/grm.hpp"
#include "mislmm/mcstudy.hpp"

namespace
{

using namespace mislmm;  // NOLINT

GenotypeMatrix genotypes(Index n, Index p)
{
    Rng rng(1);
    return draw_genotypes(draw_allele_freqs(p, rng), n, rng);
}

void BM_DrawGenotypes(benchmark::State& state)
{
    Rng rng(2);
    const auto freqs = draw_allele_freqs(state.range(1), rng);
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(draw_genotypes(freqs, state.range(0), rng));
    }
}

void BM_DrawGenotypesSerial(benchmark::State& state)
{
    Rng rng(2);
    const auto freqs = draw_allele_freqs(state.range(1), rng);
    for (auto _ : state)
    {
        benchmark::DoNotOptimize(draw_genotypes_serial(freqs, state.range(0), rng));
    }
}

void BM_Standardize(benchmark::State& state)
{
    const GenotypeMatrix g = genotypes(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(standardize(g));
}

void BM_StandardizeSerial(benchmark::State& state)
{
    const GenotypeMatrix g = genotypes(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(standardize_serial(g));
}

void BM_AccumulateGrm(benchmark::State& state)
{
    const StandardizedDesign d = standardize(genotypes(state.range(0), state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(accumulate_grm(d));
}

void BM_AccumulateGrmSerial(benchmark::State& state)
{
    const StandardizedDesign d = standardize(genotypes(state.range(0), state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(accumulate_grm_serial(d));
}

SimConfig study(Index n, Index p)
{
    SimConfig c;
    c.n = n;
    c.p = p;
    c.m = p / 10;
    c.a = 0.4;
    c.b = 0.6;
    c.seed = 3;
    c.n_reps = 8;
    return c;
}

void BM_RunReplications(benchmark::State& state)
{
    const SimConfig c = study(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(run_replications(c, omp_get_max_threads()));
}

void BM_RunReplicationsSerial(benchmark::State& state)
{
    const SimConfig c = study(state.range(0), state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(run_replications_serial(c));
}

}  // namespace

BENCHMARK(BM_DrawGenotypes)->Args({1000, 10000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DrawGenotypesSerial)->Args({1000, 10000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Standardize)->Args({1000, 10000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StandardizeSerial)->Args({1000, 10000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AccumulateGrm)->Args({500, 5000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AccumulateGrmSerial)->Args({500, 5000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunReplications)->Args({300, 1000})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunReplicationsSerial)->Args({300, 1000})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
