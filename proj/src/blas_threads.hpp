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

// OpenBLAS keeps its own thread pool. Replication-level parallelism runs one
// BLAS call per worker, so the pool is pinned to a single thread there; it
// also keeps every BLAS result independent of the worker count.
extern "C" void openblas_set_num_threads(int num_threads);
extern "C" int openblas_get_num_threads(void);

namespace mislmm::detail
{

class ScopedBlasThreads
{
public:
    explicit ScopedBlasThreads(int threads) : saved_(openblas_get_num_threads())
    {
        openblas_set_num_threads(threads);
    }
    ~ScopedBlasThreads() { openblas_set_num_threads(saved_); }
    ScopedBlasThreads(const ScopedBlasThreads&) = delete;
    ScopedBlasThreads& operator=(const ScopedBlasThreads&) = delete;

private:
    int saved_;
};

}  // namespace mislmm::detail
