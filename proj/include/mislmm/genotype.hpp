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
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mislmm
{

using Index = Eigen::Index;

/// Dense n x p dosage matrix, column-major, one byte per call.
/// Cells hold 0, 1, 2 or kMissing.
class GenotypeMatrix
{
public:
    static constexpr std::int8_t kMissing = -1;

    GenotypeMatrix() = default;
    GenotypeMatrix(Index n, Index p);

    [[nodiscard]] Index n() const noexcept { return n_; }
    [[nodiscard]] Index p() const noexcept { return p_; }

    [[nodiscard]] std::int8_t operator()(Index i, Index j) const noexcept
    {
        return data_[static_cast<std::size_t>(j * n_ + i)];
    }
    std::int8_t& operator()(Index i, Index j) noexcept
    {
        return data_[static_cast<std::size_t>(j * n_ + i)];
    }

    [[nodiscard]] std::span<const std::int8_t> column(Index j) const noexcept
    {
        return {data_.data() + j * n_, static_cast<std::size_t>(n_)};
    }
    [[nodiscard]] std::span<std::int8_t> column(Index j) noexcept
    {
        return {data_.data() + j * n_, static_cast<std::size_t>(n_)};
    }

    /// Allele frequencies. Sampling frequencies for simulated data,
    /// empirical (non-missing) frequencies for loaded data.
    std::vector<double> freqs;
    std::vector<std::string> snp_ids;

    [[nodiscard]] bool has_missing() const noexcept;
    [[nodiscard]] Index missing_in_column(Index j) const noexcept;

    /// Keep only the listed columns, in the given order.
    [[nodiscard]] GenotypeMatrix select_columns(std::span<const Index> cols) const;
    [[nodiscard]] GenotypeMatrix select_rows(std::span<const Index> rows) const;

    /// Throws InputError unless every cell is 0, 1, 2 or missing and
    /// metadata sizes agree with p.
    void validate() const;

private:
    Index n_ = 0;
    Index p_ = 0;
    std::vector<std::int8_t> data_;
};

}  // namespace mislmm
