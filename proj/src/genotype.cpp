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

#include "mislmm/genotype.hpp"

#include <algorithm>
#include <string>

#include "mislmm/error.hpp"

namespace mislmm
{

GenotypeMatrix::GenotypeMatrix(Index n, Index p)
    : n_(n), p_(p), data_(static_cast<std::size_t>(n * p), 0)
{
    if (n < 0 || p < 0)
    {
        throw InputError("GenotypeMatrix: negative dimension");
    }
}

bool GenotypeMatrix::has_missing() const noexcept
{
    return std::find(data_.begin(), data_.end(), kMissing) != data_.end();
}

Index GenotypeMatrix::missing_in_column(Index j) const noexcept
{
    const auto col = column(j);
    return static_cast<Index>(std::count(col.begin(), col.end(), kMissing));
}

GenotypeMatrix GenotypeMatrix::select_columns(std::span<const Index> cols) const
{
    GenotypeMatrix out(n_, static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k)
    {
        const auto src = column(cols[k]);
        std::copy(src.begin(), src.end(), out.column(static_cast<Index>(k)).begin());
        if (!freqs.empty()) out.freqs.push_back(freqs[static_cast<std::size_t>(cols[k])]);
        if (!snp_ids.empty()) out.snp_ids.push_back(snp_ids[static_cast<std::size_t>(cols[k])]);
    }
    return out;
}

GenotypeMatrix GenotypeMatrix::select_rows(std::span<const Index> rows) const
{
    GenotypeMatrix out(static_cast<Index>(rows.size()), p_);
    for (Index j = 0; j < p_; ++j)
    {
        for (std::size_t k = 0; k < rows.size(); ++k)
        {
            out(static_cast<Index>(k), j) = (*this)(rows[k], j);
        }
    }
    out.freqs = freqs;
    out.snp_ids = snp_ids;
    return out;
}

void GenotypeMatrix::validate() const
{
    if (!freqs.empty() && static_cast<Index>(freqs.size()) != p_)
    {
        throw InputError("GenotypeMatrix: freqs length " + std::to_string(freqs.size())
                         + " does not match p = " + std::to_string(p_));
    }
    if (!snp_ids.empty() && static_cast<Index>(snp_ids.size()) != p_)
    {
        throw InputError("GenotypeMatrix: snp id count does not match p");
    }
    for (Index j = 0; j < p_; ++j)
    {
        for (Index i = 0; i < n_; ++i)
        {
            const auto v = (*this)(i, j);
            if (v != kMissing && (v < 0 || v > 2))
            {
                throw InputError("GenotypeMatrix: invalid dosage " + std::to_string(v)
                                 + " at row " + std::to_string(i) + ", column "
                                 + std::to_string(j));
            }
        }
    }
}

}  // namespace mislmm
