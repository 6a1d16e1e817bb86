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

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mislmm/genotype.hpp"

namespace mislmm
{

/// A delimited text table: header row, then one row per individual with the
/// individual id in the first column. Tab or comma, detected from the header.
struct Table
{
    char delimiter = '\t';
    std::vector<std::string> header;  // excluding the id column
    std::vector<std::string> ids;
    std::vector<std::vector<std::string>> cells;
};

Table read_table(const std::filesystem::path& path);
Table parse_table(const std::string& text, const std::string& source = "<input>");

struct Dataset
{
    GenotypeMatrix genotypes;
    Eigen::VectorXd phenotype;
    Eigen::MatrixXd covariates;  // n x (q - 1), intercept not included
    std::vector<std::string> ids;
    std::vector<std::string> covariate_names;

    // Rows of each input file that did not make it into the aligned set.
    std::size_t dropped_genotype = 0;
    std::size_t dropped_phenotype = 0;
    std::size_t dropped_covariate = 0;

    [[nodiscard]] Index n() const noexcept { return genotypes.n(); }
    /// Intercept followed by the covariates.
    [[nodiscard]] Eigen::MatrixXd design_matrix() const;
};

struct QcReport
{
    Index n_before = 0;
    Index n_after = 0;
    Index removed_maf = 0;
    Index removed_missing = 0;
    Index imputed_entries = 0;
    double maf_min = 0.05;
    double miss_max = 0.05;
};

/// Rows are the genotype ids present in every supplied file, in genotype-file
/// order. Phenotype and covariate rows with NA are dropped.
Dataset load_dataset(const std::filesystem::path& genotype_path,
                     const std::filesystem::path& phenotype_path,
                     const std::optional<std::filesystem::path>& covariate_path = std::nullopt);

Dataset make_dataset(const Table& genotypes, const Table& phenotype,
                     const std::optional<Table>& covariates = std::nullopt);

/// Drops SNPs whose missing rate exceeds miss_max, then SNPs whose folded
/// frequency on observed calls is below maf_min. Remaining missing calls are
/// imputed to the column mean: they stay marked missing in the dosage matrix
/// and standardize to exactly zero.
std::pair<Dataset, QcReport> quality_control(Dataset data, double maf_min, double miss_max);

/// Dosage a missing cell is imputed to: the mean over observed calls.
double imputed_dosage(const GenotypeMatrix& genotypes, Index column);

/// Tab-separated writers matching the reader.
void write_genotypes(const std::filesystem::path& path, const GenotypeMatrix& genotypes,
                     const std::vector<std::string>& ids);
void write_phenotype(const std::filesystem::path& path, const Eigen::VectorXd& y,
                     const std::vector<std::string>& ids);

}  // namespace mislmm
