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

#include "mislmm/dataset.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mislmm/error.hpp"

namespace mislmm
{

namespace
{

std::vector<std::string> split(const std::string& line, char delim)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

std::string trim(std::string s)
{
    const auto first = s.find_first_not_of(" \r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \r\n");
    return s.substr(first, last - first + 1);
}

bool is_na(const std::string& cell)
{
    return cell == "NA" || cell == "na" || cell == "NaN" || cell.empty();
}

std::optional<double> parse_number(const std::string& cell)
{
    if (is_na(cell)) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
    {
        throw InputError("not a number: '" + cell + "'");
    }
    return v;
}

std::unordered_map<std::string, std::size_t> index_ids(const Table& t, const std::string& what)
{
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t r = 0; r < t.ids.size(); ++r)
    {
        if (!idx.emplace(t.ids[r], r).second)
        {
            throw InputError(what + ": duplicate individual id '" + t.ids[r] + "'");
        }
    }
    return idx;
}

std::int8_t parse_dosage(const Table& t, std::size_t r, std::size_t j)
{
    const auto& cell = t.cells[r][j];
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    if (cell == "2") return 2;
    if (cell == "NA") return GenotypeMatrix::kMissing;
    throw InputError("genotypes: invalid dosage '" + cell + "' at row " + std::to_string(r + 1)
                     + " (id " + t.ids[r] + "), column " + std::to_string(j + 1) + " ("
                     + t.header[j] + ")");
}

}  // namespace

Table parse_table(const std::string& text, const std::string& source)
{
    Table t;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (!have_header)
        {
            t.delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
            auto fields = split(line, t.delimiter);
            if (fields.size() < 2)
            {
                throw InputError(source + ": header needs an id column and at least one data column");
            }
            for (std::size_t k = 1; k < fields.size(); ++k) t.header.push_back(trim(fields[k]));
            have_header = true;
            continue;
        }
        auto fields = split(line, t.delimiter);
        if (fields.size() != t.header.size() + 1)
        {
            throw InputError(source + ": line " + std::to_string(line_no) + " has "
                             + std::to_string(fields.size()) + " fields, expected "
                             + std::to_string(t.header.size() + 1));
        }
        t.ids.push_back(trim(fields[0]));
        std::vector<std::string> row;
        row.reserve(fields.size() - 1);
        for (std::size_t k = 1; k < fields.size(); ++k) row.push_back(trim(fields[k]));
        t.cells.push_back(std::move(row));
    }
    if (!have_header) throw InputError(source + ": empty file");
    return t;
}

Table read_table(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_table(buf.str(), path.string());
}

Eigen::MatrixXd Dataset::design_matrix() const
{
    Eigen::MatrixXd x(n(), covariates.cols() + 1);
    x.col(0).setOnes();
    if (covariates.cols() > 0) x.rightCols(covariates.cols()) = covariates;
    return x;
}

Dataset make_dataset(const Table& genotypes, const Table& phenotype,
                     const std::optional<Table>& covariates)
{
    index_ids(genotypes, "genotypes");
    const auto pheno_idx = index_ids(phenotype, "phenotype");
    std::unordered_map<std::string, std::size_t> covar_idx;
    if (covariates) covar_idx = index_ids(*covariates, "covariates");

    std::vector<std::size_t> geno_rows;
    std::vector<double> y;
    std::vector<std::vector<double>> cov_rows;
    for (std::size_t r = 0; r < genotypes.ids.size(); ++r)
    {
        const auto& id = genotypes.ids[r];
        const auto pit = pheno_idx.find(id);
        if (pit == pheno_idx.end()) continue;
        std::optional<double> value;
        try
        {
            value = parse_number(phenotype.cells[pit->second][0]);
        }
        catch (const InputError& e)
        {
            throw InputError("phenotype: individual '" + id + "': " + e.what());
        }
        if (!value) continue;

        std::vector<double> cov;
        if (covariates)
        {
            const auto cit = covar_idx.find(id);
            if (cit == covar_idx.end()) continue;
            bool complete = true;
            for (std::size_t c = 0; c < covariates->header.size(); ++c)
            {
                std::optional<double> v;
                try
                {
                    v = parse_number(covariates->cells[cit->second][c]);
                }
                catch (const InputError& e)
                {
                    throw InputError("covariates: individual '" + id + "', column '"
                                     + covariates->header[c] + "': " + e.what());
                }
                if (!v)
                {
                    complete = false;
                    break;
                }
                cov.push_back(*v);
            }
            if (!complete) continue;
        }
        geno_rows.push_back(r);
        y.push_back(*value);
        cov_rows.push_back(std::move(cov));
    }
    if (geno_rows.empty())
    {
        throw InputError("no individuals common to the genotype, phenotype and covariate files");
    }

    Dataset d;
    const auto n = static_cast<Index>(geno_rows.size());
    const auto p = static_cast<Index>(genotypes.header.size());
    d.genotypes = GenotypeMatrix(n, p);
    for (Index i = 0; i < n; ++i)
    {
        const std::size_t r = geno_rows[static_cast<std::size_t>(i)];
        for (Index j = 0; j < p; ++j)
        {
            const std::int8_t v = parse_dosage(genotypes, r, static_cast<std::size_t>(j));
            d.genotypes(i, j) = v;
        }
        d.ids.push_back(genotypes.ids[r]);
    }
    // Rows that were skipped still have to be well formed.
    for (std::size_t r = 0; r < genotypes.ids.size(); ++r)
    {
        for (std::size_t j = 0; j < genotypes.header.size(); ++j) parse_dosage(genotypes, r, j);
    }
    d.genotypes.snp_ids = genotypes.header;
    d.genotypes.freqs.resize(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j)
    {
        d.genotypes.freqs[static_cast<std::size_t>(j)] = imputed_dosage(d.genotypes, j) / 2.0;
    }

    d.phenotype = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    const auto q1 = static_cast<Index>(covariates ? covariates->header.size() : 0);
    d.covariates.resize(n, q1);
    for (Index i = 0; i < n; ++i)
    {
        for (Index c = 0; c < q1; ++c)
        {
            d.covariates(i, c) = cov_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
        }
    }
    if (covariates) d.covariate_names = covariates->header;

    d.dropped_genotype = genotypes.ids.size() - geno_rows.size();
    d.dropped_phenotype = phenotype.ids.size() - geno_rows.size();
    d.dropped_covariate = covariates ? covariates->ids.size() - geno_rows.size() : 0;
    return d;
}

Dataset load_dataset(const std::filesystem::path& genotype_path,
                     const std::filesystem::path& phenotype_path,
                     const std::optional<std::filesystem::path>& covariate_path)
{
    const Table g = read_table(genotype_path);
    const Table y = read_table(phenotype_path);
    std::optional<Table> c;
    if (covariate_path) c = read_table(*covariate_path);
    return make_dataset(g, y, c);
}

double imputed_dosage(const GenotypeMatrix& genotypes, Index column)
{
    long sum = 0;
    long observed = 0;
    for (auto u : genotypes.column(column))
    {
        if (u == GenotypeMatrix::kMissing) continue;
        sum += u;
        ++observed;
    }
    return observed == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(observed);
}

std::pair<Dataset, QcReport> quality_control(Dataset data, double maf_min, double miss_max)
{
    if (!(maf_min >= 0.0 && maf_min <= 0.5)) throw InputError("quality_control: maf_min outside [0, 0.5]");
    if (!(miss_max >= 0.0 && miss_max <= 1.0)) throw InputError("quality_control: miss_max outside [0, 1]");

    QcReport rep;
    rep.maf_min = maf_min;
    rep.miss_max = miss_max;
    const auto& g = data.genotypes;
    rep.n_before = g.p();
    const double n = static_cast<double>(g.n());

    std::vector<Index> keep;
    for (Index j = 0; j < g.p(); ++j)
    {
        const Index missing = g.missing_in_column(j);
        if (static_cast<double>(missing) / n > miss_max)
        {
            ++rep.removed_missing;
            continue;
        }
        const double f = missing == g.n() ? 0.0 : imputed_dosage(g, j) / 2.0;
        if (std::min(f, 1.0 - f) < maf_min)
        {
            ++rep.removed_maf;
            continue;
        }
        rep.imputed_entries += missing;
        keep.push_back(j);
    }
    rep.n_after = static_cast<Index>(keep.size());
    if (keep.empty()) throw InputError("quality_control: no SNPs survive the filters");

    data.genotypes = g.select_columns(keep);
    return {std::move(data), rep};
}

void write_genotypes(const std::filesystem::path& path, const GenotypeMatrix& genotypes,
                     const std::vector<std::string>& ids)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "id";
    for (Index j = 0; j < genotypes.p(); ++j)
    {
        out << '\t'
            << (genotypes.snp_ids.empty() ? "snp" + std::to_string(j + 1)
                                          : genotypes.snp_ids[static_cast<std::size_t>(j)]);
    }
    out << '\n';
    std::string line;
    for (Index i = 0; i < genotypes.n(); ++i)
    {
        line = ids[static_cast<std::size_t>(i)];
        for (Index j = 0; j < genotypes.p(); ++j)
        {
            const auto v = genotypes(i, j);
            line += '\t';
            if (v == GenotypeMatrix::kMissing) line += "NA";
            else line += static_cast<char>('0' + v);
        }
        line += '\n';
        out << line;
    }
}

void write_phenotype(const std::filesystem::path& path, const Eigen::VectorXd& y,
                     const std::vector<std::string>& ids)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "id\tphenotype\n";
    char buf[64];
    for (Index i = 0; i < y.size(); ++i)
    {
        std::snprintf(buf, sizeof buf, "%.17g", y(i));
        out << ids[static_cast<std::size_t>(i)] << '\t' << buf << '\n';
    }
}

}  // namespace mislmm
