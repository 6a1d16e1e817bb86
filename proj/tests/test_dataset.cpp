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

#include <filesystem>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "mislmm/dataset.hpp"
#include "mislmm/error.hpp"

using namespace mislmm;  // NOLINT
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace
{

Dataset parse(const std::string& geno, const std::string& pheno,
              const std::optional<std::string>& covar = std::nullopt)
{
    std::optional<Table> c;
    if (covar) c = parse_table(*covar, "covar");
    return make_dataset(parse_table(geno, "geno"), parse_table(pheno, "pheno"), c);
}

std::string error_of(const std::function<void()>& f)
{
    try
    {
        f();
    }
    catch (const InputError& e)
    {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("parse_table detects the delimiter", "[dataset]")
{
    const Table tab = parse_table("id\ts1\ts2\na\t0\t1\n");
    REQUIRE(tab.delimiter == '\t');
    REQUIRE(tab.header == std::vector<std::string>{"s1", "s2"});
    const Table csv = parse_table("id,s1,s2\r\na,0,1\r\n\r\nb,2,NA\r\n");
    REQUIRE(csv.delimiter == ',');
    REQUIRE(csv.ids == std::vector<std::string>{"a", "b"});
    REQUIRE(csv.cells[1][1] == "NA");
    REQUIRE_THAT(error_of([] { parse_table("id,s1\na,0,1\n", "g.csv"); }),
                 ContainsSubstring("line 2"));
    REQUIRE_THROWS_AS(parse_table(""), InputError);
}

TEST_CASE("toy dataset round trip", "[dataset]")
{
    const Dataset d = parse("id\ts1\ts2\ni1\t0\t1\ni2\t1\t2\ni3\t2\t0\n",
                            "id\ty\ni1\t0.5\ni2\t-1\ni3\t2.25\n");
    REQUIRE(d.n() == 3);
    REQUIRE(d.genotypes.p() == 2);
    REQUIRE(d.genotypes(2, 0) == 2);
    REQUIRE(d.genotypes.snp_ids == std::vector<std::string>{"s1", "s2"});
    REQUIRE(d.phenotype(2) == 2.25);
    REQUIRE(d.design_matrix().cols() == 1);
    REQUIRE(d.design_matrix().col(0).isOnes());
}

TEST_CASE("rows align by id in genotype order", "[dataset]")
{
    const Dataset d = parse("id,s1\nb,0\na,1\nc,2\n", "id,y\nc,3\nz,9\na,1\nb,2\n",
                            std::string("id,age,sex\na,30,1\nb,40,0\nc,50,1\n"));
    REQUIRE(d.ids == std::vector<std::string>{"b", "a", "c"});
    REQUIRE(d.phenotype(0) == 2.0);
    REQUIRE(d.phenotype(2) == 3.0);
    REQUIRE(d.dropped_phenotype == 1);
    REQUIRE(d.dropped_genotype == 0);
    REQUIRE(d.covariates.cols() == 2);
    REQUIRE(d.covariates(1, 0) == 30.0);
    REQUIRE(d.covariate_names == std::vector<std::string>{"age", "sex"});
    const auto x = d.design_matrix();
    REQUIRE(x.cols() == 3);
    REQUIRE(x(2, 1) == 50.0);
}

TEST_CASE("individual missing from the genotypes is dropped and counted", "[dataset]")
{
    const Dataset d = parse("id,s1\na,0\nb,1\n", "id,y\na,1\nb,2\nghost,3\n");
    REQUIRE(d.n() == 2);
    REQUIRE(d.dropped_phenotype == 1);
}

TEST_CASE("NA phenotypes and covariates drop the individual", "[dataset]")
{
    const Dataset d = parse("id,s1\na,0\nb,1\nc,2\n", "id,y\na,NA\nb,2\nc,3\n",
                            std::string("id,age\na,1\nb,NA\nc,5\n"));
    REQUIRE(d.ids == std::vector<std::string>{"c"});
    REQUIRE(d.dropped_genotype == 2);
}

TEST_CASE("validation errors", "[dataset]")
{
    REQUIRE_THAT(error_of([] { parse("id,s1,s2\na,0,1\nb,3,0\n", "id,y\na,1\nb,2\n"); }),
                 ContainsSubstring("row 2") && ContainsSubstring("column 1")
                     && ContainsSubstring("s1") && ContainsSubstring("'3'"));
    REQUIRE_THAT(error_of([] { parse("id,s1\na,0\na,1\n", "id,y\na,1\n"); }),
                 ContainsSubstring("duplicate"));
    REQUIRE_THAT(error_of([] { parse("id,s1\na,0\n", "id,y\na,1\na,2\n"); }),
                 ContainsSubstring("duplicate"));
    REQUIRE_THAT(error_of([] { parse("id,s1\na,0\n", "id,y\nb,1\n"); }),
                 ContainsSubstring("no individuals"));
    REQUIRE_THAT(error_of([] { parse("id,s1\na,0\n", "id,y\na,abc\n"); }),
                 ContainsSubstring("not a number"));
    REQUIRE_THROWS_AS(load_dataset("/nonexistent/g.tsv", "/nonexistent/p.tsv"), InputError);
}

TEST_CASE("quality_control", "[dataset]")
{
    // 20 individuals. c_miss is 90% missing; c_rare has dosage mean 0.06.
    std::string geno = "id,c_ok,c_miss,c_rare,c_imp\n";
    for (int i = 0; i < 20; ++i)
    {
        const std::string ok = std::to_string(i % 3);
        const std::string miss = i < 2 ? "1" : "NA";
        const std::string rare = i == 0 ? "1" : (i == 1 ? "NA" : "0");
        const std::string imp = i == 1 ? "NA" : std::to_string((i * 7) % 3);
        geno += "i" + std::to_string(i) + "," + ok + "," + miss + "," + rare + "," + imp + "\n";
    }
    std::string pheno = "id,y\n";
    for (int i = 0; i < 20; ++i) pheno += "i" + std::to_string(i) + "," + std::to_string(i) + "\n";
    const Dataset d = parse(geno, pheno);

    auto [clean, rep] = quality_control(d, 0.05, 0.06);
    REQUIRE(rep.n_before == 4);
    REQUIRE(rep.removed_missing == 1);
    REQUIRE(rep.removed_maf == 1);
    REQUIRE(rep.n_after == 2);
    REQUIRE(rep.n_after == rep.n_before - rep.removed_maf - rep.removed_missing);
    REQUIRE(rep.imputed_entries == 1);
    REQUIRE(clean.genotypes.snp_ids == std::vector<std::string>{"c_ok", "c_imp"});

    SECTION("idempotent")
    {
        auto [again, rep2] = quality_control(clean, 0.05, 0.06);
        REQUIRE(rep2.removed_maf == 0);
        REQUIRE(rep2.removed_missing == 0);
        REQUIRE(again.genotypes.snp_ids == clean.genotypes.snp_ids);
        for (Index j = 0; j < again.genotypes.p(); ++j)
        {
            REQUIRE(std::equal(again.genotypes.column(j).begin(), again.genotypes.column(j).end(),
                               clean.genotypes.column(j).begin()));
        }
    }
    SECTION("nothing survives")
    {
        REQUIRE_THROWS_AS(quality_control(d, 0.5, 0.0), InputError);
    }
    SECTION("threshold validation")
    {
        REQUIRE_THROWS_AS(quality_control(d, 0.6, 0.05), InputError);
        REQUIRE_THROWS_AS(quality_control(d, 0.05, 1.5), InputError);
    }
}

TEST_CASE("missing dosage is imputed to the observed mean", "[dataset]")
{
    const Dataset d = parse("id,s\na,0\nb,NA\nc,2\nd,0\n", "id,y\na,1\nb,2\nc,3\nd,4\n");
    REQUIRE_THAT(imputed_dosage(d.genotypes, 0), WithinAbs(2.0 / 3.0, 1e-15));
    auto [clean, rep] = quality_control(d, 0.05, 0.3);
    REQUIRE(clean.genotypes.p() == 1);
    REQUIRE(rep.imputed_entries == 1);
}

TEST_CASE("writers round-trip through the reader", "[dataset]")
{
    const auto dir = std::filesystem::temp_directory_path() / "mislmm_dataset_test";
    std::filesystem::create_directories(dir);
    GenotypeMatrix g(3, 2);
    g(0, 0) = 1;
    g(1, 0) = GenotypeMatrix::kMissing;
    g(2, 1) = 2;
    g.snp_ids = {"rs1", "rs2"};
    const std::vector<std::string> ids{"x", "y", "z"};
    Eigen::VectorXd y(3);
    y << 0.1, -2.0 / 3.0, 1e-7;
    write_genotypes(dir / "g.tsv", g, ids);
    write_phenotype(dir / "p.tsv", y, ids);
    const Dataset d = load_dataset(dir / "g.tsv", dir / "p.tsv");
    REQUIRE(d.ids == ids);
    REQUIRE(d.phenotype == y);
    REQUIRE(d.genotypes(1, 0) == GenotypeMatrix::kMissing);
    REQUIRE(d.genotypes(2, 1) == 2);
    std::filesystem::remove_all(dir);
}
