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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "mislmm/commands.hpp"
#include "mislmm/varest.hpp"

namespace
{

void add_mode_flags(CLI::App* cmd, std::string& exponent, std::string& gamma)
{
    cmd->add_option("--exponent-mode", exponent,
                    "Residual-variance estimator scaling: quartic or quadratic-literal")
        ->capture_default_str();
    cmd->add_option("--gamma-mode", gamma, "Variance-ratio estimator scaling: doubled or literal")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"REML variance components and heritability with misspecification-robust "
                 "variance estimates"};
    app.require_subcommand(1);

    mislmm::FitOptions fit;
    std::string fit_out = "fit_report.json";
    std::string geno;
    std::string pheno;
    std::string covar;
    std::optional<std::uint64_t> fit_seed;
    std::string fit_exponent = "quartic";
    std::string fit_gamma = "doubled";
    auto* fit_cmd = app.add_subcommand("fit", "Fit a dosage dataset and report estimates and intervals");
    fit_cmd->add_option("--geno", geno, "Genotype dosage table")->required();
    fit_cmd->add_option("--pheno", pheno, "Phenotype table")->required();
    fit_cmd->add_option("--covar", covar, "Covariate table (intercept added automatically)");
    fit_cmd->add_option("--maf-min", fit.maf_min, "Minimum minor allele frequency")->capture_default_str();
    fit_cmd->add_option("--miss-max", fit.miss_max, "Maximum missing call rate")->capture_default_str();
    fit_cmd->add_option("--levels", fit.levels, "Interval levels lambda (coverage 1 - lambda)")
        ->delimiter(',')
        ->capture_default_str();
    fit_cmd->add_option("--bootstrap", fit.bootstrap, "Parametric bootstrap draws (0 = off)")
        ->capture_default_str();
    fit_cmd->add_option("--seed", fit_seed, "Seed for the bootstrap");
    fit_cmd->add_option("--threads", fit.threads, "Worker threads")->capture_default_str();
    fit_cmd->add_option("--out", fit_out, "Report path; a .txt summary is written alongside")
        ->capture_default_str();
    add_mode_flags(fit_cmd, fit_exponent, fit_gamma);

    mislmm::McOptions mc;
    std::string mc_config;
    std::string mc_out = ".";
    std::optional<std::uint64_t> mc_seed;
    auto* mc_cmd = app.add_subcommand("mc", "Run a Monte Carlo coverage study");
    mc_cmd->add_option("--config", mc_config, "Study configuration file")->required();
    mc_cmd->add_option("--threads", mc.threads, "Worker threads")->capture_default_str();
    mc_cmd->add_option("--seed", mc_seed, "Study seed");
    mc_cmd->add_option("--out-dir", mc_out, "Directory for mc_table.csv and mc_table.txt")
        ->capture_default_str();

    mislmm::SimulateOptions sim;
    std::string sim_out = ".";
    std::optional<std::uint64_t> sim_seed;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a dataset from the sparse true model");
    sim_cmd->add_option("--n", sim.n, "Individuals")->required();
    sim_cmd->add_option("--p", sim.p, "SNPs")->required();
    sim_cmd->add_option("--m", sim.m, "Causal SNPs")->required();
    sim_cmd->add_option("--a", sim.a, "Residual variance")->capture_default_str();
    sim_cmd->add_option("--b", sim.b, "Genetic variance scale")->capture_default_str();
    sim_cmd->add_option("--mu", sim.mu, "Intercept")->capture_default_str();
    sim_cmd->add_option("--seed", sim_seed, "Seed");
    sim_cmd->add_option("--out-dir", sim_out, "Output directory")->capture_default_str();

    std::string report_input;
    auto* report_cmd = app.add_subcommand("report", "Render an mc CSV table as aligned text");
    report_cmd->add_option("--input", report_input, "mc_table.csv")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try
    {
        if (fit_cmd->parsed())
        {
            fit.genotypes = geno;
            fit.phenotype = pheno;
            if (!covar.empty()) fit.covariates = covar;
            fit.seed = fit_seed;
            try
            {
                fit.variance.exponent = mislmm::parse_exponent_mode(fit_exponent);
                fit.variance.gamma = mislmm::parse_gamma_mode(fit_gamma);
            }
            catch (const std::exception& e)
            {
                throw mislmm::StageError("args", 2, e.what());
            }
            omp_set_num_threads(std::max(1, fit.threads));
            const auto report = mislmm::cmd_fit(fit, fit_out);
            std::cout << mislmm::fit_report_text(report);
        }
        else if (mc_cmd->parsed())
        {
            mc.config = mc_config;
            mc.seed = mc_seed;
            mc.out_dir = mc_out;
            const auto outcomes = mislmm::cmd_mc(mc);
            std::cout << mislmm::mc_text(mislmm::mc_rows(outcomes));
        }
        else if (sim_cmd->parsed())
        {
            sim.seed = sim_seed;
            sim.out_dir = sim_out;
            mislmm::cmd_simulate(sim);
        }
        else if (report_cmd->parsed())
        {
            std::cout << mislmm::cmd_report(report_input);
        }
    }
    catch (const mislmm::StageError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
