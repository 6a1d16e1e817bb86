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

#include "mislmm/commands.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "mislmm/ci.hpp"
#include "mislmm/dataset.hpp"
#include "mislmm/error.hpp"
#include "mislmm/genosim.hpp"
#include "mislmm/grm.hpp"
#include "mislmm/reml.hpp"
#include "mislmm/study_config.hpp"

namespace mislmm
{

namespace
{

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f())
{
    try
    {
        return f();
    }
    catch (const StageError&)
    {
        throw;
    }
    catch (const InputError& e)
    {
        throw StageError(name, 2, e.what());
    }
    catch (const std::filesystem::filesystem_error& e)
    {
        throw StageError(name, 2, e.what());
    }
    catch (const std::exception& e)
    {
        throw StageError(name, 3, e.what());
    }
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("error writing " + path.string());
}

void ensure_dir(const std::filesystem::path& dir)
{
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

constexpr Parameter kFitParameters[] = {Parameter::sigma2_eps, Parameter::gamma, Parameter::h2};

double variance_of(const VarianceEstimates& v, Parameter parameter)
{
    switch (parameter)
    {
    case Parameter::sigma2_eps:
        return v.var_sigma2_eps;
    case Parameter::gamma:
        return v.var_gamma;
    case Parameter::h2:
        return v.var_h2;
    }
    return v.var_sigma2_eps;
}

}  // namespace

FitReport run_fit(const FitOptions& opts)
{
    stage("args", [&] {
        if (opts.levels.empty()) throw InputError("at least one level is required");
        for (double l : opts.levels)
        {
            if (!(l > 0.0 && l < 1.0)) throw InputError("levels must lie in (0, 1)");
        }
        if (opts.bootstrap < 0) throw InputError("--bootstrap must be nonnegative");
        if (opts.bootstrap > 0 && opts.bootstrap < 100)
        {
            throw InputError("--bootstrap needs at least 100 draws");
        }
        if (opts.bootstrap > 0 && !opts.seed) throw InputError("--bootstrap requires --seed");
    });

    FitReport report;
    report.genotype_path = opts.genotypes.string();
    report.phenotype_path = opts.phenotype.string();
    if (opts.covariates) report.covariate_path = opts.covariates->string();
    report.seed = opts.seed;

    Dataset data = stage("load", [&] {
        return load_dataset(opts.genotypes, opts.phenotype, opts.covariates);
    });
    report.dropped_genotype = data.dropped_genotype;
    report.dropped_phenotype = data.dropped_phenotype;
    report.dropped_covariate = data.dropped_covariate;
    report.covariate_names = data.covariate_names;

    auto qc_out = stage("qc", [&] {
        return quality_control(std::move(data), opts.maf_min, opts.miss_max);
    });
    Dataset& clean = qc_out.first;
    report.qc = qc_out.second;
    report.n = clean.n();

    const Eigen::MatrixXd x = clean.design_matrix();
    const Eigen::VectorXd y = clean.phenotype;
    const StandardizedDesign design = stage("standardize", [&] {
        StandardizedDesign d = standardize(std::move(clean.genotypes));
        if (d.p() == 0) throw InputError("every SNP is monomorphic after QC");
        return d;
    });
    report.snps_used = design.p();
    report.snps_monomorphic = static_cast<Index>(design.excluded_cols().size());

    const SpectralGrm spec = stage("spectral", [&] { return spectral(design, x, y); });
    report.fit = stage("fit", [&] { return fit(spec); });

    stage("variance", [&] {
        report.abc = abc_statistics(spec, report.fit.gamma_hat);
        report.variances = estimate_variances(report.fit, report.abc, opts.variance);
    });

    stage("intervals", [&] {
        for (double lambda : opts.levels)
        {
            for (Parameter param : kFitParameters)
            {
                const double theta = parameter_value(report.fit, param);
                const double v = variance_of(report.variances, param);
                report.intervals.push_back(normal_ci(theta, v, lambda, param));
                report.intervals.push_back(
                    truncated_ci(theta, v, lambda, parameter_bounds(param), param));
            }
        }
    });

    if (opts.bootstrap > 0)
    {
        stage("bootstrap", [&] {
            BootstrapOptions bo;
            bo.n_boot = opts.bootstrap;
            bo.seed = *opts.seed;
            bo.threads = opts.threads;
            const auto refits = bootstrap_refits(report.fit, spec, bo);
            report.bootstrap_draws = opts.bootstrap;
            for (const auto& r : refits) report.bootstrap_failures += r ? 0 : 1;
            for (double lambda : opts.levels)
            {
                for (Parameter param : kFitParameters)
                {
                    report.intervals.push_back(
                        bootstrap_interval(report.fit, refits, param, lambda).interval);
                }
            }
        });
    }
    return report;
}

FitReport cmd_fit(const FitOptions& opts, const std::filesystem::path& out)
{
    FitReport report = run_fit(opts);
    stage("write", [&] {
        ensure_dir(out.parent_path());
        write_file(out, fit_report_json(report));
        auto txt = out;
        txt.replace_extension(".txt");
        write_file(txt, fit_report_text(report));
    });
    return report;
}

std::vector<ScenarioOutcome> cmd_mc(const McOptions& opts)
{
    stage("args", [&] {
        if (!opts.seed) throw InputError("mc requires --seed");
        if (opts.threads < 1) throw InputError("--threads must be at least 1");
    });
    const StudyConfig study = stage("config", [&] { return load_study_config(opts.config, *opts.seed); });
    if (study.scenarios.empty()) throw StageError("config", 2, "no scenarios");

    ReplicationOptions ro;
    ro.variance = study.variance;
    auto outcomes = stage("study", [&] { return run_study(study.scenarios, opts.threads, ro); });

    stage("write", [&] {
        ensure_dir(opts.out_dir);
        const auto rows = mc_rows(outcomes);
        write_file(opts.out_dir / "mc_table.csv", mc_csv(rows));
        write_file(opts.out_dir / "mc_table.txt", mc_text(rows));
    });
    return outcomes;
}

void cmd_simulate(const SimulateOptions& opts)
{
    SimConfig cfg;
    stage("args", [&] {
        if (!opts.seed) throw InputError("simulate requires --seed");
        cfg.n = opts.n;
        cfg.p = opts.p;
        cfg.m = opts.m;
        cfg.a = opts.a;
        cfg.b = opts.b;
        cfg.mu = opts.mu;
        cfg.seed = *opts.seed;
        cfg.n_reps = 1;
        cfg.validate();
    });
    const SimulatedReplication sim = stage("simulate", [&] { return simulate_replication(cfg, 0); });

    stage("write", [&] {
        ensure_dir(opts.out_dir);
        std::vector<std::string> ids;
        ids.reserve(static_cast<std::size_t>(cfg.n));
        for (Index i = 0; i < cfg.n; ++i) ids.push_back("ind" + std::to_string(i + 1));
        write_genotypes(opts.out_dir / "genotypes.tsv", sim.design.genotypes(), ids);
        write_phenotype(opts.out_dir / "phenotype.tsv", sim.phenotype, ids);

        nlohmann::ordered_json truth = {{"n", cfg.n},
                                        {"p", cfg.p},
                                        {"m", cfg.m},
                                        {"a", cfg.a},
                                        {"b", cfg.b},
                                        {"mu", cfg.mu},
                                        {"seed", cfg.seed},
                                        {"sigma2_eps", cfg.sigma2_eps()},
                                        {"sigma2_alpha", cfg.sigma2_alpha()},
                                        {"h2", true_heritability(cfg)},
                                        {"causal_columns", sim.causal}};
        write_file(opts.out_dir / "truth.json", truth.dump(2) + '\n');
    });
}

std::string cmd_report(const std::filesystem::path& input)
{
    return stage("report", [&] {
        std::ifstream in(input, std::ios::binary);
        if (!in) throw InputError("cannot open " + input.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        const auto rows = parse_mc_csv(buf.str());
        return mc_text(rows);
    });
}

}  // namespace mislmm
