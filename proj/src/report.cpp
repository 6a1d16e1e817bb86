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

#include "mislmm/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mislmm/error.hpp"

namespace mislmm
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr const char* kCsvHeader =
    "scenario,n,p,m,a,b,parameter,pct_rb,var_theta,mean_v,sd_v,"
    "N_0.01,N_0.05,N_0.1,T_0.01,T_0.05,T_0.1";

double coverage_at(const std::vector<Coverage>& cov, double lambda)
{
    for (const auto& c : cov)
    {
        if (std::abs(c.lambda - lambda) < 1e-12) return c.count == 0 ? kNaN : c.rate;
    }
    return kNaN;
}

McRow make_row(const ScenarioOutcome& o, const ParameterSummary& s, Parameter parameter)
{
    const McSummary& sum = o.summary;
    McRow r;
    r.scenario = sum.scenario;
    r.n = sum.config.n;
    r.p = sum.config.p;
    r.m = sum.config.m;
    r.a = sum.config.a;
    r.b = sum.config.b;
    r.parameter = std::string(to_string(parameter));
    r.reps = sum.rep_count;
    r.failures = sum.failure_count;
    r.boundary = sum.boundary_count;
    if (o.failed)
    {
        r.pct_rb = r.var_theta = r.mean_v = r.sd_v = kNaN;
        r.n_cov.fill(kNaN);
        r.t_cov.fill(kNaN);
        r.status = "failed: " + o.error;
        return r;
    }
    r.mean_theta = s.mean_theta;
    r.pct_rb = s.pct_rb;
    r.var_theta = s.var_theta_hat;
    r.mean_v = s.mean_v;
    r.sd_v = s.sd_v;
    for (std::size_t k = 0; k < kTableLevels.size(); ++k)
    {
        r.n_cov[k] = coverage_at(s.n_lambda, kTableLevels[k]);
        r.t_cov[k] = coverage_at(s.t_lambda, kTableLevels[k]);
    }
    return r;
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_value(const std::string& text, std::size_t line_no)
{
    if (text == "NA") return kNaN;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size())
    {
        throw InputError("mc table: line " + std::to_string(line_no) + ": bad value '" + text
                         + "'");
    }
    return v;
}

Index parse_count(const std::string& text, std::size_t line_no)
{
    const double v = parse_value(text, line_no);
    if (!(v >= 0.0) || v != std::floor(v))
    {
        throw InputError("mc table: line " + std::to_string(line_no) + ": bad count '" + text
                         + "'");
    }
    return static_cast<Index>(v);
}

std::string format_count(std::optional<std::size_t> v)
{
    return v ? std::to_string(*v) : std::string("-");
}

nlohmann::ordered_json number_or_null(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

std::string format_value(double v)
{
    if (!std::isfinite(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<McRow> mc_rows(std::span<const ScenarioOutcome> outcomes)
{
    std::vector<McRow> rows;
    rows.reserve(2 * outcomes.size());
    for (const auto& o : outcomes)
    {
        rows.push_back(make_row(o, o.summary.sigma2_eps, Parameter::sigma2_eps));
        rows.push_back(make_row(o, o.summary.h2, Parameter::h2));
    }
    return rows;
}

std::string mc_csv(std::span<const McRow> rows)
{
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : rows)
    {
        out += std::to_string(r.scenario) + ',' + std::to_string(r.n) + ',' + std::to_string(r.p)
               + ',' + std::to_string(r.m) + ',' + format_value(r.a) + ',' + format_value(r.b)
               + ',' + r.parameter + ',' + format_value(r.pct_rb) + ','
               + format_value(r.var_theta) + ',' + format_value(r.mean_v) + ','
               + format_value(r.sd_v);
        for (double c : r.n_cov) out += ',' + format_value(c);
        for (double c : r.t_cov) out += ',' + format_value(c);
        out += '\n';
    }
    return out;
}

std::vector<McRow> parse_mc_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<McRow> rows;
    bool header = false;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header)
        {
            if (line != kCsvHeader) throw InputError("mc table: unexpected header");
            header = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 17)
        {
            throw InputError("mc table: line " + std::to_string(line_no) + " has "
                             + std::to_string(f.size()) + " fields, expected 17");
        }
        McRow r;
        r.scenario = static_cast<std::size_t>(parse_count(f[0], line_no));
        r.n = parse_count(f[1], line_no);
        r.p = parse_count(f[2], line_no);
        r.m = parse_count(f[3], line_no);
        r.a = parse_value(f[4], line_no);
        r.b = parse_value(f[5], line_no);
        r.parameter = f[6];
        r.pct_rb = parse_value(f[7], line_no);
        r.var_theta = parse_value(f[8], line_no);
        r.mean_v = parse_value(f[9], line_no);
        r.sd_v = parse_value(f[10], line_no);
        for (std::size_t k = 0; k < 3; ++k)
        {
            r.n_cov[k] = parse_value(f[11 + k], line_no);
            r.t_cov[k] = parse_value(f[14 + k], line_no);
        }
        rows.push_back(std::move(r));
    }
    if (!header) throw InputError("mc table: empty input");
    return rows;
}

std::string mc_text(std::span<const McRow> rows)
{
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"scenario", "n", "p", "m", "a", "b", "parameter", "reps", "failed",
                     "boundary", "mean", "%RB", "var(theta)", "E(v)", "s(v)", "N_0.01", "N_0.05",
                     "N_0.1", "T_0.01", "T_0.05", "T_0.1", "status"});
    for (const auto& r : rows)
    {
        std::vector<std::string> c{std::to_string(r.scenario), std::to_string(r.n),
                                   std::to_string(r.p),        std::to_string(r.m),
                                   format_value(r.a),          format_value(r.b),
                                   r.parameter,                format_count(r.reps),
                                   format_count(r.failures),   format_count(r.boundary),
                                   r.mean_theta ? format_value(*r.mean_theta) : "-",
                                   format_value(r.pct_rb),     format_value(r.var_theta),
                                   format_value(r.mean_v),     format_value(r.sd_v)};
        for (double v : r.n_cov) c.push_back(format_value(v));
        for (double v : r.t_cov) c.push_back(format_value(v));
        c.push_back(r.status);
        cells.push_back(std::move(c));
    }

    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells)
    {
        for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
    }
    std::string out;
    for (const auto& row : cells)
    {
        std::string line;
        for (std::size_t k = 0; k < row.size(); ++k)
        {
            if (k > 0) line += "  ";
            if (k + 1 == row.size())
            {
                line += row[k];
            }
            else
            {
                line += std::string(width[k] - row[k].size(), ' ') + row[k];
            }
        }
        out += line + '\n';
    }
    return out;
}

std::string fit_report_json(const FitReport& r)
{
    using json = nlohmann::ordered_json;
    json j;
    j["input"] = {{"genotypes", r.genotype_path},
                  {"phenotype", r.phenotype_path},
                  {"covariates", r.covariate_path.empty() ? json(nullptr) : json(r.covariate_path)}};
    j["sample"] = {{"n", r.n},
                   {"snps_used", r.snps_used},
                   {"snps_monomorphic", r.snps_monomorphic},
                   {"covariates", r.covariate_names},
                   {"dropped", {{"genotype_rows", r.dropped_genotype},
                                {"phenotype_rows", r.dropped_phenotype},
                                {"covariate_rows", r.dropped_covariate}}}};
    j["qc"] = {{"maf_min", r.qc.maf_min},
               {"miss_max", r.qc.miss_max},
               {"n_before", r.qc.n_before},
               {"n_after", r.qc.n_after},
               {"removed_maf", r.qc.removed_maf},
               {"removed_missing", r.qc.removed_missing},
               {"imputed_entries", r.qc.imputed_entries}};
    j["estimates"] = {{"sigma2_eps", number_or_null(r.fit.sigma2_eps_hat)},
                      {"gamma", number_or_null(r.fit.gamma_hat)},
                      {"sigma2_alpha", number_or_null(r.fit.sigma2_alpha_hat)},
                      {"h2", number_or_null(r.fit.h2_hat)}};
    j["variances"] = {{"sigma2_eps", number_or_null(r.variances.var_sigma2_eps)},
                      {"gamma", number_or_null(r.variances.var_gamma)},
                      {"h2", number_or_null(r.variances.var_h2)},
                      {"exponent_mode", std::string(to_string(r.variances.exponent_mode))},
                      {"gamma_mode", std::string(to_string(r.variances.gamma_mode))}};
    j["statistics"] = {{"A", number_or_null(r.abc.a_hat)},
                       {"B", number_or_null(r.abc.b_hat)},
                       {"C", number_or_null(r.abc.c_hat)}};

    json intervals = json::object();
    for (const auto& iv : r.intervals)
    {
        const std::string param(to_string(iv.parameter));
        const std::string level = format_value(1.0 - iv.level);
        intervals[param][level][std::string(to_string(iv.kind))] = {
            {"lower", number_or_null(iv.lower)},
            {"upper", number_or_null(iv.upper)},
            {"confidence", iv.level}};
    }
    j["intervals"] = std::move(intervals);
    if (r.bootstrap_draws > 0)
    {
        j["bootstrap"] = {{"draws", r.bootstrap_draws}, {"failures", r.bootstrap_failures}};
    }
    j["solver"] = {{"iterations", r.fit.iterations},
                   {"bracket", {r.fit.bracket_lo, r.fit.bracket_hi}},
                   {"sign_changes", r.fit.sign_changes},
                   {"boundary", r.fit.boundary}};
    if (r.seed) j["seed"] = *r.seed;
    return j.dump(2) + '\n';
}

std::string fit_report_text(const FitReport& r)
{
    std::ostringstream out;
    out << "individuals      " << r.n << '\n'
        << "SNPs used        " << r.snps_used << " (QC removed " << r.qc.removed_missing
        << " for missingness, " << r.qc.removed_maf << " for MAF; "
        << r.snps_monomorphic << " monomorphic after QC)\n"
        << "covariates       " << r.covariate_names.size() << " + intercept\n\n";
    out << "sigma2_eps       " << format_value(r.fit.sigma2_eps_hat) << "  (var "
        << format_value(r.variances.var_sigma2_eps) << ")\n"
        << "gamma            " << format_value(r.fit.gamma_hat) << "  (var "
        << format_value(r.variances.var_gamma) << ")\n"
        << "sigma2_alpha     " << format_value(r.fit.sigma2_alpha_hat) << '\n'
        << "h2               " << format_value(r.fit.h2_hat) << "  (var "
        << format_value(r.variances.var_h2) << ")\n";
    if (r.fit.boundary) out << "note: the estimate of gamma lies on the search boundary\n";
    out << '\n';
    for (const auto& iv : r.intervals)
    {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-11s %4.1f%% %-10s [%s, %s]\n",
                      std::string(to_string(iv.parameter)).c_str(), 100.0 * iv.level,
                      std::string(to_string(iv.kind)).c_str(), format_value(iv.lower).c_str(),
                      format_value(iv.upper).c_str());
        out << buf;
    }
    return out.str();
}

}  // namespace mislmm
