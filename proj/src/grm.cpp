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

#include "mislmm/grm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cblas.h>
#include <lapacke.h>

#include "mislmm/error.hpp"

namespace mislmm
{

namespace
{

constexpr double kZeroVariance = 1e-12;

struct ColumnStats
{
    double mean = 0.0;
    double sd = 0.0;
};

// Mean over observed cells; missing cells take the mean, so they add nothing
// to the sum of squares. Variance uses denominator n.
ColumnStats column_stats(std::span<const std::int8_t> col)
{
    long sum = 0;
    long observed = 0;
    for (auto u : col)
    {
        if (u == GenotypeMatrix::kMissing) continue;
        sum += u;
        ++observed;
    }
    if (observed == 0) return {};
    const double mean = static_cast<double>(sum) / static_cast<double>(observed);
    double ss = 0.0;
    for (auto u : col)
    {
        if (u == GenotypeMatrix::kMissing) continue;
        const double d = u - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / static_cast<double>(col.size()))};
}

void check_dims(const Eigen::MatrixXd& grm, const Eigen::MatrixXd& x, const Eigen::VectorXd& y)
{
    const Index n = grm.rows();
    if (grm.cols() != n) throw InputError("spectral: relatedness matrix is not square");
    if (x.rows() != n)
    {
        throw InputError("spectral: covariate matrix has " + std::to_string(x.rows())
                         + " rows, expected " + std::to_string(n));
    }
    if (y.size() != n)
    {
        throw InputError("spectral: phenotype has length " + std::to_string(y.size())
                         + ", expected " + std::to_string(n));
    }
    if (!grm.allFinite()) throw NumericalError("spectral: non-finite relatedness entry");
    if (!x.allFinite()) throw InputError("spectral: non-finite covariate entry");
    if (!y.allFinite()) throw InputError("spectral: non-finite phenotype entry");
}

void check_covariates(const Eigen::MatrixXd& x)
{
    const Index n = x.rows();
    const Index q = x.cols();
    if (q < 1 || q >= n)
    {
        throw InputError("spectral: need 1 <= q < n covariate columns, got q = "
                         + std::to_string(q) + ", n = " + std::to_string(n));
    }
    bool has_intercept = false;
    for (Index c = 0; c < q && !has_intercept; ++c)
    {
        const double v = x(0, c);
        has_intercept = v != 0.0 && (x.col(c).array() == v).all();
    }
    if (!has_intercept) throw InputError("spectral: covariates must include an intercept column");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < q)
    {
        throw InputError("spectral: covariate matrix is rank deficient (rank "
                         + std::to_string(qr.rank()) + " < " + std::to_string(q) + ")");
    }
}

}  // namespace

Index StandardizedDesign::retained_position(Index original) const noexcept
{
    if (original < 0 || original >= static_cast<Index>(position_.size())) return -1;
    return position_[static_cast<std::size_t>(original)];
}

void StandardizedDesign::block_into(Index first, Index count, Eigen::Ref<Eigen::MatrixXd> out) const
{
    const Index n = this->n();
    for (Index k = 0; k < count; ++k)
    {
        const Index j = retained_[static_cast<std::size_t>(first + k)];
        const double mean = col_means_[static_cast<std::size_t>(j)];
        const double inv = scale_ / col_sds_[static_cast<std::size_t>(j)];
        const auto col = genotypes_.column(j);
        for (Index i = 0; i < n; ++i)
        {
            const auto u = col[static_cast<std::size_t>(i)];
            out(i, k) = u == GenotypeMatrix::kMissing ? 0.0 : (u - mean) * inv;
        }
    }
}

Eigen::MatrixXd StandardizedDesign::block(Index first, Index count) const
{
    if (first < 0 || count < 0 || first + count > p())
    {
        throw InputError("StandardizedDesign::block: column range out of bounds");
    }
    Eigen::MatrixXd out(n(), count);
    block_into(first, count, out);
    return out;
}

Eigen::VectorXd StandardizedDesign::column(Index original) const
{
    const Index pos = retained_position(original);
    if (pos < 0) return Eigen::VectorXd::Zero(n());
    return block(pos, 1).col(0);
}

Eigen::MatrixXd StandardizedDesign::dense() const
{
    return block(0, p());
}

StandardizedDesign standardize(GenotypeMatrix genotypes)
{
    if (genotypes.n() < 2) throw InputError("standardize: need at least 2 individuals");
    const Index p = genotypes.p();
    StandardizedDesign d;
    d.col_means_.assign(static_cast<std::size_t>(p), 0.0);
    d.col_sds_.assign(static_cast<std::size_t>(p), 0.0);
#pragma omp parallel for schedule(static)
    for (Index j = 0; j < p; ++j)
    {
        const auto s = column_stats(genotypes.column(j));
        d.col_means_[static_cast<std::size_t>(j)] = s.mean;
        d.col_sds_[static_cast<std::size_t>(j)] = s.sd;
    }
    d.position_.assign(static_cast<std::size_t>(p), -1);
    for (Index j = 0; j < p; ++j)
    {
        if (d.col_sds_[static_cast<std::size_t>(j)] > kZeroVariance)
        {
            d.position_[static_cast<std::size_t>(j)] = static_cast<Index>(d.retained_.size());
            d.retained_.push_back(j);
        }
        else
        {
            d.excluded_.push_back(j);
        }
    }
    if (d.retained_.empty())
    {
        throw NumericalError("standardize: every column has zero variance");
    }
    d.scale_ = 1.0 / std::sqrt(static_cast<double>(d.retained_.size()));
    d.genotypes_ = std::move(genotypes);
    return d;
}

StandardizedDesign standardize_serial(GenotypeMatrix genotypes)
{
    if (genotypes.n() < 2) throw InputError("standardize: need at least 2 individuals");
    const Index p = genotypes.p();
    StandardizedDesign d;
    d.position_.assign(static_cast<std::size_t>(p), -1);
    for (Index j = 0; j < p; ++j)
    {
        const auto s = column_stats(genotypes.column(j));
        d.col_means_.push_back(s.mean);
        d.col_sds_.push_back(s.sd);
        if (s.sd > kZeroVariance)
        {
            d.position_[static_cast<std::size_t>(j)] = static_cast<Index>(d.retained_.size());
            d.retained_.push_back(j);
        }
        else
        {
            d.excluded_.push_back(j);
        }
    }
    if (d.retained_.empty())
    {
        throw NumericalError("standardize: every column has zero variance");
    }
    d.scale_ = 1.0 / std::sqrt(static_cast<double>(d.retained_.size()));
    d.genotypes_ = std::move(genotypes);
    return d;
}

Eigen::MatrixXd accumulate_grm(const StandardizedDesign& design, Index chunk)
{
    const Index n = design.n();
    const Index p = design.p();
    chunk = std::max<Index>(1, std::min(chunk, p));
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd z(n, chunk);
    for (Index first = 0; first < p; first += chunk)
    {
        const Index count = std::min(chunk, p - first);
#pragma omp parallel for schedule(static)
        for (Index c = 0; c < count; ++c)
        {
            design.block_into(first + c, 1, z.col(c));
        }
        cblas_dsyrk(CblasColMajor, CblasLower, CblasNoTrans, static_cast<int>(n),
                    static_cast<int>(count), 1.0, z.data(), static_cast<int>(n), 1.0, k.data(),
                    static_cast<int>(n));
    }
    k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
    return k;
}

Eigen::MatrixXd accumulate_grm_serial(const StandardizedDesign& design)
{
    const Eigen::MatrixXd z = design.dense();
    const Index n = z.rows();
    Eigen::MatrixXd k(n, n);
    for (Index i = 0; i < n; ++i)
    {
        for (Index l = 0; l <= i; ++l)
        {
            double s = 0.0;
            for (Index j = 0; j < z.cols(); ++j) s += z(i, j) * z(l, j);
            k(i, l) = s;
            k(l, i) = s;
        }
    }
    return k;
}

SpectralGrm spectral(const StandardizedDesign& design,
                     const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y)
{
    if (x.rows() != design.n() || y.size() != design.n())
    {
        throw InputError("spectral: design has " + std::to_string(design.n())
                         + " rows but covariates/phenotype have " + std::to_string(x.rows())
                         + "/" + std::to_string(y.size()));
    }
    check_covariates(x);
    return spectral_from_grm(accumulate_grm(design), x, y);
}

SpectralGrm spectral_from_grm(Eigen::MatrixXd grm,
                              const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y)
{
    check_dims(grm, x, y);
    check_covariates(x);
    const Index n = grm.rows();

    SpectralGrm out;
    out.trace_k = grm.trace();

    Eigen::VectorXd ascending(n);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(n),
                                           grm.data(), static_cast<lapack_int>(n), ascending.data());
    if (info != 0)
    {
        throw NumericalError("spectral: eigendecomposition failed (info = " + std::to_string(info)
                             + ")");
    }

    out.eigvals = ascending.reverse();
    const double lambda_max = std::max(out.eigvals(0), 0.0);
    const double floor = -1e-8 * lambda_max;
    for (Index i = 0; i < n; ++i)
    {
        double& v = out.eigvals(i);
        if (v < 0.0)
        {
            if (v < floor)
            {
                throw NumericalError("spectral: eigenvalue " + std::to_string(v)
                                     + " below tolerance; relatedness matrix is not PSD");
            }
            v = 0.0;
        }
    }
    const double sum = out.eigvals.sum();
    if (std::abs(sum - out.trace_k) > 1e-8 * std::max(std::abs(out.trace_k), lambda_max) + 1e-300)
    {
        throw NumericalError("spectral: eigenvalue sum does not match trace");
    }

    // Columns of grm now hold eigenvectors in ascending order.
    out.rot_y = (grm.transpose() * y).reverse();
    out.rot_x = (grm.transpose() * x).colwise().reverse();
    return out;
}

SpectralGrm with_rotated_phenotype(const SpectralGrm& spec, Eigen::VectorXd rot_y)
{
    if (rot_y.size() != spec.n()) throw InputError("with_rotated_phenotype: length mismatch");
    SpectralGrm out = spec;
    out.rot_y = std::move(rot_y);
    return out;
}

TraceBundle trace_bundle(const SpectralGrm& spec, double gamma)
{
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
    {
        throw InputError("trace_bundle: gamma must be finite and >= 0");
    }
    const auto& lam = spec.eigvals;
    const Eigen::ArrayXd w = (1.0 + gamma * lam.array()).inverse();

    const Eigen::MatrixXd wx = w.matrix().asDiagonal() * spec.rot_x;
    const Eigen::MatrixXd m = spec.rot_x.transpose() * wx;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
    {
        throw NumericalError("trace_bundle: X'V^{-1}X is singular");
    }
    // P = W - F F' in the eigenbasis.
    const Eigen::MatrixXd f = llt.matrixL().solve(wx.transpose()).transpose();
    const Eigen::ArrayXd fn = f.rowwise().squaredNorm().array();
    const Eigen::MatrixXd s_i = f.transpose() * f;
    const Eigen::MatrixXd s_l = f.transpose() * lam.asDiagonal() * f;
    const Eigen::ArrayXd l = lam.array();

    TraceBundle tb;
    tb.gamma = gamma;
    tb.tr_p = w.sum() - fn.sum();
    tb.tr_pk = (w * l).sum() - (l * fn).sum();
    tb.tr_p2 = w.square().sum() - 2.0 * (w * fn).sum() + s_i.squaredNorm();
    tb.tr_q = (w.square() * l).sum() - 2.0 * (w * l * fn).sum() + (s_l.cwiseProduct(s_i)).sum();
    tb.tr_qk = (w * l).square().sum() - 2.0 * (w * l.square() * fn).sum() + s_l.squaredNorm();

    const Eigen::VectorXd fty = f.transpose() * spec.rot_y;
    const Eigen::ArrayXd py = w * spec.rot_y.array() - (f * fty).array();
    tb.quad_p = spec.rot_y.dot(py.matrix());
    tb.quad_p2 = py.square().sum();
    tb.quad_q = (l * py.square()).sum();

    tb.logdet_v = (gamma * l).log1p().sum();
    tb.logdet_xvx = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return tb;
}

Eigen::MatrixXd intercept_only(Index n)
{
    return Eigen::MatrixXd::Ones(n, 1);
}

}  // namespace mislmm
