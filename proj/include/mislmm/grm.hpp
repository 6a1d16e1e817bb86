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

#include <vector>

#include <Eigen/Core>

#include "mislmm/genotype.hpp"

namespace mislmm
{

/// Column-standardized genotypes, Z = (U - mean) / sd with denominator n,
/// scaled by p^{-1/2} where p counts retained columns. The dosage matrix is
/// kept and standardized on demand, so the dense n x p real matrix never has
/// to be resident. Missing cells are mean-imputed, i.e. standardize to 0.
class StandardizedDesign
{
public:
    StandardizedDesign() = default;

    [[nodiscard]] Index n() const noexcept { return genotypes_.n(); }
    /// Retained column count.
    [[nodiscard]] Index p() const noexcept { return static_cast<Index>(retained_.size()); }
    [[nodiscard]] double scale() const noexcept { return scale_; }

    [[nodiscard]] const GenotypeMatrix& genotypes() const noexcept { return genotypes_; }
    /// Indexed by original column.
    [[nodiscard]] const std::vector<double>& col_means() const noexcept { return col_means_; }
    [[nodiscard]] const std::vector<double>& col_sds() const noexcept { return col_sds_; }
    [[nodiscard]] const std::vector<Index>& retained_cols() const noexcept { return retained_; }
    [[nodiscard]] const std::vector<Index>& excluded_cols() const noexcept { return excluded_; }

    /// Position of an original column among retained ones, or -1.
    [[nodiscard]] Index retained_position(Index original) const noexcept;

    /// Ztilde columns [first, first + count) of the retained set.
    [[nodiscard]] Eigen::MatrixXd block(Index first, Index count) const;
    void block_into(Index first, Index count, Eigen::Ref<Eigen::MatrixXd> out) const;

    /// Ztilde column for an original index; zeros when the column was excluded.
    [[nodiscard]] Eigen::VectorXd column(Index original) const;

    /// Full n x p Ztilde. Only for small designs.
    [[nodiscard]] Eigen::MatrixXd dense() const;

    friend StandardizedDesign standardize(GenotypeMatrix genotypes);
    friend StandardizedDesign standardize_serial(GenotypeMatrix genotypes);

private:
    GenotypeMatrix genotypes_;
    std::vector<double> col_means_;
    std::vector<double> col_sds_;
    std::vector<Index> retained_;
    std::vector<Index> excluded_;
    std::vector<Index> position_;
    double scale_ = 0.0;
};

/// Throws NumericalError when every column has zero variance.
StandardizedDesign standardize(GenotypeMatrix genotypes);
/// Serial reference for standardize.
StandardizedDesign standardize_serial(GenotypeMatrix genotypes);

/// Eigendecomposition of K = Ztilde Ztilde' with the phenotype and covariates
/// rotated into the eigenbasis. Immutable once built.
struct SpectralGrm
{
    Eigen::VectorXd eigvals;  // nonincreasing, clamped to >= 0
    Eigen::VectorXd rot_y;    // U'y
    Eigen::MatrixXd rot_x;    // U'X
    double trace_k = 0.0;

    [[nodiscard]] Index n() const noexcept { return eigvals.size(); }
    [[nodiscard]] Index q() const noexcept { return rot_x.cols(); }
};

/// Traces and quadratic forms of P_gamma and Q_gamma = P K P at one gamma.
struct TraceBundle
{
    double gamma = 0.0;
    double tr_p = 0.0;    // tr(P)
    double tr_p2 = 0.0;   // tr(P^2)
    double tr_pk = 0.0;   // tr(PK)
    double tr_q = 0.0;    // tr(Q) = tr(P^2 K)
    double tr_qk = 0.0;   // tr(QK) = tr(PKPK)
    double quad_p = 0.0;  // y'Py
    double quad_p2 = 0.0; // y'P^2 y
    double quad_q = 0.0;  // y'Qy
    double logdet_xvx = 0.0;  // log det(X' V^{-1} X)
    double logdet_v = 0.0;    // log det(V)
};

/// GRM in column chunks of the design, OpenMP-parallel standardization of
/// each chunk followed by a symmetric rank-k update. Lower triangle is
/// mirrored on return.
Eigen::MatrixXd accumulate_grm(const StandardizedDesign& design, Index chunk = 2048);
/// Direct O(n^2 p) loop over the dense design; reference for tests.
Eigen::MatrixXd accumulate_grm_serial(const StandardizedDesign& design);

/// Validates x (finite, contains an intercept column, full column rank < n)
/// and y, then decomposes K.
SpectralGrm spectral(const StandardizedDesign& design,
                     const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y);

/// Same, from an explicit symmetric PSD relatedness matrix.
SpectralGrm spectral_from_grm(Eigen::MatrixXd grm,
                              const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y);

/// Copy of `spec` with a new phenotype already expressed in the eigenbasis.
SpectralGrm with_rotated_phenotype(const SpectralGrm& spec, Eigen::VectorXd rot_y);

/// O(n q^2 + q^3) evaluation in the eigenbasis, where V_gamma^{-1} is diagonal.
TraceBundle trace_bundle(const SpectralGrm& spec, double gamma);

/// Column of ones, n x 1.
Eigen::MatrixXd intercept_only(Index n);

}  // namespace mislmm
