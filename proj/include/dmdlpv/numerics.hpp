/*
 Copyright 2026 The dmdlpv Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef DMDLPV_NUMERICS_HPP
#define DMDLPV_NUMERICS_HPP

#include "dmdlpv/common.hpp"

namespace dmdlpv {

/// Rank-r singular triplets of a matrix M (n x N). Signs of the singular
/// vectors are whatever the backend returns; compare reconstructions only.
struct TruncatedSvd {
    Matrix left_vectors;     ///< n x rank, orthonormal columns
    Vector singular_values;  ///< descending, >= 0
    Matrix right_vectors;    ///< N x rank, orthonormal columns
    Index rank = 0;          ///< effective rank after clamping
    Index requested_rank = 0;
};

/// Ranks and Tikhonov parameter used by every fit.
///
/// A rank of 0 means "full effective rank". For the global fit the Procrustes
/// rank must be at least the POD rank.
struct TruncationConfig {
    Index procrustes_rank = 0;
    Index pod_rank = 0;
    double regularization = 0.0;

    void validate(bool require_ordered_ranks) const;
};

/// Numerical-zero cutoff for singular values of an n x N matrix:
/// max(n, N) * sigma_max * 2^-52.
double zero_threshold(Index rows, Index cols, double sigma_max);

/// Top-r singular triplets. `rank` is clamped to the number of singular values
/// above zero_threshold(); the result records both the request and the
/// effective rank.
TruncatedSvd truncated_svd(const Eigen::Ref<const Matrix>& m, Index rank);

/// Leading r left singular vectors only (POD basis). Unlike truncated_svd the
/// rank is clamped to min(n, N) only: directions with numerically zero
/// singular values are kept as an orthonormal completion, so r = n gives a
/// square orthogonal transform. Wide inputs go through a QR of the transpose
/// so the N x N right factor is never formed.
Matrix left_singular_vectors(const Eigen::Ref<const Matrix>& m, Index rank);

/// Elementwise sigma / (sigma^2 + lambda^2). With lambda == 0 entries below
/// `zero_cutoff` map to 0. A negative cutoff selects max(1, s_max) * sqrt(eps).
Vector regularize_singular_values(const Vector& s, double lambda,
                                  double zero_cutoff = -1.0);

/// a (x) b for column vectors: block i of the result is a_i * b.
Vector kron_vec(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// Upper-triangular factor of a tall matrix fed in row blocks.
///
/// Rows are buffered and folded into R with a Householder QR of [R; block],
/// so memory stays O((cols + block) * cols) independent of the row count.
class StreamingQr {
public:
    explicit StreamingQr(Index cols, Index block_rows = 0);

    void append_rows(const Eigen::Ref<const Matrix>& rows);

    /// Writable view of the next `count` rows; they are committed by
    /// commit_rows(count). count must not exceed block_rows().
    Eigen::Block<Matrix> reserve_rows(Index count);
    void commit_rows(Index count);

    /// Flushes pending rows and returns R (min(rows_seen, cols) x cols).
    const Matrix& r_factor();

    Index cols() const noexcept { return cols_; }
    Index block_rows() const noexcept { return block_rows_; }
    Index rows_seen() const noexcept { return rows_seen_; }

private:
    void flush();

    Index cols_;
    Index block_rows_;
    Matrix work_;          // top r_rows_ rows hold R, then pending rows
    Index r_rows_ = 0;
    Index pending_ = 0;
    Index rows_seen_ = 0;
    Matrix r_;
    bool r_valid_ = false;
};

/// Rank-limited least squares min ||Y - G F|| over snapshots fed one column at
/// a time.
///
/// The joint matrix [F^T | Y^T] is reduced by StreamingQr to
///   [R11 R12]
///   [ 0  R22]
/// so F = R11^T Q1^T and the SVD of R11^T = W S Z^T gives F = W S (Q1 Z)^T.
/// The products needed by every solution form are then Y V = R12^T Z and the
/// residual ||Y - G F||^2 = ||R12 - R11 G^T||^2 + ||R22||^2.
class ProcrustesFactorization {
public:
    ProcrustesFactorization(Index regressor_dim, Index target_dim, Index block_rows = 0);

    /// Columns are snapshots: regressors is regressor_dim x b, targets target_dim x b.
    void append(const Eigen::Ref<const Matrix>& regressors,
                const Eigen::Ref<const Matrix>& targets);

    /// Rows are snapshots laid out as [regressor^T | target^T].
    StreamingQr& stream() { return qr_; }

    void finalize();
    bool finalized() const noexcept { return finalized_; }

    Index regressor_dim() const noexcept { return n_in_; }
    Index target_dim() const noexcept { return n_out_; }
    Index snapshot_count() const noexcept { return snapshots_; }

    /// Descending singular values of F (all of them, including numerical zeros).
    const Vector& singular_values() const;
    /// W: regressor_dim x m.
    const Matrix& left_vectors() const;
    /// Y V: target_dim x m.
    const Matrix& projected_targets() const;

    double zero_threshold() const;
    Index effective_rank() const;
    /// 0 or anything above the effective rank maps to the effective rank.
    Index clamp_rank(Index rank) const;

    /// regularize_singular_values over the leading clamp_rank(rank) values.
    Vector regularized_inverse(Index rank, double lambda) const;

    /// G = Y V_r diag(sigma_reg) W_r^T.
    Matrix solve(Index rank, double lambda) const;

    /// ||Y - G F||_F^2 evaluated from the triangular factor.
    double residual_squared_norm(const Eigen::Ref<const Matrix>& g) const;

private:
    void require_finalized() const;

    Index n_in_;
    Index n_out_;
    Index snapshots_ = 0;
    StreamingQr qr_;
    bool finalized_ = false;

    Matrix r11_;
    Matrix r12_;
    double r22_sq_norm_ = 0.0;
    Vector sigma_;
    Matrix w_;
    Matrix yv_;
    double threshold_ = 0.0;
    Index effective_rank_ = 0;
};

/// G = Y V_r diag(sigma_r / (sigma_r^2 + lambda^2)) W_r^T with (W_r, sigma_r,
/// V_r) the rank-r SVD of F. Full rank and lambda = 0 give the minimum-norm
/// least-squares solution.
Matrix procrustes_solve(const Eigen::Ref<const Matrix>& y,
                        const Eigen::Ref<const Matrix>& f,
                        Index rank, double lambda);

} // namespace dmdlpv

#endif // DMDLPV_NUMERICS_HPP
