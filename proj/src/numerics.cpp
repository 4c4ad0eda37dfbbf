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
#include "dmdlpv/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dmdlpv {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Index count_above(const Vector& s, double threshold)
{
    Index n = 0;
    while (n < s.size() && s(n) > threshold) {
        ++n;
    }
    return n;
}

} // namespace

void TruncationConfig::validate(bool require_ordered_ranks) const
{
    if (procrustes_rank < 0 || pod_rank < 0) {
        throw ConfigError("ranks must be non-negative (0 selects full rank)");
    }
    if (!(regularization >= 0.0)) {
        throw ConfigError("regularization must be >= 0");
    }
    if (require_ordered_ranks && procrustes_rank > 0 && pod_rank > procrustes_rank) {
        throw ConfigError("procrustes rank " + std::to_string(procrustes_rank) +
                          " is below POD rank " + std::to_string(pod_rank));
    }
}

double zero_threshold(Index rows, Index cols, double sigma_max)
{
    return static_cast<double>(std::max(rows, cols)) * sigma_max * kEps;
}

TruncatedSvd truncated_svd(const Eigen::Ref<const Matrix>& m, Index rank)
{
    if (m.size() == 0) {
        throw DimensionError("truncated_svd: empty matrix");
    }
    if (rank < 1) {
        throw DimensionError("truncated_svd: rank must be >= 1");
    }
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cutoff = zero_threshold(m.rows(), m.cols(), s.size() ? s(0) : 0.0);
    const Index r = std::min(rank, count_above(s, cutoff));

    TruncatedSvd out;
    out.requested_rank = rank;
    out.rank = r;
    out.singular_values = s.head(r);
    out.left_vectors = svd.matrixU().leftCols(r);
    out.right_vectors = svd.matrixV().leftCols(r);
    return out;
}

Matrix left_singular_vectors(const Eigen::Ref<const Matrix>& m, Index rank)
{
    if (m.size() == 0) {
        throw DimensionError("left_singular_vectors: empty matrix");
    }
    if (rank < 1) {
        throw DimensionError("left_singular_vectors: rank must be >= 1");
    }
    const Index r = std::min({rank, m.rows(), m.cols()});
    if (m.cols() <= m.rows()) {
        Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
        return svd.matrixU().leftCols(r);
    }
    // M^T = Q R  =>  M = R^T Q^T, and the left vectors of M are those of R^T.
    StreamingQr qr(m.rows());
    qr.append_rows(m.transpose());
    const Matrix rt = qr.r_factor().transpose();
    Eigen::BDCSVD<Matrix> svd(rt, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(r);
}

Vector regularize_singular_values(const Vector& s, double lambda, double zero_cutoff)
{
    if (!(lambda >= 0.0)) {
        throw DomainError("regularization parameter must be >= 0");
    }
    for (Index i = 0; i < s.size(); ++i) {
        if (!(s(i) >= 0.0)) {
            throw DomainError("singular values must be >= 0");
        }
    }
    if (zero_cutoff < 0.0) {
        const double smax = s.size() ? s.maxCoeff() : 0.0;
        zero_cutoff = std::max(1.0, smax) * std::sqrt(kEps);
    }
    Vector out(s.size());
    const double lambda_sq = lambda * lambda;
    for (Index i = 0; i < s.size(); ++i) {
        const double sigma = s(i);
        if (lambda == 0.0) {
            out(i) = sigma < zero_cutoff ? 0.0 : 1.0 / sigma;
        } else {
            out(i) = sigma / (sigma * sigma + lambda_sq);
        }
    }
    return out;
}

Vector kron_vec(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b)
{
    Vector out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

// ---------------------------------------------------------------------------
// StreamingQr

StreamingQr::StreamingQr(Index cols, Index block_rows)
    : cols_(cols),
      block_rows_(block_rows > 0 ? block_rows : std::max<Index>(4 * cols, 1024))
{
    if (cols < 1) {
        throw DimensionError("StreamingQr: need at least one column");
    }
    work_.resize(cols_ + block_rows_, cols_);
}

Eigen::Block<Matrix> StreamingQr::reserve_rows(Index count)
{
    if (count > block_rows_) {
        throw DimensionError("StreamingQr: reservation larger than block size");
    }
    if (pending_ + count > block_rows_) {
        flush();
    }
    return work_.block(r_rows_ + pending_, 0, count, cols_);
}

void StreamingQr::commit_rows(Index count)
{
    pending_ += count;
    rows_seen_ += count;
    r_valid_ = false;
}

void StreamingQr::append_rows(const Eigen::Ref<const Matrix>& rows)
{
    if (rows.cols() != cols_) {
        throw DimensionError("StreamingQr: row width mismatch");
    }
    Index done = 0;
    while (done < rows.rows()) {
        if (pending_ == block_rows_) {
            flush();
        }
        const Index take = std::min(block_rows_ - pending_, rows.rows() - done);
        work_.block(r_rows_ + pending_, 0, take, cols_) = rows.middleRows(done, take);
        commit_rows(take);
        done += take;
    }
}

void StreamingQr::flush()
{
    if (pending_ == 0) {
        return;
    }
    const Index total = r_rows_ + pending_;
    Eigen::Ref<Matrix> active = work_.topRows(total);
    Eigen::HouseholderQR<Eigen::Ref<Matrix>> qr(active);
    const Index k = std::min(total, cols_);
    Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    work_.topRows(k) = r;
    r_rows_ = k;
    pending_ = 0;
}

const Matrix& StreamingQr::r_factor()
{
    if (!r_valid_) {
        flush();
        r_ = work_.topRows(r_rows_);
        r_valid_ = true;
    }
    return r_;
}

// ---------------------------------------------------------------------------
// ProcrustesFactorization

ProcrustesFactorization::ProcrustesFactorization(Index regressor_dim, Index target_dim,
                                                 Index block_rows)
    : n_in_(regressor_dim), n_out_(target_dim), qr_(regressor_dim + target_dim, block_rows)
{
    if (regressor_dim < 1 || target_dim < 1) {
        throw DimensionError("ProcrustesFactorization: empty regressor or target space");
    }
}

void ProcrustesFactorization::append(const Eigen::Ref<const Matrix>& regressors,
                                     const Eigen::Ref<const Matrix>& targets)
{
    if (finalized_) {
        throw std::logic_error("ProcrustesFactorization: append after finalize");
    }
    if (regressors.rows() != n_in_ || targets.rows() != n_out_) {
        throw DimensionError("ProcrustesFactorization: row dimension mismatch");
    }
    if (regressors.cols() != targets.cols()) {
        throw DimensionError("ProcrustesFactorization: regressor/target column counts differ (" +
                             std::to_string(regressors.cols()) + " vs " +
                             std::to_string(targets.cols()) + ")");
    }
    Index done = 0;
    const Index n = regressors.cols();
    while (done < n) {
        const Index take = std::min(qr_.block_rows(), n - done);
        auto rows = qr_.reserve_rows(take);
        rows.leftCols(n_in_) = regressors.middleCols(done, take).transpose();
        rows.rightCols(n_out_) = targets.middleCols(done, take).transpose();
        qr_.commit_rows(take);
        done += take;
    }
}

void ProcrustesFactorization::finalize()
{
    if (finalized_) {
        return;
    }
    snapshots_ = qr_.rows_seen();
    if (snapshots_ == 0) {
        throw DimensionError("ProcrustesFactorization: no snapshots");
    }
    const Matrix& r = qr_.r_factor();
    const Index q1 = std::min(r.rows(), n_in_);
    r11_ = r.topLeftCorner(q1, n_in_);
    r12_ = r.topRightCorner(q1, n_out_);
    r22_sq_norm_ = r.bottomRightCorner(r.rows() - q1, n_out_).squaredNorm();

    Eigen::BDCSVD<Matrix> svd(r11_.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    sigma_ = svd.singularValues();
    w_ = svd.matrixU();
    yv_ = r12_.transpose() * svd.matrixV();
    threshold_ = dmdlpv::zero_threshold(n_in_, snapshots_, sigma_.size() ? sigma_(0) : 0.0);
    effective_rank_ = count_above(sigma_, threshold_);
    finalized_ = true;
}

void ProcrustesFactorization::require_finalized() const
{
    if (!finalized_) {
        throw std::logic_error("ProcrustesFactorization: call finalize() first");
    }
}

const Vector& ProcrustesFactorization::singular_values() const
{
    require_finalized();
    return sigma_;
}

const Matrix& ProcrustesFactorization::left_vectors() const
{
    require_finalized();
    return w_;
}

const Matrix& ProcrustesFactorization::projected_targets() const
{
    require_finalized();
    return yv_;
}

double ProcrustesFactorization::zero_threshold() const
{
    require_finalized();
    return threshold_;
}

Index ProcrustesFactorization::effective_rank() const
{
    require_finalized();
    return effective_rank_;
}

Index ProcrustesFactorization::clamp_rank(Index rank) const
{
    require_finalized();
    if (rank < 0) {
        throw DimensionError("rank must be >= 0");
    }
    return (rank == 0 || rank > effective_rank_) ? effective_rank_ : rank;
}

Vector ProcrustesFactorization::regularized_inverse(Index rank, double lambda) const
{
    const Index k = clamp_rank(rank);
    return regularize_singular_values(sigma_.head(k), lambda, threshold_);
}

Matrix ProcrustesFactorization::solve(Index rank, double lambda) const
{
    const Index k = clamp_rank(rank);
    const Vector sreg = regularize_singular_values(sigma_.head(k), lambda, threshold_);
    return (yv_.leftCols(k) * sreg.asDiagonal()) * w_.leftCols(k).transpose();
}

double ProcrustesFactorization::residual_squared_norm(const Eigen::Ref<const Matrix>& g) const
{
    require_finalized();
    if (g.rows() != n_out_ || g.cols() != n_in_) {
        throw DimensionError("residual_squared_norm: weight shape mismatch");
    }
    return (r12_ - r11_ * g.transpose()).squaredNorm() + r22_sq_norm_;
}

Matrix procrustes_solve(const Eigen::Ref<const Matrix>& y, const Eigen::Ref<const Matrix>& f,
                        Index rank, double lambda)
{
    if (y.cols() != f.cols()) {
        throw DimensionError("procrustes_solve: Y has " + std::to_string(y.cols()) +
                             " columns, F has " + std::to_string(f.cols()));
    }
    if (y.cols() < 1) {
        throw DimensionError("procrustes_solve: no snapshots");
    }
    if (rank < 1) {
        throw DimensionError("procrustes_solve: rank must be >= 1");
    }
    ProcrustesFactorization fac(f.rows(), y.rows());
    fac.append(f, y);
    fac.finalize();
    return fac.solve(rank, lambda);
}

} // namespace dmdlpv
