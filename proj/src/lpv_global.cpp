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
#include "dmdlpv/lpv_global.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <limits>

namespace dmdlpv {

namespace {

double data_scale(const SnapshotDataset& data)
{
    return std::max(data.x.cwiseAbs().maxCoeff(), data.y.cwiseAbs().maxCoeff());
}

void check_params(const SchedulingBasis& bx, const SchedulingBasis& bu, Index n_params)
{
    if (bx.n_params() != n_params || bu.n_params() != n_params) {
        throw DimensionError("scheduling basis expects " + std::to_string(bx.n_params()) +
                             " parameters, dataset has " + std::to_string(n_params));
    }
}

Matrix blockwise_sum(const Matrix& w, const Vector& coeff, Index block_cols)
{
    Matrix out = Matrix::Zero(w.rows(), block_cols);
    for (Index j = 0; j < coeff.size(); ++j) {
        out.noalias() += coeff(j) * w.middleCols(j * block_cols, block_cols);
    }
    return out;
}

} // namespace

Matrix ReducedLpvModel::weights() const
{
    Matrix g(wa_tilde.rows(), wa_tilde.cols() + wb_tilde.cols());
    g << wa_tilde, wb_tilde;
    return g;
}

Matrix ReducedLpvModel::frozen_a(const Vector& theta) const
{
    return blockwise_sum(wa_tilde, basis_x.evaluate(theta), reduced_dim());
}

Matrix ReducedLpvModel::frozen_b(const Vector& theta) const
{
    return blockwise_sum(wb_tilde, basis_u.evaluate(theta), n_inputs());
}

void ReducedLpvModel::validate() const
{
    const Index r = reduced_dim();
    if (r < 1 || wa_tilde.rows() != r || wa_tilde.cols() != basis_x.size() * r ||
        wb_tilde.rows() != r || wb_tilde.cols() % basis_u.size() != 0 ||
        basis_x.n_params() != basis_u.n_params()) {
        throw DimensionError("ReducedLpvModel: inconsistent weight shapes");
    }
}

Matrix FullLpvModel::weights() const
{
    Matrix g(wa.rows(), wa.cols() + wb.cols());
    g << wa, wb;
    return g;
}

void FullLpvModel::validate() const
{
    const Index n = n_states();
    if (n < 1 || wa.cols() != basis_x.size() * n || wb.rows() != n ||
        wb.cols() % basis_u.size() != 0 || basis_x.n_params() != basis_u.n_params()) {
        throw DimensionError("FullLpvModel: inconsistent weight shapes");
    }
}

LpvRegression::LpvRegression(const SnapshotDataset& data, SchedulingBasis basis_x,
                             SchedulingBasis basis_u)
    : basis_x_(std::move(basis_x)), basis_u_(std::move(basis_u))
{
    data.validate();
    check_params(basis_x_, basis_u_, data.n_params());
    n_states_ = data.n_states();
    n_inputs_ = data.n_inputs();
    state_scale_ = data_scale(data);

    const Index n_feat = basis_x_.size() * n_states_ + basis_u_.size() * n_inputs_;
    fac_ = std::make_shared<ProcrustesFactorization>(n_feat, n_states_);
    StreamingQr& qr = fac_->stream();
    const Index block = qr.block_rows();
    Matrix feat(n_feat, block);
    for (Index begin = 0; begin < data.size(); begin += block) {
        const Index take = std::min(block, data.size() - begin);
        stacked_feature_block(data.x, data.u, data.p, basis_x_, basis_u_, begin, take,
                              feat.leftCols(take));
        auto rows = qr.reserve_rows(take);
        rows.leftCols(n_feat) = feat.leftCols(take).transpose();
        rows.rightCols(n_states_) = data.y.middleCols(begin, take).transpose();
        qr.commit_rows(take);
    }
    fac_->finalize();
    pod_ = left_singular_vectors(data.y, n_states_);
}

Matrix LpvRegression::weights(Index procrustes_rank, double lambda) const
{
    return fac_->solve(procrustes_rank, lambda);
}

ReducedLpvModel LpvRegression::reduce(const TruncationConfig& config) const
{
    config.validate(true);
    const Index r_pr = fac_->clamp_rank(config.procrustes_rank);
    if (config.procrustes_rank > fac_->effective_rank()) {
        spdlog::warn("requested Procrustes rank {} exceeds effective rank {}; clamped",
                     config.procrustes_rank, fac_->effective_rank());
    }
    Index r_pod = config.pod_rank > 0 ? config.pod_rank : std::min(r_pr, n_states_);
    if (r_pod > n_states_) {
        throw ConfigError("POD rank " + std::to_string(r_pod) + " exceeds the state dimension " +
                          std::to_string(n_states_));
    }
    r_pod = std::min(r_pod, pod_.cols());
    const Matrix w_yr = pod_.leftCols(r_pod);

    // W_yr^T Y V_r Sigma_reg, shared by every block.
    const Matrix lead = w_yr.transpose() *
                        (fac_->projected_targets().leftCols(r_pr) *
                         fac_->regularized_inverse(r_pr, config.regularization).asDiagonal());
    const Matrix& w = fac_->left_vectors();

    const Index nphi = basis_x_.size();
    const Index npsi = basis_u_.size();
    ReducedLpvModel m;
    m.wa_tilde.resize(r_pod, nphi * r_pod);
    for (Index j = 0; j < nphi; ++j) {
        m.wa_tilde.middleCols(j * r_pod, r_pod).noalias() =
            (lead * w.block(j * n_states_, 0, n_states_, r_pr).transpose()) * w_yr;
    }
    const Index off = nphi * n_states_;
    m.wb_tilde.noalias() = lead * w.block(off, 0, npsi * n_inputs_, r_pr).transpose();
    m.pod_transform = w_yr;
    m.basis_x = basis_x_;
    m.basis_u = basis_u_;
    m.ranks = {r_pr, r_pod, config.regularization};
    m.state_scale = state_scale_;
    m.kind = "global";
    return m;
}

FullLpvModel LpvRegression::full(double lambda) const
{
    const Matrix g = fac_->solve(0, lambda);
    FullLpvModel m;
    const Index na = basis_x_.size() * n_states_;
    m.wa = g.leftCols(na);
    m.wb = g.rightCols(g.cols() - na);
    m.basis_x = basis_x_;
    m.basis_u = basis_u_;
    m.regularization = lambda;
    m.state_scale = state_scale_;
    return m;
}

ReducedLpvModel fit_global(const SnapshotDataset& data, const SchedulingBasis& basis_x,
                           const SchedulingBasis& basis_u, const TruncationConfig& config)
{
    config.validate(true);
    return LpvRegression(data, basis_x, basis_u).reduce(config);
}

FullLpvModel fit_full_least_squares(const SnapshotDataset& data, const SchedulingBasis& basis_x,
                                    const SchedulingBasis& basis_u, double lambda)
{
    return LpvRegression(data, basis_x, basis_u).full(lambda);
}

double divergence_bound(double state_scale)
{
    return 1e6 * std::max(state_scale, 1e-300);
}

namespace {

void check_signals(Index n_states, Index n_inputs, Index n_params, const Vector& x0,
                   const Matrix& u, const Matrix& p)
{
    if (x0.size() != n_states || u.rows() != n_inputs || p.rows() != n_params ||
        u.cols() != p.cols()) {
        throw DimensionError("predict_lpv: signal dimensions do not match the model");
    }
}

// Marks the run diverged at step k+1 and fills the remainder with NaN.
void mark_diverged(LpvPrediction& out, Index k)
{
    out.diverged = true;
    out.diverged_step = k;
    out.states.rightCols(out.states.cols() - k).setConstant(std::numeric_limits<double>::quiet_NaN());
}

bool out_of_bounds(const Eigen::Ref<const Vector>& x, double bound)
{
    return !x.allFinite() || x.cwiseAbs().maxCoeff() > bound;
}

} // namespace

LpvPrediction predict_lpv(const ReducedLpvModel& model, const Vector& x0, const Matrix& u,
                          const Matrix& p)
{
    model.validate();
    check_signals(model.n_states(), model.n_inputs(), model.n_params(), x0, u, p);
    const Index r = model.reduced_dim();
    const Index nu = model.n_inputs();
    const double bound = divergence_bound(model.state_scale);

    LpvPrediction out;
    out.states.resize(model.n_states(), u.cols() + 1);
    out.states.col(0) = x0;
    Vector z = model.pod_transform.transpose() * x0;
    Vector next(r);
    for (Index k = 0; k < u.cols(); ++k) {
        const Vector phi = model.basis_x.evaluate(p.col(k));
        const Vector psi = model.basis_u.evaluate(p.col(k));
        next.setZero();
        for (Index j = 0; j < phi.size(); ++j) {
            next.noalias() += phi(j) * (model.wa_tilde.middleCols(j * r, r) * z);
        }
        for (Index j = 0; j < psi.size(); ++j) {
            next.noalias() += psi(j) * (model.wb_tilde.middleCols(j * nu, nu) * u.col(k));
        }
        z.swap(next);
        out.states.col(k + 1).noalias() = model.pod_transform * z;
        if (out_of_bounds(out.states.col(k + 1), bound)) {
            mark_diverged(out, k + 1);
            break;
        }
    }
    return out;
}

LpvPrediction predict_lpv(const FullLpvModel& model, const Vector& x0, const Matrix& u,
                          const Matrix& p)
{
    model.validate();
    check_signals(model.n_states(), model.n_inputs(), model.n_params(), x0, u, p);
    const Index n = model.n_states();
    const Index nu = model.n_inputs();
    const double bound = divergence_bound(model.state_scale);

    LpvPrediction out;
    out.states.resize(n, u.cols() + 1);
    out.states.col(0) = x0;
    for (Index k = 0; k < u.cols(); ++k) {
        const Vector phi = model.basis_x.evaluate(p.col(k));
        const Vector psi = model.basis_u.evaluate(p.col(k));
        Vector next = Vector::Zero(n);
        for (Index j = 0; j < phi.size(); ++j) {
            next.noalias() += phi(j) * (model.wa.middleCols(j * n, n) * out.states.col(k));
        }
        for (Index j = 0; j < psi.size(); ++j) {
            next.noalias() += psi(j) * (model.wb.middleCols(j * nu, nu) * u.col(k));
        }
        out.states.col(k + 1) = next;
        if (out_of_bounds(next, bound)) {
            mark_diverged(out, k + 1);
            break;
        }
    }
    return out;
}

nlohmann::json to_json(const TruncationConfig& config)
{
    return {{"procrustes_rank", config.procrustes_rank},
            {"pod_rank", config.pod_rank},
            {"regularization", config.regularization}};
}

TruncationConfig truncation_from_json(const nlohmann::json& j)
{
    TruncationConfig c;
    c.procrustes_rank = j.at("procrustes_rank").get<Index>();
    c.pod_rank = j.at("pod_rank").get<Index>();
    c.regularization = j.at("regularization").get<double>();
    return c;
}

} // namespace dmdlpv
