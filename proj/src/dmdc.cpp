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
#include "dmdlpv/dmdc.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>

namespace dmdlpv {

DmdcFit fit_dmdc(const SnapshotDataset& data, TruncationConfig config)
{
    data.validate();
    config.validate(true);
    for (Index k = 1; k < data.size(); ++k) {
        if (data.p.col(k) != data.p.col(0)) {
            throw ConfigError("DMDc needs a frozen-parameter dataset (P varies at column " +
                              std::to_string(k) + ")");
        }
    }
    const Index ns = data.n_states();
    const Index nu = data.n_inputs();

    ProcrustesFactorization fac(ns + nu, ns);
    Matrix stacked(ns + nu, data.size());
    stacked << data.x, data.u;
    fac.append(stacked, data.y);
    fac.finalize();

    const Index r_pr = fac.clamp_rank(config.procrustes_rank);
    if (config.procrustes_rank > fac.effective_rank()) {
        spdlog::warn("DMDc: requested Procrustes rank {} exceeds effective rank {}; clamped",
                     config.procrustes_rank, fac.effective_rank());
    }
    Index r_pod = config.pod_rank > 0 ? config.pod_rank : std::min(r_pr, ns);
    if (r_pod > ns) {
        throw ConfigError("POD rank exceeds the state dimension");
    }

    DmdcFit fit;
    fit.effective_rank = fac.effective_rank();
    fit.sigma_reg = fac.regularized_inverse(r_pr, config.regularization);
    fit.yv = fac.projected_targets().leftCols(r_pr);
    fit.wr_state = fac.left_vectors().topLeftCorner(ns, r_pr);
    fit.wr_input = fac.left_vectors().block(ns, 0, nu, r_pr);

    const Matrix pod = left_singular_vectors(data.y, r_pod);
    const Matrix lead = pod.transpose() * (fit.yv * fit.sigma_reg.asDiagonal());
    fit.model.pod_transform = pod;
    fit.model.a_tilde = (lead * fit.wr_state.transpose()) * pod;
    fit.model.b_tilde = lead * fit.wr_input.transpose();
    fit.model.ranks = {r_pr, pod.cols(), config.regularization};
    fit.model.state_scale = std::max(data.x.cwiseAbs().maxCoeff(), data.y.cwiseAbs().maxCoeff());
    return fit;
}

std::vector<DynamicMode> recover_modes(const DmdcFit& fit, Index count)
{
    const Matrix& a = fit.model.a_tilde;
    Eigen::EigenSolver<Matrix> es(a, true);
    const Eigen::VectorXcd lambdas = es.eigenvalues();
    const Eigen::MatrixXcd vecs = es.eigenvectors();

    std::vector<Index> order(static_cast<std::size_t>(lambdas.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
        return std::abs(lambdas(i)) > std::abs(lambdas(j));
    });

    const double lmax = lambdas.size() ? std::abs(lambdas(order.front())) : 0.0;
    const double cutoff = std::max(lmax, 1.0) * 1e-12;

    // Y V_r Sigma_reg W_{r,1}^T W_yr maps reduced eigenvectors to A W_yr omega.
    const Eigen::MatrixXcd lift =
        ((fit.yv * fit.sigma_reg.asDiagonal()) * (fit.wr_state.transpose() * fit.model.pod_transform))
            .cast<std::complex<double>>();

    std::vector<DynamicMode> modes;
    for (Index idx : order) {
        if (static_cast<Index>(modes.size()) >= count) {
            break;
        }
        const std::complex<double> lambda = lambdas(idx);
        if (std::abs(lambda) <= cutoff) {
            spdlog::warn("recover_modes: skipping numerically zero eigenvalue {}", std::abs(lambda));
            continue;
        }
        DynamicMode m;
        m.eigenvalue = lambda;
        m.reduced_eigvec = vecs.col(idx);
        m.full_mode = (lift * m.reduced_eigvec) / lambda;
        modes.push_back(std::move(m));
    }
    return modes;
}

LtiPrediction predict(const ReducedLti& model, const Vector& z0, const Matrix& u)
{
    if (z0.size() != model.reduced_dim() || u.rows() != model.n_inputs()) {
        throw DimensionError("predict: initial state or input dimension mismatch");
    }
    const Index n = u.cols();
    LtiPrediction out;
    out.reduced.resize(model.reduced_dim(), n + 1);
    out.reduced.col(0) = z0;
    for (Index k = 0; k < n; ++k) {
        out.reduced.col(k + 1) = model.a_tilde * out.reduced.col(k) + model.b_tilde * u.col(k);
    }
    out.lifted = model.pod_transform * out.reduced;
    return out;
}

} // namespace dmdlpv
