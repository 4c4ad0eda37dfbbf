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
#ifndef DMDLPV_DMDC_HPP
#define DMDLPV_DMDC_HPP

#include "dmdlpv/excitation.hpp"
#include "dmdlpv/numerics.hpp"

#include <complex>
#include <vector>

namespace dmdlpv {

/// Reduced LTI pair z[k+1] = A~ z[k] + B~ u[k] with x = pod_transform z.
struct ReducedLti {
    Matrix a_tilde;        ///< r x r
    Matrix b_tilde;        ///< r x n_u
    Matrix pod_transform;  ///< n_s x r, orthonormal columns
    TruncationConfig ranks;
    /// max |x| over the training snapshots; scales the divergence test.
    double state_scale = 0.0;

    Index reduced_dim() const noexcept { return a_tilde.rows(); }
    Index n_states() const noexcept { return pod_transform.rows(); }
    Index n_inputs() const noexcept { return b_tilde.cols(); }
};

/// Fit result with the factors that mode recovery reuses.
struct DmdcFit {
    ReducedLti model;
    Matrix wr_state;      ///< W_{r,1}: rows of W_r belonging to the state, n_s x r_pr
    Matrix wr_input;      ///< W_{r,2}: n_u x r_pr
    Vector sigma_reg;     ///< regularized inverse singular values, length r_pr
    Matrix yv;            ///< Y V_r, n_s x r_pr
    Index effective_rank = 0;
};

/// Rank-limited DMDc. Procrustes rank 0 selects the full effective rank; POD
/// rank 0 selects min(r_pr, n_s).
DmdcFit fit_dmdc(const SnapshotDataset& data, TruncationConfig config);

struct DynamicMode {
    std::complex<double> eigenvalue;
    Eigen::VectorXcd reduced_eigvec;  ///< length r_pod
    Eigen::VectorXcd full_mode;       ///< length n_s
};

/// Up to `count` eigenpairs of A~ ordered by decreasing modulus, each lifted
/// to a full-space mode phi = (1/lambda) Y V_r Sigma_reg W_{r,1}^T W_yr omega.
/// Eigenvalues that are numerically zero are skipped with a warning.
std::vector<DynamicMode> recover_modes(const DmdcFit& fit, Index count);

struct LtiPrediction {
    Matrix reduced;  ///< r x (N + 1)
    Matrix lifted;   ///< n_s x (N + 1)
};

/// Iterates the reduced map from z0 under u (n_u x N).
LtiPrediction predict(const ReducedLti& model, const Vector& z0, const Matrix& u);

} // namespace dmdlpv

#endif // DMDLPV_DMDC_HPP
