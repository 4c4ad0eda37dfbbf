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
#ifndef DMDLPV_LPV_GLOBAL_HPP
#define DMDLPV_LPV_GLOBAL_HPP

#include "dmdlpv/dmdc.hpp"
#include "dmdlpv/features.hpp"

#include <memory>
#include <string>

namespace dmdlpv {

/// z[k+1] = W~_A (phi(theta) (x) z[k]) + W~_B (psi(theta) (x) u[k]), x = W_yr z.
struct ReducedLpvModel {
    Matrix wa_tilde;       ///< r x (n_phi r)
    Matrix wb_tilde;       ///< r x (n_psi n_u)
    Matrix pod_transform;  ///< W_yr, n_s x r
    SchedulingBasis basis_x = basis_constant(1);
    SchedulingBasis basis_u = basis_constant(1);
    TruncationConfig ranks;
    double state_scale = 0.0;
    std::string kind = "global";  ///< "global" | "local-full" | "local-latent"

    Index reduced_dim() const noexcept { return pod_transform.cols(); }
    Index n_states() const noexcept { return pod_transform.rows(); }
    Index n_inputs() const noexcept
    {
        return basis_u.size() ? wb_tilde.cols() / basis_u.size() : 0;
    }
    Index n_params() const noexcept { return basis_x.n_params(); }

    /// [W~_A W~_B]
    Matrix weights() const;
    /// Frozen matrices sum_j phi_j(theta) A~_j and sum_j psi_j(theta) B~_j.
    Matrix frozen_a(const Vector& theta) const;
    Matrix frozen_b(const Vector& theta) const;
    void validate() const;
};

/// Unreduced LPV weights [W_A W_B] fitted by (regularized) least squares.
struct FullLpvModel {
    Matrix wa;  ///< n_s x (n_phi n_s)
    Matrix wb;  ///< n_s x (n_psi n_u)
    SchedulingBasis basis_x = basis_constant(1);
    SchedulingBasis basis_u = basis_constant(1);
    double regularization = 0.0;
    double state_scale = 0.0;

    Index n_states() const noexcept { return wa.rows(); }
    Index n_inputs() const noexcept
    {
        return basis_u.size() ? wb.cols() / basis_u.size() : 0;
    }
    Index n_params() const noexcept { return basis_x.n_params(); }
    Matrix weights() const;
    void validate() const;
};

/// Factorization of the stacked feature matrix of one dataset. Every Procrustes
/// rank, POD rank and lambda can be read off it without touching the data again.
class LpvRegression {
public:
    LpvRegression(const SnapshotDataset& data, SchedulingBasis basis_x, SchedulingBasis basis_u);

    const ProcrustesFactorization& factorization() const noexcept { return *fac_; }
    const SchedulingBasis& basis_x() const noexcept { return basis_x_; }
    const SchedulingBasis& basis_u() const noexcept { return basis_u_; }
    Index n_states() const noexcept { return n_states_; }
    Index n_inputs() const noexcept { return n_inputs_; }
    double state_scale() const noexcept { return state_scale_; }
    /// Left singular vectors of Y (all of them up to its effective rank).
    const Matrix& pod_basis() const noexcept { return pod_; }

    /// Full-space G = [G_A G_B] at the given Procrustes rank (0 = full).
    Matrix weights(Index procrustes_rank, double lambda) const;
    /// W~_A = W_yr^T G_A (I (x) W_yr), W~_B = W_yr^T G_B.
    ReducedLpvModel reduce(const TruncationConfig& config) const;
    FullLpvModel full(double lambda) const;

private:
    std::shared_ptr<ProcrustesFactorization> fac_;
    SchedulingBasis basis_x_;
    SchedulingBasis basis_u_;
    Index n_states_ = 0;
    Index n_inputs_ = 0;
    double state_scale_ = 0.0;
    Matrix pod_;
};

/// Global DMD-LPV fit on a jointly excited dataset. POD rank 0 selects
/// min(r_pr, n_s); Procrustes rank 0 the full effective rank.
ReducedLpvModel fit_global(const SnapshotDataset& data, const SchedulingBasis& basis_x,
                           const SchedulingBasis& basis_u, const TruncationConfig& config);

FullLpvModel fit_full_least_squares(const SnapshotDataset& data, const SchedulingBasis& basis_x,
                                    const SchedulingBasis& basis_u, double lambda);

struct LpvPrediction {
    Matrix states;  ///< n_s x (N + 1); columns after a divergence are NaN
    bool diverged = false;
    Index diverged_step = -1;  ///< first step whose state failed the bound
};

/// ||x||_inf bound used to flag divergence: 1e6 * max(state_scale, 1e-300).
double divergence_bound(double state_scale);

/// Free-run prediction from the full initial state x0 under u (n_u x N) and
/// p (n_p x N). Divergence is reported in the result, not thrown.
LpvPrediction predict_lpv(const ReducedLpvModel& model, const Vector& x0, const Matrix& u,
                          const Matrix& p);
LpvPrediction predict_lpv(const FullLpvModel& model, const Vector& x0, const Matrix& u,
                          const Matrix& p);

nlohmann::json to_json(const TruncationConfig& config);
TruncationConfig truncation_from_json(const nlohmann::json& j);

} // namespace dmdlpv

#endif // DMDLPV_LPV_GLOBAL_HPP
