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
#ifndef DMDLPV_LPV_LOCAL_HPP
#define DMDLPV_LPV_LOCAL_HPP

#include "dmdlpv/lpv_global.hpp"

#include <vector>

namespace dmdlpv {

enum class LtiSpace { Full, Latent };

struct LtiMember {
    Vector theta;
    Matrix a;  ///< n x n in the collection's space
    Matrix b;  ///< n x n_u
};

struct LtiCollection {
    std::vector<LtiMember> members;
    LtiSpace space = LtiSpace::Full;
    Matrix pod_transform;  ///< W_yr, n_s x r

    void validate() const;
};

/// POD basis of the horizontally concatenated Y_i, truncated at r. Like
/// left_singular_vectors, r = n_s yields a square orthogonal transform even
/// when the data are rank deficient.
Matrix pod_from_bundle(const LocalDatasetBundle& bundle, Index rank);

struct LocalFit {
    LtiCollection ltis;
    ReducedLpvModel model;
    /// Squared Frobenius residuals of the two weight regressions.
    double residual_a = 0.0;
    double residual_b = 0.0;
};

struct LocalFitOptions {
    Index rank = 0;            ///< shared POD / Procrustes rank; 0 = n_s
    double regularization = 0.0;
    unsigned threads = 1;      ///< per-theta LTI fits
};

/// Per-theta least squares in full space, projected with W_yr.
LocalFit fit_local_fullspace(const LocalDatasetBundle& bundle, const SchedulingBasis& basis_x,
                             const SchedulingBasis& basis_u, const LocalFitOptions& options);

/// Per-theta least squares directly on W_yr^T X_i, U_i, W_yr^T Y_i.
LocalFit fit_local_latent(const LocalDatasetBundle& bundle, const SchedulingBasis& basis_x,
                          const SchedulingBasis& basis_u, const LocalFitOptions& options);

/// Rank-limited regression of reduced weights from reduced LTI matrices:
///   [A~(1) ... A~(n)] = W~_A [phi(theta_1) (x) I_r ... phi(theta_n) (x) I_r]
/// and the B analogue. Solved column-wise on vec(A~(i)) against
/// Phi = [phi(theta_1) ... phi(theta_n)]; the rank limit applies to Phi.
LocalFit regress_reduced_weights(LtiCollection reduced, const SchedulingBasis& basis_x,
                                 const SchedulingBasis& basis_u, Index rank, double lambda);

nlohmann::json to_json(const LtiCollection& c);
Container to_container(const LtiCollection& c);
LtiCollection lti_collection_from_container(const Container& c);

} // namespace dmdlpv

#endif // DMDLPV_LPV_LOCAL_HPP
