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
#ifndef DMDLPV_FEATURES_HPP
#define DMDLPV_FEATURES_HPP

#include "dmdlpv/excitation.hpp"

#include <string>
#include <vector>

namespace dmdlpv {

/// Monomial scheduling basis phi(theta) = (1, phi_1(theta), ...).
///
/// Entry 0 is always the constant. The feature count size() includes it, so
/// {1, p, p^2, p^3} has size 4. Block j of a weight matrix W_A = (A_0 A_1 ...)
/// multiplies entry j.
class SchedulingBasis {
public:
    SchedulingBasis(Index n_params, std::vector<std::vector<int>> exponents,
                    std::string name = {});

    Index n_params() const noexcept { return n_params_; }
    Index size() const noexcept { return static_cast<Index>(exponents_.size()); }
    const std::vector<std::vector<int>>& exponents() const noexcept { return exponents_; }
    const std::string& name() const noexcept { return name_; }

    Vector evaluate(const Eigen::Ref<const Vector>& theta) const;

    nlohmann::json to_json() const;
    static SchedulingBasis from_json(const nlohmann::json& j);

    bool operator==(const SchedulingBasis& other) const
    {
        return n_params_ == other.n_params_ && exponents_ == other.exponents_;
    }

private:
    Index n_params_;
    std::vector<std::vector<int>> exponents_;
    std::string name_;
};

SchedulingBasis basis_constant(Index n_params);
/// {1, p, p^2, p^3}
SchedulingBasis basis_exact_1p();
/// {1, p, p^2}
SchedulingBasis basis_under_1p();
/// {1, p, p^2, p^3, p^4}
SchedulingBasis basis_over_1p();
/// All monomials of total degree <= degree, graded-lexicographic, constant first.
SchedulingBasis basis_total_degree(Index n_params, int degree);
/// "exact" | "under" | "over" | "constant" | "total-degree"
SchedulingBasis basis_by_name(const std::string& name, Index n_params, int degree);

inline Vector eval_basis(const SchedulingBasis& basis, const Eigen::Ref<const Vector>& theta)
{
    return basis.evaluate(theta);
}

struct FeatureMatrices {
    Matrix p_x;  ///< basis_x.size() x N
    Matrix p_u;  ///< basis_u.size() x N
    Matrix x_p;  ///< basis_x.size() * n_s x N, column k = p_x[:,k] (x) x[:,k]
    Matrix u_p;  ///< basis_u.size() * n_u x N
};

FeatureMatrices assemble_features(const SnapshotDataset& data, const SchedulingBasis& basis_x,
                                  const SchedulingBasis& basis_u);

/// Columns begin..begin+count of [P_x (x) states; P_u (x) inputs] written into
/// `out` (rows = basis_x.size()*rows(states) + basis_u.size()*rows(inputs)).
/// `states` need not be the full state: the reduced fits pass projected states.
void stacked_feature_block(const Eigen::Ref<const Matrix>& states,
                           const Eigen::Ref<const Matrix>& inputs,
                           const Eigen::Ref<const Matrix>& params,
                           const SchedulingBasis& basis_x, const SchedulingBasis& basis_u,
                           Index begin, Index count, Eigen::Ref<Matrix> out);

} // namespace dmdlpv

#endif // DMDLPV_FEATURES_HPP
