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
#include "dmdlpv/features.hpp"

#include "dmdlpv/numerics.hpp"

#include <set>

namespace dmdlpv {

SchedulingBasis::SchedulingBasis(Index n_params, std::vector<std::vector<int>> exponents,
                                 std::string name)
    : n_params_(n_params), exponents_(std::move(exponents)), name_(std::move(name))
{
    if (n_params < 1) {
        throw ConfigError("basis needs at least one parameter");
    }
    if (exponents_.empty()) {
        throw ConfigError("basis has no entries");
    }
    std::set<std::vector<int>> seen;
    for (const auto& e : exponents_) {
        if (static_cast<Index>(e.size()) != n_params) {
            throw ConfigError("basis exponent tuple has wrong length");
        }
        for (int v : e) {
            if (v < 0) {
                throw ConfigError("basis exponents must be >= 0");
            }
        }
        if (!seen.insert(e).second) {
            throw ConfigError("duplicate monomial in basis");
        }
    }
    for (int v : exponents_.front()) {
        if (v != 0) {
            throw ConfigError("first basis entry must be the constant");
        }
    }
}

Vector SchedulingBasis::evaluate(const Eigen::Ref<const Vector>& theta) const
{
    if (theta.size() != n_params_) {
        throw DimensionError("basis expects " + std::to_string(n_params_) +
                             " parameters, got " + std::to_string(theta.size()));
    }
    Vector out(size());
    for (Index i = 0; i < size(); ++i) {
        double v = 1.0;
        const auto& e = exponents_[static_cast<std::size_t>(i)];
        for (Index j = 0; j < n_params_; ++j) {
            for (int k = 0; k < e[static_cast<std::size_t>(j)]; ++k) {
                v *= theta(j);
            }
        }
        out(i) = v;
    }
    return out;
}

nlohmann::json SchedulingBasis::to_json() const
{
    return {{"name", name_}, {"n_params", n_params_}, {"exponents", exponents_}};
}

SchedulingBasis SchedulingBasis::from_json(const nlohmann::json& j)
{
    return SchedulingBasis(j.at("n_params").get<Index>(),
                           j.at("exponents").get<std::vector<std::vector<int>>>(),
                           j.value("name", ""));
}

namespace {

SchedulingBasis univariate(int degree, std::string name)
{
    std::vector<std::vector<int>> e;
    for (int d = 0; d <= degree; ++d) {
        e.push_back({d});
    }
    return SchedulingBasis(1, std::move(e), std::move(name));
}

// Tuples of length `slots` summing to `total`, lexicographically descending.
void compositions(int total, std::size_t slot, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out)
{
    if (slot + 1 == cur.size()) {
        cur[slot] = total;
        out.push_back(cur);
        return;
    }
    for (int v = total; v >= 0; --v) {
        cur[slot] = v;
        compositions(total - v, slot + 1, cur, out);
    }
}

} // namespace

SchedulingBasis basis_constant(Index n_params)
{
    return SchedulingBasis(n_params, {std::vector<int>(static_cast<std::size_t>(n_params), 0)},
                           "constant");
}

SchedulingBasis basis_exact_1p()
{
    return univariate(3, "exact");
}

SchedulingBasis basis_under_1p()
{
    return univariate(2, "under");
}

SchedulingBasis basis_over_1p()
{
    return univariate(4, "over");
}

SchedulingBasis basis_total_degree(Index n_params, int degree)
{
    if (n_params < 1 || degree < 0) {
        throw ConfigError("total-degree basis needs n_params >= 1 and degree >= 0");
    }
    std::vector<std::vector<int>> e;
    std::vector<int> cur(static_cast<std::size_t>(n_params), 0);
    for (int d = 0; d <= degree; ++d) {
        compositions(d, 0, cur, e);
    }
    return SchedulingBasis(n_params, std::move(e),
                           "total-degree-" + std::to_string(degree));
}

SchedulingBasis basis_by_name(const std::string& name, Index n_params, int degree)
{
    if (name == "exact" || name == "under" || name == "over") {
        if (n_params != 1) {
            throw ConfigError("basis '" + name + "' is defined for one parameter");
        }
        return name == "exact" ? basis_exact_1p()
               : name == "under" ? basis_under_1p()
                                 : basis_over_1p();
    }
    if (name == "constant") {
        return basis_constant(n_params);
    }
    if (name == "total-degree") {
        return basis_total_degree(n_params, degree);
    }
    throw ConfigError("unknown basis '" + name + "'");
}

void stacked_feature_block(const Eigen::Ref<const Matrix>& states,
                           const Eigen::Ref<const Matrix>& inputs,
                           const Eigen::Ref<const Matrix>& params,
                           const SchedulingBasis& basis_x, const SchedulingBasis& basis_u,
                           Index begin, Index count, Eigen::Ref<Matrix> out)
{
    const Index ns = states.rows();
    const Index nu = inputs.rows();
    const Index rows = basis_x.size() * ns + basis_u.size() * nu;
    if (out.rows() != rows || out.cols() != count) {
        throw DimensionError("stacked_feature_block: output block has wrong shape");
    }
    if (params.rows() != basis_x.n_params() || params.rows() != basis_u.n_params()) {
        throw DimensionError("basis parameter count does not match the data");
    }
    const bool shared = basis_x == basis_u;
    Vector phi;
    Vector psi;
    for (Index c = 0; c < count; ++c) {
        const Index k = begin + c;
        phi = basis_x.evaluate(params.col(k));
        psi = shared ? phi : basis_u.evaluate(params.col(k));
        for (Index i = 0; i < phi.size(); ++i) {
            out.col(c).segment(i * ns, ns) = phi(i) * states.col(k);
        }
        const Index off = phi.size() * ns;
        for (Index i = 0; i < psi.size(); ++i) {
            out.col(c).segment(off + i * nu, nu) = psi(i) * inputs.col(k);
        }
    }
}

FeatureMatrices assemble_features(const SnapshotDataset& data, const SchedulingBasis& basis_x,
                                  const SchedulingBasis& basis_u)
{
    data.validate();
    if (data.n_params() != basis_x.n_params() || data.n_params() != basis_u.n_params()) {
        throw DimensionError("basis parameter count does not match the dataset");
    }
    const Index n = data.size();
    FeatureMatrices f;
    f.p_x.resize(basis_x.size(), n);
    f.p_u.resize(basis_u.size(), n);
    f.x_p.resize(basis_x.size() * data.n_states(), n);
    f.u_p.resize(basis_u.size() * data.n_inputs(), n);
    for (Index k = 0; k < n; ++k) {
        f.p_x.col(k) = basis_x.evaluate(data.p.col(k));
        f.p_u.col(k) = basis_u.evaluate(data.p.col(k));
        f.x_p.col(k) = kron_vec(f.p_x.col(k), data.x.col(k));
        f.u_p.col(k) = kron_vec(f.p_u.col(k), data.u.col(k));
    }
    return f;
}

} // namespace dmdlpv
