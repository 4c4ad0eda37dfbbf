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
#include "dmdlpv/lpv_local.hpp"

#include "dmdlpv/parallel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <sstream>

namespace dmdlpv {

namespace {

std::string theta_str(const Vector& theta)
{
    std::ostringstream os;
    os << "theta=(";
    for (Index i = 0; i < theta.size(); ++i) {
        os << (i ? ", " : "") << format_double(theta(i));
    }
    os << ")";
    return os.str();
}

// Least squares [A B] from (states, inputs) -> successors at full effective rank.
LtiMember fit_lti(const Matrix& x, const Matrix& u, const Matrix& y, const Vector& theta,
                  double lambda)
{
    const Index n = x.rows();
    const Index nu = u.rows();
    ProcrustesFactorization fac(n + nu, n);
    Matrix f(n + nu, x.cols());
    f << x, u;
    fac.append(f, y);
    fac.finalize();
    if (fac.effective_rank() < n + nu) {
        spdlog::warn("LTI fit at {}: regressor rank {} < {}; data not persistently exciting",
                     theta_str(theta), fac.effective_rank(), n + nu);
    }
    const Matrix g = fac.solve(0, lambda);
    return {theta, g.leftCols(n), g.rightCols(nu)};
}

void check_bundle(const LocalDatasetBundle& bundle)
{
    if (bundle.size() == 0 || bundle.thetas.size() != bundle.size()) {
        throw DimensionError("local bundle is empty or has mismatched theta list");
    }
    const SnapshotDataset& d0 = bundle.datasets.front();
    for (const auto& d : bundle.datasets) {
        d.validate();
        if (d.n_states() != d0.n_states() || d.n_inputs() != d0.n_inputs() ||
            d.n_params() != d0.n_params()) {
            throw DimensionError("local bundle datasets have inconsistent dimensions");
        }
    }
}

double bundle_scale(const LocalDatasetBundle& bundle)
{
    double s = 0.0;
    for (const auto& d : bundle.datasets) {
        s = std::max({s, d.x.cwiseAbs().maxCoeff(), d.y.cwiseAbs().maxCoeff()});
    }
    return s;
}

Index resolve_rank(const LocalDatasetBundle& bundle, Index rank)
{
    const Index ns = bundle.datasets.front().n_states();
    if (rank < 0 || rank > ns) {
        throw ConfigError("local rank must be in [0, n_s]");
    }
    return rank == 0 ? ns : rank;
}

} // namespace

void LtiCollection::validate() const
{
    if (members.empty()) {
        throw DimensionError("LtiCollection: no members");
    }
    const Index n = members.front().a.rows();
    const Index nu = members.front().b.cols();
    for (const auto& m : members) {
        if (m.a.rows() != n || m.a.cols() != n || m.b.rows() != n || m.b.cols() != nu ||
            m.theta.size() != members.front().theta.size()) {
            throw DimensionError("LtiCollection: inconsistent member dimensions");
        }
    }
    const Index expect = space == LtiSpace::Full ? pod_transform.rows() : pod_transform.cols();
    if (pod_transform.size() && expect != n) {
        throw DimensionError("LtiCollection: pod_transform does not match member dimension");
    }
}

Matrix pod_from_bundle(const LocalDatasetBundle& bundle, Index rank)
{
    check_bundle(bundle);
    Index total = 0;
    for (const auto& d : bundle.datasets) {
        total += d.size();
    }
    Matrix y_tot(bundle.datasets.front().n_states(), total);
    Index off = 0;
    for (const auto& d : bundle.datasets) {
        y_tot.middleCols(off, d.size()) = d.y;
        off += d.size();
    }
    return left_singular_vectors(y_tot, rank);
}

LocalFit regress_reduced_weights(LtiCollection reduced, const SchedulingBasis& basis_x,
                                 const SchedulingBasis& basis_u, Index rank, double lambda)
{
    reduced.validate();
    const Index n = static_cast<Index>(reduced.members.size());
    const Index r = reduced.members.front().a.rows();
    const Index nu = reduced.members.front().b.cols();
    const Index np = reduced.members.front().theta.size();
    if (basis_x.n_params() != np || basis_u.n_params() != np) {
        throw DimensionError("scheduling basis parameter count does not match the LTI collection");
    }
    if (rank < 1) {
        throw ConfigError("regression rank must be >= 1");
    }

    Matrix phi(basis_x.size(), n), psi(basis_u.size(), n);
    Matrix ta(r * r, n), tb(r * nu, n);
    for (Index i = 0; i < n; ++i) {
        const auto& m = reduced.members[static_cast<std::size_t>(i)];
        phi.col(i) = basis_x.evaluate(m.theta);
        psi.col(i) = basis_u.evaluate(m.theta);
        ta.col(i) = m.a.reshaped();
        tb.col(i) = m.b.reshaped();
    }

    ProcrustesFactorization fa(phi.rows(), ta.rows());
    fa.append(phi, ta);
    fa.finalize();
    ProcrustesFactorization fb(psi.rows(), tb.rows());
    fb.append(psi, tb);
    fb.finalize();
    const Matrix ga = fa.solve(rank, lambda);
    const Matrix gb = fb.solve(rank, lambda);

    LocalFit fit;
    fit.residual_a = fa.residual_squared_norm(ga);
    fit.residual_b = fb.residual_squared_norm(gb);
    ReducedLpvModel& m = fit.model;
    m.wa_tilde.resize(r, basis_x.size() * r);
    for (Index j = 0; j < basis_x.size(); ++j) {
        m.wa_tilde.middleCols(j * r, r) = ga.col(j).reshaped(r, r);
    }
    m.wb_tilde.resize(r, basis_u.size() * nu);
    for (Index j = 0; j < basis_u.size(); ++j) {
        m.wb_tilde.middleCols(j * nu, nu) = gb.col(j).reshaped(r, nu);
    }
    m.basis_x = basis_x;
    m.basis_u = basis_u;
    m.pod_transform = reduced.pod_transform;
    m.ranks = {rank, r, lambda};
    fit.ltis = std::move(reduced);
    return fit;
}

LocalFit fit_local_fullspace(const LocalDatasetBundle& bundle, const SchedulingBasis& basis_x,
                             const SchedulingBasis& basis_u, const LocalFitOptions& options)
{
    check_bundle(bundle);
    const Index r = resolve_rank(bundle, options.rank);
    const Matrix w = pod_from_bundle(bundle, r);

    const auto n = static_cast<Index>(bundle.size());
    LtiCollection full;
    full.space = LtiSpace::Full;
    full.pod_transform = w;
    full.members.resize(bundle.size());
    parallel_for(n, options.threads, [&](Index i) {
        const auto& d = bundle.datasets[static_cast<std::size_t>(i)];
        full.members[static_cast<std::size_t>(i)] =
            fit_lti(d.x, d.u, d.y, bundle.thetas[static_cast<std::size_t>(i)], options.regularization);
    });

    LtiCollection reduced;
    reduced.space = LtiSpace::Latent;
    reduced.pod_transform = w;
    for (const auto& m : full.members) {
        reduced.members.push_back({m.theta, w.transpose() * m.a * w, w.transpose() * m.b});
    }
    LocalFit fit = regress_reduced_weights(std::move(reduced), basis_x, basis_u, w.cols(),
                                           options.regularization);
    fit.ltis = std::move(full);
    fit.model.kind = "local-full";
    fit.model.state_scale = bundle_scale(bundle);
    return fit;
}

LocalFit fit_local_latent(const LocalDatasetBundle& bundle, const SchedulingBasis& basis_x,
                          const SchedulingBasis& basis_u, const LocalFitOptions& options)
{
    check_bundle(bundle);
    const Index r = resolve_rank(bundle, options.rank);
    const Matrix w = pod_from_bundle(bundle, r);

    LtiCollection reduced;
    reduced.space = LtiSpace::Latent;
    reduced.pod_transform = w;
    reduced.members.resize(bundle.size());
    parallel_for(static_cast<Index>(bundle.size()), options.threads, [&](Index i) {
        const auto& d = bundle.datasets[static_cast<std::size_t>(i)];
        reduced.members[static_cast<std::size_t>(i)] =
            fit_lti(w.transpose() * d.x, d.u, w.transpose() * d.y,
                    bundle.thetas[static_cast<std::size_t>(i)], options.regularization);
    });
    LocalFit fit = regress_reduced_weights(std::move(reduced), basis_x, basis_u, w.cols(),
                                           options.regularization);
    fit.model.kind = "local-latent";
    fit.model.state_scale = bundle_scale(bundle);
    return fit;
}

nlohmann::json to_json(const LtiCollection& c)
{
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : c.members) {
        members.push_back({{"theta", std::vector<double>(m.theta.data(), m.theta.data() + m.theta.size())}});
    }
    return {{"format", "dmdlpv-lti-collection"},
            {"space", c.space == LtiSpace::Full ? "full" : "latent"},
            {"members", members}};
}

Container to_container(const LtiCollection& c)
{
    Container out;
    out.header = to_json(c);
    out.add("W_yr", c.pod_transform);
    for (std::size_t i = 0; i < c.members.size(); ++i) {
        out.add("A_" + std::to_string(i), c.members[i].a);
        out.add("B_" + std::to_string(i), c.members[i].b);
    }
    return out;
}

LtiCollection lti_collection_from_container(const Container& c)
{
    if (c.header.value("format", "") != "dmdlpv-lti-collection") {
        throw IoError("container is not an LTI collection");
    }
    LtiCollection out;
    out.space = c.header.at("space").get<std::string>() == "full" ? LtiSpace::Full : LtiSpace::Latent;
    out.pod_transform = c.matrix("W_yr");
    const auto& members = c.header.at("members");
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto th = members[i].at("theta").get<std::vector<double>>();
        out.members.push_back({Eigen::Map<const Vector>(th.data(), static_cast<Index>(th.size())),
                               c.matrix("A_" + std::to_string(i)), c.matrix("B_" + std::to_string(i))});
    }
    out.validate();
    return out;
}

} // namespace dmdlpv
