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

#include "generators.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

namespace dmdlpv {
namespace {

using testing::Gen;
using testing::rel_fro;

struct SyntheticLpv {
    Matrix wa;
    Matrix wb;
    SnapshotDataset data;
};

// Scattered (not trajectory) snapshots of a known LPV map so the regression
// problem is well posed with a unique solution.
SyntheticLpv synthetic_lpv(Gen& g, const SchedulingBasis& bx, const SchedulingBasis& bu,
                           Index ns, Index nu, Index n)
{
    SyntheticLpv s;
    s.wa = (0.4 / std::sqrt(static_cast<double>(ns))) * g.matrix(ns, bx.size() * ns);
    s.wb = g.matrix(ns, bu.size() * nu);
    s.data.x = g.matrix(ns, n);
    s.data.u = g.matrix(nu, n);
    s.data.p = g.matrix(bx.n_params(), n, 0.0, 1.0);
    s.data.y.resize(ns, n);
    for (Index k = 0; k < n; ++k) {
        const Vector phi = bx.evaluate(s.data.p.col(k));
        const Vector psi = bu.evaluate(s.data.p.col(k));
        s.data.y.col(k) = s.wa * kron_vec(phi, s.data.x.col(k)) +
                          s.wb * kron_vec(psi, s.data.u.col(k));
    }
    return s;
}

Matrix stacked_features(const SnapshotDataset& d, const SchedulingBasis& bx,
                        const SchedulingBasis& bu)
{
    const FeatureMatrices f = assemble_features(d, bx, bu);
    Matrix out(f.x_p.rows() + f.u_p.rows(), d.size());
    out << f.x_p, f.u_p;
    return out;
}

TEST(LpvGlobal, FullLeastSquaresRecoversKnownWeights)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Gen g(seed);
        const SchedulingBasis b = basis_total_degree(2, 2);
        const SyntheticLpv s = synthetic_lpv(g, b, b, 5, 2, 400);
        const FullLpvModel m = fit_full_least_squares(s.data, b, b, 0.0);
        EXPECT_LT(rel_fro(m.wa, s.wa), 1e-9) << "seed " << seed;
        EXPECT_LT(rel_fro(m.wb, s.wb), 1e-9) << "seed " << seed;
        EXPECT_NO_THROW(m.validate());
        EXPECT_EQ(m.n_inputs(), 2);
        EXPECT_EQ(m.n_params(), 2);

        // Full POD and full Procrustes rank: the reduced model is an exact
        // change of coordinates of the true weights.
        const ReducedLpvModel r = fit_global(s.data, b, b, {0, 5, 0.0});
        const Matrix& w = r.pod_transform;
        const Matrix lift = Eigen::kroneckerProduct(Matrix::Identity(b.size(), b.size()), w);
        EXPECT_LT(rel_fro(w * r.wa_tilde * lift.transpose(), s.wa), 1e-9);
        EXPECT_LT(rel_fro(w * r.wb_tilde, s.wb), 1e-9);
    }
}

TEST(LpvGlobal, ReductionMatchesMaterializedKronecker)
{
    Gen g(21);
    const SchedulingBasis bx = basis_exact_1p();
    const SchedulingBasis bu = basis_under_1p();
    SyntheticLpv s = synthetic_lpv(g, bx, bu, 8, 1, 300);
    s.data.y += 1e-2 * g.matrix(8, 300);
    const LpvRegression reg(s.data, bx, bu);
    for (const TruncationConfig cfg : {TruncationConfig{10, 3, 0.0}, TruncationConfig{25, 8, 0.0},
                                       TruncationConfig{0, 5, 0.3}, TruncationConfig{6, 6, 0.05}}) {
        const ReducedLpvModel m = reg.reduce(cfg);
        const Matrix& w = m.pod_transform;
        const Index r = w.cols();
        ASSERT_EQ(r, cfg.pod_rank);
        EXPECT_LT((w.transpose() * w - Matrix::Identity(r, r)).norm(), 1e-10);
        const Matrix gfull = reg.weights(cfg.procrustes_rank, cfg.regularization);
        const Matrix ga = gfull.leftCols(bx.size() * 8);
        const Matrix gb = gfull.rightCols(bu.size() * 1);
        const Matrix kron = Eigen::kroneckerProduct(Matrix::Identity(bx.size(), bx.size()), w);
        EXPECT_LT(rel_fro(m.wa_tilde, w.transpose() * ga * kron), 1e-10);
        EXPECT_LT(rel_fro(m.wb_tilde, w.transpose() * gb), 1e-10);
        EXPECT_EQ(m.weights().cols(), m.wa_tilde.cols() + m.wb_tilde.cols());
    }
}

TEST(LpvGlobal, WeightsMatchProcrustesOnFeatures)
{
    Gen g(22);
    const SchedulingBasis b = basis_exact_1p();
    SyntheticLpv s = synthetic_lpv(g, b, b, 6, 1, 250);
    s.data.y += 1e-3 * g.matrix(6, 250);
    const LpvRegression reg(s.data, b, b);
    const Matrix f = stacked_features(s.data, b, b);
    for (Index r : {Index{5}, Index{12}, Index{28}}) {
        for (double lambda : {0.0, 0.2}) {
            EXPECT_LT(rel_fro(reg.weights(r, lambda), procrustes_solve(s.data.y, f, r, lambda)),
                      1e-9);
        }
    }
}

TEST(LpvGlobal, FullPodReproducesFullSpaceSolution)
{
    Gen g(23);
    const SchedulingBasis b = basis_exact_1p();
    SyntheticLpv s = synthetic_lpv(g, b, b, 6, 1, 250);
    s.data.y += 1e-2 * g.matrix(6, 250);
    const LpvRegression reg(s.data, b, b);
    for (Index r_pr : {Index{8}, Index{20}, Index{0}}) {
        const ReducedLpvModel m = reg.reduce({r_pr, 6, 0.0});
        const Matrix& w = m.pod_transform;
        const Matrix lift = Eigen::kroneckerProduct(Matrix::Identity(4, 4), w);
        const Matrix g_full = reg.weights(r_pr, 0.0);
        EXPECT_LT(rel_fro(w * m.wa_tilde * lift.transpose(), g_full.leftCols(24)), 1e-8);
        EXPECT_LT(rel_fro(w * m.wb_tilde, g_full.rightCols(4)), 1e-8);
    }
}

TEST(LpvGlobal, ConstantBasisDegeneratesToDmdc)
{
    Gen g(24);
    SnapshotDataset d;
    const Matrix a = 0.3 * g.matrix(6, 6);
    d.x = g.matrix(6, 200);
    d.u = g.matrix(1, 200);
    d.y = a * d.x + g.matrix(6, 1) * d.u + 1e-2 * g.matrix(6, 200);
    d.p = Matrix::Constant(1, 200, 0.4);
    for (const TruncationConfig cfg : {TruncationConfig{7, 6, 0.0}, TruncationConfig{4, 3, 0.1}}) {
        const ReducedLpvModel lpv = fit_global(d, basis_constant(1), basis_constant(1), cfg);
        const DmdcFit dmdc = fit_dmdc(d, cfg);
        const Matrix& w1 = lpv.pod_transform;
        const Matrix& w2 = dmdc.model.pod_transform;
        // Compare in full coordinates: POD bases may differ by column signs.
        EXPECT_LT(rel_fro(w1 * lpv.wa_tilde * w1.transpose(),
                          w2 * dmdc.model.a_tilde * w2.transpose()), 1e-12);
        EXPECT_LT(rel_fro(w1 * lpv.wb_tilde, w2 * dmdc.model.b_tilde), 1e-12);
        const Vector th = Vector::Constant(1, 0.4);
        EXPECT_EQ(lpv.frozen_a(th), lpv.wa_tilde);
    }
}

TEST(LpvGlobal, FrozenMatricesFollowBlockLayout)
{
    Gen g(25);
    const SchedulingBasis b = basis_total_degree(2, 3);
    ReducedLpvModel m;
    const Index r = 4;
    m.basis_x = b;
    m.basis_u = b;
    m.wa_tilde = g.matrix(r, b.size() * r);
    m.wb_tilde = g.matrix(r, b.size() * 2);
    m.pod_transform = g.orthonormal(7, r);
    EXPECT_NO_THROW(m.validate());
    for (int t = 0; t < 50; ++t) {
        const Vector th = g.vector(2, 0.0, 1.0);
        const Vector z = g.vector(r);
        const Vector u = g.vector(2);
        const Vector phi = b.evaluate(th);
        Vector sum = Vector::Zero(r);
        for (Index i = 0; i < phi.size(); ++i) {
            sum += phi(i) * m.wa_tilde.middleCols(i * r, r) * z;
        }
        EXPECT_LT((m.wa_tilde * kron_vec(phi, z) - sum).norm(), 1e-12);
        EXPECT_LT((m.frozen_a(th) * z - sum).norm(), 1e-12);
        EXPECT_LT((m.frozen_b(th) * u - m.wb_tilde * kron_vec(phi, u)).norm(), 1e-12);
    }
    m.wa_tilde.resize(r, 3);
    EXPECT_THROW(m.validate(), DimensionError);
}

TEST(LpvGlobal, PredictMatchesManualIteration)
{
    Gen g(26);
    const SchedulingBasis b = basis_exact_1p();
    const SyntheticLpv s = synthetic_lpv(g, b, b, 5, 1, 200);
    const ReducedLpvModel m = fit_global(s.data, b, b, {0, 5, 0.0});
    const FullLpvModel f = fit_full_least_squares(s.data, b, b, 0.0);
    const Matrix u = g.matrix(1, 30);
    const Matrix p = g.matrix(1, 30, 0.0, 1.0);
    const Vector x0 = g.vector(5);
    Vector x = x0;
    const LpvPrediction pr = predict_lpv(m, x0, u, p);
    const LpvPrediction pf = predict_lpv(f, x0, u, p);
    EXPECT_FALSE(pr.diverged);
    EXPECT_EQ(pr.diverged_step, -1);
    for (Index k = 0; k < 30; ++k) {
        x = s.wa * kron_vec(b.evaluate(p.col(k)), x) + s.wb * kron_vec(b.evaluate(p.col(k)),
                                                                       Vector(u.col(k)));
        EXPECT_LT((pr.states.col(k + 1) - x).norm(), 1e-8 * std::max(1.0, x.norm()));
        EXPECT_LT((pf.states.col(k + 1) - x).norm(), 1e-8 * std::max(1.0, x.norm()));
    }
    EXPECT_THROW(predict_lpv(m, Vector::Zero(4), u, p), DimensionError);
}

TEST(LpvGlobal, DivergenceIsFlaggedAndTruncated)
{
    ReducedLpvModel m;
    m.wa_tilde = Matrix::Constant(1, 1, 2.0);
    m.wb_tilde = Matrix::Zero(1, 1);
    m.pod_transform = Matrix::Ones(1, 1);
    m.state_scale = 1.0;
    const LpvPrediction p =
        predict_lpv(m, Vector::Ones(1), Matrix::Zero(1, 40), Matrix::Zero(1, 40));
    EXPECT_TRUE(p.diverged);
    EXPECT_EQ(p.diverged_step, 20);  // 2^20 > 1e6 >= 2^19
    EXPECT_EQ(p.states(0, 19), std::ldexp(1.0, 19));
    for (Index k = 20; k <= 40; ++k) {
        EXPECT_TRUE(std::isnan(p.states(0, k)));
    }
    EXPECT_DOUBLE_EQ(divergence_bound(2.0), 2e6);
}

TEST(LpvGlobal, TrainingResidualDecreasesWithRankOnPlantData)
{
    const DiffusionPlant plant = build_plant(0.1, 0.1, GainFunction::polynomial(), 1e-3, 1e-3);
    const SnapshotDataset d = build_global_dataset(plant, {0.0, 4.0, 50, 3000, 5},
                                                   {{0.0, 1.0, 200, 3000, 6}},
                                                   Vector::Zero(plant.n_states));
    const SchedulingBasis b = basis_exact_1p();
    const LpvRegression reg(d, b, b);
    const Matrix f = stacked_features(d, b, b);
    double previous = std::numeric_limits<double>::infinity();
    for (Index r : {Index{2}, Index{5}, Index{10}, Index{20}, Index{30}, Index{40}}) {
        const Matrix gr = reg.weights(r, 0.0);
        const double direct = (d.y - gr * f).squaredNorm();
        EXPECT_NEAR(reg.factorization().residual_squared_norm(gr), direct,
                    1e-8 * d.y.squaredNorm() + 1e-6 * direct);
        EXPECT_LE(direct, previous) << "rank " << r;
        previous = direct;
    }
    // The exact basis reproduces the frozen-parameter dynamics closely.
    EXPECT_LT(previous / static_cast<double>(d.y.size()), 1e-10);
}

TEST(LpvGlobal, RejectsInconsistentInputs)
{
    Gen g(27);
    const SchedulingBasis b = basis_exact_1p();
    SyntheticLpv s = synthetic_lpv(g, b, b, 4, 1, 50);
    EXPECT_THROW(fit_global(s.data, basis_total_degree(2, 2), b, {0, 0, 0.0}), DimensionError);
    EXPECT_THROW(fit_global(s.data, b, b, {5, 10, 0.0}), ConfigError);
    EXPECT_THROW(fit_global(s.data, b, b, {0, 0, -1.0}), ConfigError);
}

TEST(TruncationJson, RoundTrip)
{
    const TruncationConfig c{40, 15, 0.05};
    const TruncationConfig back = truncation_from_json(to_json(c));
    EXPECT_EQ(back.procrustes_rank, 40);
    EXPECT_EQ(back.pod_rank, 15);
    EXPECT_EQ(back.regularization, 0.05);
}

} // namespace
} // namespace dmdlpv
