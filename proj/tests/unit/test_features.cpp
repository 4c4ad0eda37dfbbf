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

#include "generators.hpp"

#include <gtest/gtest.h>

#include <set>

namespace dmdlpv {
namespace {

using testing::Gen;

TEST(Basis, Sizes)
{
    EXPECT_EQ(basis_exact_1p().size(), 4);
    EXPECT_EQ(basis_under_1p().size(), 3);
    EXPECT_EQ(basis_over_1p().size(), 5);
    EXPECT_EQ(basis_constant(2).size(), 1);
    // (d + n)! / (d! n!) monomials of total degree <= d in n variables.
    EXPECT_EQ(basis_total_degree(2, 5).size(), 21);
    EXPECT_EQ(basis_total_degree(2, 1).size(), 3);
    EXPECT_EQ(basis_total_degree(3, 2).size(), 10);
    EXPECT_EQ(basis_total_degree(1, 3), basis_exact_1p());
}

TEST(Basis, ConstantFirstAndUniqueExponents)
{
    for (const SchedulingBasis& b :
         {basis_exact_1p(), basis_under_1p(), basis_over_1p(), basis_total_degree(2, 5),
          basis_total_degree(3, 3)}) {
        std::set<std::vector<int>> seen(b.exponents().begin(), b.exponents().end());
        EXPECT_EQ(static_cast<Index>(seen.size()), b.size());
        for (int e : b.exponents().front()) {
            EXPECT_EQ(e, 0);
        }
        Gen g(b.size());
        for (int t = 0; t < 10; ++t) {
            EXPECT_EQ(b.evaluate(g.vector(b.n_params(), 0.0, 1.0))(0), 1.0);
        }
    }
}

TEST(Basis, GradedLexOrder)
{
    const SchedulingBasis b = basis_total_degree(2, 2);
    const auto& e = b.exponents();
    const std::vector<std::vector<int>> expected{{0, 0}, {1, 0}, {0, 1},
                                                 {2, 0}, {1, 1}, {0, 2}};
    EXPECT_EQ(e, expected);
}

TEST(Basis, NestedPrefixes)
{
    Gen g(5);
    for (int t = 0; t < 20; ++t) {
        const Vector th = g.vector(1, 0.0, 1.0);
        const Vector under = basis_under_1p().evaluate(th);
        const Vector exact = basis_exact_1p().evaluate(th);
        const Vector over = basis_over_1p().evaluate(th);
        EXPECT_EQ(exact.head(3), under);
        EXPECT_EQ(over.head(4), exact);
    }
}

TEST(Basis, EvaluatesMonomials)
{
    Vector th(2);
    th << 0.5, 0.25;
    const Vector v = basis_total_degree(2, 2).evaluate(th);
    Vector expected(6);
    expected << 1.0, 0.5, 0.25, 0.25, 0.125, 0.0625;
    EXPECT_LT((v - expected).norm(), 1e-16);
    EXPECT_THROW(basis_total_degree(2, 2).evaluate(Vector::Zero(3)), DimensionError);
}

TEST(Basis, Validation)
{
    EXPECT_THROW(SchedulingBasis(1, {{1}, {0}}), ConfigError);        // constant not first
    EXPECT_THROW(SchedulingBasis(1, {{0}, {1}, {1}}), ConfigError);   // duplicate
    EXPECT_THROW(SchedulingBasis(1, {{0}, {-1}}), ConfigError);       // negative exponent
    EXPECT_THROW(SchedulingBasis(2, {{0, 0}, {1}}), ConfigError);     // ragged tuple
    EXPECT_THROW(basis_by_name("cubic", 1, 3), ConfigError);
    EXPECT_EQ(basis_by_name("exact", 1, 0), basis_exact_1p());
    EXPECT_EQ(basis_by_name("total-degree", 2, 5).size(), 21);
}

TEST(Basis, JsonRoundTrip)
{
    const SchedulingBasis b = basis_total_degree(2, 3);
    const SchedulingBasis back = SchedulingBasis::from_json(b.to_json());
    EXPECT_EQ(back, b);
    EXPECT_EQ(back.name(), b.name());
}

TEST(Features, ColumnsAreKroneckerProducts)
{
    Gen g(17);
    SnapshotDataset d;
    const Index n = 30;
    d.x = g.matrix(4, n);
    d.y = g.matrix(4, n);
    d.u = g.matrix(2, n);
    d.p = g.matrix(2, n, 0.0, 1.0);
    const SchedulingBasis bx = basis_total_degree(2, 2);
    const SchedulingBasis bu = basis_total_degree(2, 1);
    const FeatureMatrices f = assemble_features(d, bx, bu);
    EXPECT_EQ(f.x_p.rows(), bx.size() * 4);
    EXPECT_EQ(f.u_p.rows(), bu.size() * 2);
    EXPECT_EQ(f.p_x.rows(), bx.size());
    EXPECT_EQ(f.p_u.rows(), bu.size());
    for (Index k = 0; k < n; ++k) {
        EXPECT_EQ(f.p_x.col(k), bx.evaluate(d.p.col(k)));
        EXPECT_EQ(f.x_p.col(k), kron_vec(f.p_x.col(k), d.x.col(k)));
        EXPECT_EQ(f.u_p.col(k), kron_vec(f.p_u.col(k), d.u.col(k)));
    }

    // The streaming block writer agrees with the full assembly on any window.
    const Index rows = f.x_p.rows() + f.u_p.rows();
    Matrix block(rows, 7);
    stacked_feature_block(d.x, d.u, d.p, bx, bu, 11, 7, block);
    EXPECT_EQ(block.topRows(f.x_p.rows()), f.x_p.middleCols(11, 7));
    EXPECT_EQ(block.bottomRows(f.u_p.rows()), f.u_p.middleCols(11, 7));
}

TEST(Features, BlockLayoutMixedProduct)
{
    // W (phi (x) z) = sum_i phi_i W_i z for W = (W_0 W_1 ...).
    Gen g(23);
    const SchedulingBasis b = basis_exact_1p();
    const Index nz = 5;
    const Matrix w = g.matrix(3, b.size() * nz);
    for (int t = 0; t < 20; ++t) {
        const Vector phi = b.evaluate(g.vector(1, 0.0, 1.0));
        const Vector z = g.vector(nz);
        Vector sum = Vector::Zero(3);
        for (Index i = 0; i < b.size(); ++i) {
            sum += phi(i) * w.middleCols(i * nz, nz) * z;
        }
        EXPECT_LT((w * kron_vec(phi, z) - sum).norm(), 1e-12);
    }
}

} // namespace
} // namespace dmdlpv
