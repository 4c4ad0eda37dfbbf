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
#ifndef DMDLPV_TESTS_GENERATORS_HPP
#define DMDLPV_TESTS_GENERATORS_HPP

// Hand-rolled random generators for the property tests. Each test seeds its
// own engine so failures reproduce from the printed seed.

#include "dmdlpv/common.hpp"

#include <Eigen/QR>

#include <cstdint>
#include <random>

namespace dmdlpv::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo = -1.0, double hi = 1.0)
    {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    Index integer(Index lo, Index hi)
    {
        return std::uniform_int_distribution<Index>(lo, hi)(engine_);
    }

    Matrix matrix(Index rows, Index cols, double lo = -1.0, double hi = 1.0)
    {
        Matrix m(rows, cols);
        for (Index j = 0; j < cols; ++j) {
            for (Index i = 0; i < rows; ++i) {
                m(i, j) = uniform(lo, hi);
            }
        }
        return m;
    }

    Vector vector(Index n, double lo = -1.0, double hi = 1.0) { return matrix(n, 1, lo, hi); }

    /// n x k with orthonormal columns.
    Matrix orthonormal(Index n, Index k)
    {
        Eigen::HouseholderQR<Matrix> qr(matrix(n, k));
        return qr.householderQ() * Matrix::Identity(n, k);
    }

    /// rows x cols matrix whose nonzero singular values are exactly `sigma`.
    Matrix with_singular_values(Index rows, Index cols, const Vector& sigma)
    {
        const Index k = sigma.size();
        return orthonormal(rows, k) * sigma.asDiagonal() * orthonormal(cols, k).transpose();
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

inline double rel_fro(const Matrix& a, const Matrix& b)
{
    const double denom = std::max(a.norm(), b.norm());
    return denom == 0.0 ? 0.0 : (a - b).norm() / denom;
}

} // namespace dmdlpv::testing

#endif // DMDLPV_TESTS_GENERATORS_HPP
