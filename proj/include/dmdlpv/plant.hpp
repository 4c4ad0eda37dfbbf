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
#ifndef DMDLPV_PLANT_HPP
#define DMDLPV_PLANT_HPP

#include "dmdlpv/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dmdlpv {

enum class GainKind { Polynomial1p, Rational2p, Custom };

std::string to_string(GainKind kind);
GainKind gain_kind_from_string(const std::string& name);

/// Diffusion gain k(theta).
///
/// polynomial-1p: k(p) = c0 + c1 p + c2 p^2 + ...   (default 0.1, 0.05, 0.01, 0.03)
/// rational-2p:   k(p1, p2) = p1 p2 / (p1 + p2 + 1)^2
struct GainFunction {
    GainKind kind = GainKind::Polynomial1p;
    std::vector<double> coefficients{0.1, 0.05, 0.01, 0.03};
    Index n_params = 1;
    std::function<double(const Vector&)> custom;
    /// Parameters outside [0, 1] log a warning instead of throwing.
    bool warn_only_domain = false;

    static GainFunction polynomial(std::vector<double> coefficients = {0.1, 0.05, 0.01, 0.03});
    static GainFunction rational();
    static GainFunction from_callable(Index n_params, std::function<double(const Vector&)> fn);
};

/// Evaluates k(theta); theta must lie in [0, 1] per coordinate.
double eval_gain(const GainFunction& gain, const Vector& theta);

/// Tridiagonal operator stored by diagonals.
struct Tridiagonal {
    Vector lower;  // n-1, entry i is row i+1, column i
    Vector main;   // n
    Vector upper;  // n-1, entry i is row i, column i+1

    static Tridiagonal from_dense(const Matrix& m);
    void apply(const Vector& x, Vector& y) const;
};

/// Finite-difference discretization of
///   dT/dt = k(theta) T_xx - w T_x  on (0, 1),  T(0) = u,  T_x(1) = 0,
/// on the interior nodes x_i = i h, i = 1..n.
struct DiffusionPlant {
    double h = 0.02;
    double advection_w = 0.1;
    GainFunction gain;
    double dt = 1e-3;
    double sample_time = 1e-3;
    Index n_states = 0;
    Index substeps = 1;

    Matrix d1;          ///< central first difference, Neumann closure in the last row
    Matrix d2;          ///< (1, -2, 1) stencil, last row (..., 1, -1)
    Vector b_template;  ///< e_1

    Index n_params() const noexcept { return gain.n_params; }

    /// A0 = -(w / 2h) D1
    Matrix a0() const;
    /// B0 = (w / 2h) e_1
    Vector b0() const;
    /// A0 + A(theta) with A(theta) = (k / h^2) D2.
    Matrix state_matrix(const Vector& theta) const;
    /// B0 + B(theta) with B(theta) = (k / h^2) e_1.
    Vector input_vector(const Vector& theta) const;

    /// Node coordinates x_i = i h.
    Vector grid() const;
    /// Node index nearest to physical coordinate x.
    Index probe_index(double x) const;

    Tridiagonal d1_bands;
    Tridiagonal d2_bands;
};

DiffusionPlant build_plant(double h, double advection_w, GainFunction gain, double dt,
                           double sample_time);

/// Continuous-time right-hand side (A0 + A(theta)) T + (B0 + B(theta)) u.
Vector rhs(const DiffusionPlant& plant, const Vector& state, double u, const Vector& theta);

/// One sample transition: plant.substeps RK4 steps of size dt with (u, theta) held.
Vector step(const DiffusionPlant& plant, const Vector& state, double u, const Vector& theta);

struct Trajectory {
    Matrix states;  ///< n_states x (N + 1)
    Matrix inputs;  ///< 1 x N
    Matrix params;  ///< n_p x N
    double sample_time = 0.0;

    Index samples() const noexcept { return inputs.cols(); }
};

/// Zero-order-hold simulation. Column k of u_traj / p_traj is applied over
/// [k T_s, (k+1) T_s). Throws DivergenceError on the first non-finite sample.
Trajectory simulate(const DiffusionPlant& plant, const Vector& x0, const Matrix& u_traj,
                    const Matrix& p_traj);

/// CSV with header t,u,p1..,T_1..T_n and one row per recorded state. The last
/// row has no applied input, so its u and p fields are "nan".
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

} // namespace dmdlpv

#endif // DMDLPV_PLANT_HPP
