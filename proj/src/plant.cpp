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
#include "dmdlpv/plant.hpp"

#include "dmdlpv/container.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace dmdlpv {

std::string to_string(GainKind kind)
{
    switch (kind) {
    case GainKind::Polynomial1p:
        return "polynomial-1p";
    case GainKind::Rational2p:
        return "rational-2p";
    case GainKind::Custom:
        return "custom";
    }
    return "custom";
}

GainKind gain_kind_from_string(const std::string& name)
{
    if (name == "polynomial-1p") {
        return GainKind::Polynomial1p;
    }
    if (name == "rational-2p") {
        return GainKind::Rational2p;
    }
    if (name == "custom") {
        return GainKind::Custom;
    }
    throw ConfigError("unknown gain kind '" + name + "'");
}

GainFunction GainFunction::polynomial(std::vector<double> coefficients)
{
    if (coefficients.empty()) {
        throw ConfigError("polynomial gain needs at least one coefficient");
    }
    GainFunction g;
    g.kind = GainKind::Polynomial1p;
    g.coefficients = std::move(coefficients);
    g.n_params = 1;
    return g;
}

GainFunction GainFunction::rational()
{
    GainFunction g;
    g.kind = GainKind::Rational2p;
    g.coefficients.clear();
    g.n_params = 2;
    return g;
}

GainFunction GainFunction::from_callable(Index n_params, std::function<double(const Vector&)> fn)
{
    GainFunction g;
    g.kind = GainKind::Custom;
    g.coefficients.clear();
    g.n_params = n_params;
    g.custom = std::move(fn);
    return g;
}

double eval_gain(const GainFunction& gain, const Vector& theta)
{
    if (theta.size() != gain.n_params) {
        throw DimensionError("gain expects " + std::to_string(gain.n_params) +
                             " parameters, got " + std::to_string(theta.size()));
    }
    for (Index i = 0; i < theta.size(); ++i) {
        if (!(theta(i) >= 0.0 && theta(i) <= 1.0)) {
            const std::string msg = "parameter " + std::to_string(i) + " = " +
                                    format_double(theta(i)) + " outside [0, 1]";
            if (!gain.warn_only_domain) {
                throw DomainError(msg);
            }
            spdlog::warn("{}", msg);
        }
    }
    switch (gain.kind) {
    case GainKind::Polynomial1p: {
        // Horner
        double k = 0.0;
        for (auto it = gain.coefficients.rbegin(); it != gain.coefficients.rend(); ++it) {
            k = k * theta(0) + *it;
        }
        return k;
    }
    case GainKind::Rational2p: {
        const double p1 = theta(0);
        const double p2 = theta(1);
        const double den = p1 + p2 + 1.0;
        return p1 * p2 / (den * den);
    }
    case GainKind::Custom:
        if (!gain.custom) {
            throw ConfigError("custom gain has no callable");
        }
        return gain.custom(theta);
    }
    return 0.0;
}

Tridiagonal Tridiagonal::from_dense(const Matrix& m)
{
    const Index n = m.rows();
    Tridiagonal t;
    t.main = m.diagonal();
    t.lower = n > 1 ? Vector(m.diagonal(-1)) : Vector();
    t.upper = n > 1 ? Vector(m.diagonal(1)) : Vector();
    return t;
}

void Tridiagonal::apply(const Vector& x, Vector& y) const
{
    const Index n = main.size();
    y.resize(n);
    if (n == 1) {
        y(0) = main(0) * x(0);
        return;
    }
    y(0) = main(0) * x(0) + upper(0) * x(1);
    for (Index i = 1; i < n - 1; ++i) {
        y(i) = lower(i - 1) * x(i - 1) + main(i) * x(i) + upper(i) * x(i + 1);
    }
    y(n - 1) = lower(n - 2) * x(n - 2) + main(n - 1) * x(n - 1);
}

Matrix DiffusionPlant::a0() const
{
    return -(advection_w / (2.0 * h)) * d1;
}

Vector DiffusionPlant::b0() const
{
    return (advection_w / (2.0 * h)) * b_template;
}

Matrix DiffusionPlant::state_matrix(const Vector& theta) const
{
    const double k = eval_gain(gain, theta);
    return a0() + (k / (h * h)) * d2;
}

Vector DiffusionPlant::input_vector(const Vector& theta) const
{
    const double k = eval_gain(gain, theta);
    return b0() + (k / (h * h)) * b_template;
}

Vector DiffusionPlant::grid() const
{
    Vector x(n_states);
    for (Index i = 0; i < n_states; ++i) {
        x(i) = static_cast<double>(i + 1) * h;
    }
    return x;
}

Index DiffusionPlant::probe_index(double x) const
{
    const auto nearest = static_cast<Index>(std::llround(x / h)) - 1;
    return std::clamp<Index>(nearest, 0, n_states - 1);
}

DiffusionPlant build_plant(double h, double advection_w, GainFunction gain, double dt,
                           double sample_time)
{
    if (!(h > 0.0 && h < 1.0)) {
        throw ConfigError("grid spacing h must lie in (0, 1)");
    }
    if (!(dt > 0.0) || !(sample_time > 0.0) || dt > sample_time * (1.0 + 1e-12)) {
        throw ConfigError("need 0 < dt <= sample_time");
    }
    const double ratio = sample_time / dt;
    const auto substeps = static_cast<Index>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(substeps)) > 1e-9 * ratio) {
        throw ConfigError("dt must divide the sample time");
    }
    // N = ceil(1/h) - 1; the tolerance keeps 1/0.02 from rounding up to 51.
    const auto n = static_cast<Index>(std::ceil(1.0 / h - 1e-9)) - 1;
    if (n < 2) {
        throw ConfigError("h = " + format_double(h) + " yields fewer than 2 states");
    }

    DiffusionPlant p;
    p.h = h;
    p.advection_w = advection_w;
    p.gain = std::move(gain);
    p.dt = dt;
    p.sample_time = sample_time;
    p.n_states = n;
    p.substeps = substeps;

    p.d1 = Matrix::Zero(n, n);
    p.d2 = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        if (i > 0) {
            p.d1(i, i - 1) = -1.0;
            p.d2(i, i - 1) = 1.0;
        }
        if (i + 1 < n) {
            p.d1(i, i + 1) = 1.0;
            p.d2(i, i + 1) = 1.0;
        }
        p.d2(i, i) = -2.0;
    }
    // Neumann closure T_{N+1} = T_N
    p.d1(n - 1, n - 1) = 1.0;
    p.d2(n - 1, n - 1) = -1.0;

    p.b_template = Vector::Zero(n);
    p.b_template(0) = 1.0;
    p.d1_bands = Tridiagonal::from_dense(p.d1);
    p.d2_bands = Tridiagonal::from_dense(p.d2);
    return p;
}

namespace {

// Frozen-parameter operator: A = c1 D1 + c2 D2, b = (-c1 + c2) e_1.
struct FrozenOperator {
    Tridiagonal a;
    double b0 = 0.0;

    FrozenOperator(const DiffusionPlant& plant, const Vector& theta)
    {
        const double k = eval_gain(plant.gain, theta);
        const double c1 = -plant.advection_w / (2.0 * plant.h);
        const double c2 = k / (plant.h * plant.h);
        a.lower = c1 * plant.d1_bands.lower + c2 * plant.d2_bands.lower;
        a.main = c1 * plant.d1_bands.main + c2 * plant.d2_bands.main;
        a.upper = c1 * plant.d1_bands.upper + c2 * plant.d2_bands.upper;
        b0 = -c1 + c2;
    }

    void eval(const Vector& x, double u, Vector& dx) const
    {
        a.apply(x, dx);
        dx(0) += b0 * u;
    }
};

struct Rk4Workspace {
    Vector k1, k2, k3, k4, tmp;
};

void advance(const FrozenOperator& op, const DiffusionPlant& plant, Vector& x, double u,
             Rk4Workspace& ws)
{
    const double dt = plant.dt;
    for (Index s = 0; s < plant.substeps; ++s) {
        op.eval(x, u, ws.k1);
        ws.tmp = x + (0.5 * dt) * ws.k1;
        op.eval(ws.tmp, u, ws.k2);
        ws.tmp = x + (0.5 * dt) * ws.k2;
        op.eval(ws.tmp, u, ws.k3);
        ws.tmp = x + dt * ws.k3;
        op.eval(ws.tmp, u, ws.k4);
        x += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
    }
}

} // namespace

Vector rhs(const DiffusionPlant& plant, const Vector& state, double u, const Vector& theta)
{
    if (state.size() != plant.n_states) {
        throw DimensionError("rhs: state has " + std::to_string(state.size()) +
                             " entries, plant has " + std::to_string(plant.n_states));
    }
    FrozenOperator op(plant, theta);
    Vector dx;
    op.eval(state, u, dx);
    return dx;
}

Vector step(const DiffusionPlant& plant, const Vector& state, double u, const Vector& theta)
{
    if (state.size() != plant.n_states) {
        throw DimensionError("step: state dimension mismatch");
    }
    FrozenOperator op(plant, theta);
    Rk4Workspace ws;
    Vector x = state;
    advance(op, plant, x, u, ws);
    return x;
}

Trajectory simulate(const DiffusionPlant& plant, const Vector& x0, const Matrix& u_traj,
                    const Matrix& p_traj)
{
    if (x0.size() != plant.n_states) {
        throw DimensionError("simulate: initial state dimension mismatch");
    }
    if (u_traj.rows() != 1) {
        throw DimensionError("simulate: the plant has a single input");
    }
    if (p_traj.rows() != plant.n_params() || p_traj.cols() != u_traj.cols()) {
        throw DimensionError("simulate: parameter trajectory must be n_p x N");
    }
    const Index n = u_traj.cols();
    Trajectory traj;
    traj.sample_time = plant.sample_time;
    traj.inputs = u_traj;
    traj.params = p_traj;
    traj.states.resize(plant.n_states, n + 1);
    traj.states.col(0) = x0;

    Vector x = x0;
    Rk4Workspace ws;
    Vector theta;
    std::optional<FrozenOperator> op;
    for (Index k = 0; k < n; ++k) {
        if (!op || k == 0 || p_traj.col(k) != p_traj.col(k - 1)) {
            theta = p_traj.col(k);
            op.emplace(plant, theta);
        }
        advance(*op, plant, x, u_traj(0, k), ws);
        if (!x.allFinite()) {
            throw DivergenceError("simulation diverged at sample " + std::to_string(k + 1),
                                  k + 1);
        }
        traj.states.col(k + 1) = x;
    }
    return traj;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    const Index np = traj.params.rows();
    const Index ns = traj.states.rows();
    out << "t,u";
    for (Index j = 0; j < np; ++j) {
        out << ",p" << (j + 1);
    }
    for (Index i = 0; i < ns; ++i) {
        out << ",T_" << (i + 1);
    }
    out << '\n';
    const Index n = traj.samples();
    for (Index k = 0; k <= n; ++k) {
        out << format_double(static_cast<double>(k) * traj.sample_time);
        out << ',' << (k < n ? format_double(traj.inputs(0, k)) : std::string("nan"));
        for (Index j = 0; j < np; ++j) {
            out << ',' << (k < n ? format_double(traj.params(j, k)) : std::string("nan"));
        }
        for (Index i = 0; i < ns; ++i) {
            out << ',' << format_double(traj.states(i, k));
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
}

Trajectory read_trajectory_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("'" + path + "' is empty");
    }
    const auto head = split_csv_line(line);
    Index np = 0;
    Index ns = 0;
    for (const auto& col : head) {
        if (col.size() > 1 && col[0] == 'p' && std::isdigit(static_cast<unsigned char>(col[1]))) {
            ++np;
        } else if (col.rfind("T_", 0) == 0) {
            ++ns;
        }
    }
    if (head.size() < 2 || head[0] != "t" || head[1] != "u" ||
        static_cast<Index>(head.size()) != 2 + np + ns) {
        throw IoError("'" + path + "': unexpected trajectory header");
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != head.size()) {
            throw IoError("'" + path + "': ragged row");
        }
        std::vector<double> vals;
        vals.reserve(fields.size());
        for (const auto& f : fields) {
            vals.push_back(f == "nan" ? std::nan("") : parse_double(f));
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) {
        throw IoError("'" + path + "': no samples");
    }
    const auto n = static_cast<Index>(rows.size()) - 1;
    Trajectory traj;
    traj.states.resize(ns, n + 1);
    traj.inputs.resize(1, n);
    traj.params.resize(np, n);
    traj.sample_time = n > 0 ? rows[1][0] - rows[0][0] : 0.0;
    for (Index k = 0; k <= n; ++k) {
        const auto& r = rows[static_cast<std::size_t>(k)];
        if (k < n) {
            traj.inputs(0, k) = r[1];
            for (Index j = 0; j < np; ++j) {
                traj.params(j, k) = r[static_cast<std::size_t>(2 + j)];
            }
        }
        for (Index i = 0; i < ns; ++i) {
            traj.states(i, k) = r[static_cast<std::size_t>(2 + np + i)];
        }
    }
    return traj;
}

} // namespace dmdlpv
