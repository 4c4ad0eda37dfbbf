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
#include "dmdlpv/excitation.hpp"

#include <fstream>
#include <random>

namespace dmdlpv {

void AprbsConfig::validate() const
{
    if (!(low < high)) {
        throw ConfigError("APRBS amplitude range needs low < high");
    }
    if (horizon < 1) {
        throw ConfigError("APRBS horizon must be positive");
    }
    if (hold_steps < 1 || hold_steps > horizon) {
        throw ConfigError("APRBS hold must lie in [1, horizon]");
    }
}

Vector aprbs(const AprbsConfig& config)
{
    config.validate();
    std::mt19937_64 gen(config.seed);
    Vector out(config.horizon);
    const double span = config.high - config.low;
    for (Index start = 0; start < config.horizon; start += config.hold_steps) {
        const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        const double level = config.low + span * unit;
        const Index len = std::min(config.hold_steps, config.horizon - start);
        out.segment(start, len).setConstant(level);
    }
    return out;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
    std::uint64_t z = master + (stream + 1) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

void SnapshotDataset::validate() const
{
    const Index n = x.cols();
    if (u.cols() != n || y.cols() != n || p.cols() != n) {
        throw DimensionError("dataset matrices have unequal column counts");
    }
    if (y.rows() != x.rows()) {
        throw DimensionError("dataset X and Y row counts differ");
    }
}

SnapshotDataset dataset_from_trajectory(const Trajectory& traj)
{
    const Index n = traj.samples();
    SnapshotDataset d;
    d.x = traj.states.leftCols(n);
    d.y = traj.states.rightCols(n);
    d.u = traj.inputs;
    d.p = traj.params;
    d.sample_time = traj.sample_time;
    return d;
}

nlohmann::json to_json(const AprbsConfig& config)
{
    return {{"low", config.low},
            {"high", config.high},
            {"hold_steps", config.hold_steps},
            {"horizon", config.horizon},
            {"seed", config.seed}};
}

SnapshotDataset build_global_dataset(const DiffusionPlant& plant, const AprbsConfig& u_config,
                                     const std::vector<AprbsConfig>& p_configs,
                                     const Vector& x0)
{
    if (static_cast<Index>(p_configs.size()) != plant.n_params()) {
        throw ConfigError("need one parameter excitation per plant parameter");
    }
    const Index n = u_config.horizon;
    Matrix u(1, n);
    u.row(0) = aprbs(u_config).transpose();
    Matrix p(plant.n_params(), n);
    nlohmann::json pj = nlohmann::json::array();
    for (std::size_t j = 0; j < p_configs.size(); ++j) {
        if (p_configs[j].horizon != n) {
            throw ConfigError("input and parameter excitations must share the horizon");
        }
        p.row(static_cast<Index>(j)) = aprbs(p_configs[j]).transpose();
        pj.push_back(to_json(p_configs[j]));
    }
    SnapshotDataset d = dataset_from_trajectory(simulate(plant, x0, u, p));
    d.provenance = {{"kind", "global"}, {"u_excitation", to_json(u_config)}, {"p_excitation", pj}};
    return d;
}

LocalDatasetBundle build_local_bundle(const DiffusionPlant& plant,
                                      const std::vector<Vector>& p_values,
                                      const AprbsConfig& u_config, Index horizon_per_system)
{
    if (p_values.empty()) {
        throw ConfigError("local bundle needs at least one frozen parameter value");
    }
    LocalDatasetBundle bundle;
    const Vector x0 = Vector::Zero(plant.n_states);
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        const Vector& theta = p_values[i];
        if (theta.size() != plant.n_params()) {
            throw DimensionError("frozen parameter value has wrong length");
        }
        AprbsConfig cfg = u_config;
        cfg.horizon = horizon_per_system;
        cfg.hold_steps = std::min(cfg.hold_steps, horizon_per_system);
        cfg.seed = derive_seed(u_config.seed, i);
        Matrix u(1, horizon_per_system);
        u.row(0) = aprbs(cfg).transpose();
        const Matrix p = theta.replicate(1, horizon_per_system);
        SnapshotDataset d;
        try {
            d = dataset_from_trajectory(simulate(plant, x0, u, p));
        } catch (const DivergenceError& e) {
            throw DivergenceError(std::string(e.what()) + " (frozen theta index " +
                                      std::to_string(i) + ")",
                                  e.step());
        }
        d.provenance = {{"kind", "local"}, {"u_excitation", to_json(cfg)}};
        bundle.thetas.push_back(theta);
        bundle.datasets.push_back(std::move(d));
    }
    return bundle;
}

std::vector<Vector> default_local_grid()
{
    std::vector<Vector> grid;
    for (int i = 0; i <= 10; ++i) {
        grid.push_back(Vector::Constant(1, static_cast<double>(i) / 10.0));
    }
    return grid;
}

Container to_container(const SnapshotDataset& data)
{
    data.validate();
    Container c;
    c.header = {{"format", "dmdlpv-dataset"},
                {"version", 1},
                {"n_states", data.n_states()},
                {"n_inputs", data.n_inputs()},
                {"n_params", data.n_params()},
                {"samples", data.size()},
                {"sample_time", data.sample_time},
                {"provenance", data.provenance}};
    c.add("X", data.x);
    c.add("U", data.u);
    c.add("Y", data.y);
    c.add("P", data.p);
    return c;
}

SnapshotDataset dataset_from_container(const Container& c)
{
    if (c.header.value("format", "") != "dmdlpv-dataset") {
        throw IoError("container is not a dataset");
    }
    SnapshotDataset d;
    d.x = c.matrix("X");
    d.u = c.matrix("U");
    d.y = c.matrix("Y");
    d.p = c.matrix("P");
    d.sample_time = c.header.at("sample_time").get<double>();
    d.provenance = c.header.value("provenance", nlohmann::json::object());
    d.validate();
    return d;
}

Container to_container(const LocalDatasetBundle& bundle)
{
    Container c;
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t i = 0; i < bundle.size(); ++i) {
        const auto& d = bundle.datasets[i];
        d.validate();
        std::vector<double> theta(bundle.thetas[i].data(),
                                  bundle.thetas[i].data() + bundle.thetas[i].size());
        members.push_back({{"theta", theta},
                           {"samples", d.size()},
                           {"sample_time", d.sample_time},
                           {"provenance", d.provenance}});
        const std::string tag = "_" + std::to_string(i);
        c.add("X" + tag, d.x);
        c.add("U" + tag, d.u);
        c.add("Y" + tag, d.y);
        c.add("P" + tag, d.p);
    }
    c.header = {{"format", "dmdlpv-local-bundle"}, {"version", 1}, {"members", members}};
    return c;
}

LocalDatasetBundle bundle_from_container(const Container& c)
{
    if (c.header.value("format", "") != "dmdlpv-local-bundle") {
        throw IoError("container is not a local dataset bundle");
    }
    LocalDatasetBundle bundle;
    const auto& members = c.header.at("members");
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto theta = members[i].at("theta").get<std::vector<double>>();
        bundle.thetas.push_back(
            Eigen::Map<const Vector>(theta.data(), static_cast<Index>(theta.size())));
        const std::string tag = "_" + std::to_string(i);
        SnapshotDataset d;
        d.x = c.matrix("X" + tag);
        d.u = c.matrix("U" + tag);
        d.y = c.matrix("Y" + tag);
        d.p = c.matrix("P" + tag);
        d.sample_time = members[i].at("sample_time").get<double>();
        d.provenance = members[i].value("provenance", nlohmann::json::object());
        d.validate();
        bundle.datasets.push_back(std::move(d));
    }
    return bundle;
}

void write_dataset_csv(const std::string& path, const SnapshotDataset& data)
{
    data.validate();
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << "k";
    for (Index j = 0; j < data.n_inputs(); ++j) {
        out << ",u" << (j + 1);
    }
    for (Index j = 0; j < data.n_params(); ++j) {
        out << ",p" << (j + 1);
    }
    for (Index i = 0; i < data.n_states(); ++i) {
        out << ",x_" << (i + 1);
    }
    for (Index i = 0; i < data.n_states(); ++i) {
        out << ",y_" << (i + 1);
    }
    out << '\n';
    for (Index k = 0; k < data.size(); ++k) {
        out << k;
        for (Index j = 0; j < data.n_inputs(); ++j) {
            out << ',' << format_double(data.u(j, k));
        }
        for (Index j = 0; j < data.n_params(); ++j) {
            out << ',' << format_double(data.p(j, k));
        }
        for (Index i = 0; i < data.n_states(); ++i) {
            out << ',' << format_double(data.x(i, k));
        }
        for (Index i = 0; i < data.n_states(); ++i) {
            out << ',' << format_double(data.y(i, k));
        }
        out << '\n';
    }
}

} // namespace dmdlpv
