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
#ifndef DMDLPV_EXCITATION_HPP
#define DMDLPV_EXCITATION_HPP

#include "dmdlpv/container.hpp"
#include "dmdlpv/plant.hpp"

#include <cstdint>
#include <vector>

namespace dmdlpv {

/// Amplitude-modulated pseudo-random stair signal.
///
/// Levels are uniform on [low, high) drawn from std::mt19937_64(seed) as
/// low + (high - low) * ((g() >> 11) * 2^-53), one draw per segment. Every
/// segment lasts hold_steps samples except a possibly shorter final one.
struct AprbsConfig {
    double low = 0.0;
    double high = 1.0;
    Index hold_steps = 1;
    Index horizon = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

Vector aprbs(const AprbsConfig& config);

/// SplitMix64 finalizer over master + (stream + 1) * golden-ratio increment.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Time-aligned snapshot matrices. Column k holds x[k], u[k], theta[k] and the
/// successor y[k] = x[k+1].
struct SnapshotDataset {
    Matrix x;  ///< n_s x N
    Matrix u;  ///< n_u x N
    Matrix y;  ///< n_s x N
    Matrix p;  ///< n_p x N
    double sample_time = 0.0;
    nlohmann::json provenance = nlohmann::json::object();

    Index size() const noexcept { return x.cols(); }
    Index n_states() const noexcept { return x.rows(); }
    Index n_inputs() const noexcept { return u.rows(); }
    Index n_params() const noexcept { return p.rows(); }

    void validate() const;
};

/// Shifts a trajectory by one sample: X = states[:, 0:N], Y = states[:, 1:N+1].
SnapshotDataset dataset_from_trajectory(const Trajectory& traj);

/// Simulates the plant under joint APRBS excitation of the input and of each
/// parameter (one config per parameter) starting from x0.
SnapshotDataset build_global_dataset(const DiffusionPlant& plant, const AprbsConfig& u_config,
                                     const std::vector<AprbsConfig>& p_configs,
                                     const Vector& x0);

/// One frozen-parameter dataset per entry of thetas.
struct LocalDatasetBundle {
    std::vector<Vector> thetas;
    std::vector<SnapshotDataset> datasets;

    std::size_t size() const noexcept { return datasets.size(); }
};

/// Dataset i is driven by aprbs({u_config with horizon_per_system and seed
/// derive_seed(u_config.seed, i)}) from x0 = 0 with theta_i held.
LocalDatasetBundle build_local_bundle(const DiffusionPlant& plant,
                                      const std::vector<Vector>& p_values,
                                      const AprbsConfig& u_config, Index horizon_per_system);

/// Default frozen grid {0, 0.1, ..., 1.0}.
std::vector<Vector> default_local_grid();

Container to_container(const SnapshotDataset& data);
SnapshotDataset dataset_from_container(const Container& c);
Container to_container(const LocalDatasetBundle& bundle);
LocalDatasetBundle bundle_from_container(const Container& c);

/// CSV export: k, u1.., p1.., x_1..x_n, y_1..y_n.
void write_dataset_csv(const std::string& path, const SnapshotDataset& data);

nlohmann::json to_json(const AprbsConfig& config);

} // namespace dmdlpv

#endif // DMDLPV_EXCITATION_HPP
