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
#ifndef DMDLPV_CONFIG_HPP
#define DMDLPV_CONFIG_HPP

#include "dmdlpv/evaluation.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dmdlpv {

/// One APRBS channel; the horizon comes from the enclosing section.
struct SignalSpec {
    double low = 0.0;
    double high = 1.0;
    Index hold = 1;
    std::uint64_t seed = 0;

    AprbsConfig aprbs(Index horizon) const { return {low, high, hold, horizon, seed}; }
};

struct PlantSection {
    double h = 0.02;
    double advection_w = 0.1;
    std::string gain = "polynomial-1p";
    std::vector<double> coefficients{0.1, 0.05, 0.01, 0.03};
    double dt = 1e-3;
    double sample_time = 1e-3;

    DiffusionPlant build() const;
    Index n_params() const;
};

struct LocalSection {
    std::vector<std::vector<double>> grid;  ///< empty = default 1-parameter grid
    Index horizon = 12000;
    SignalSpec input{0.0, 4.0, 1000, 303};

    std::vector<Vector> thetas() const;
};

struct ExcitationSection {
    Index horizon = 90000;
    SignalSpec input{0.0, 4.0, 10000, 101};
    std::vector<SignalSpec> params{{0.0, 1.0, 10000, 202}};
    LocalSection local;

    std::vector<AprbsConfig> param_configs(Index horizon_override = -1) const;
};

struct BasisSection {
    std::string kind = "exact";  ///< exact | under | over | constant | total-degree
    int degree = 3;              ///< total-degree only

    SchedulingBasis build(Index n_params) const;
};

struct FitSection {
    std::string kind = "global";  ///< dmdc | global | full-ls | local-full | local-latent
    Index procrustes_rank = 50;
    Index pod_rank = 10;
    double regularization = 0.0;

    TruncationConfig truncation() const { return {procrustes_rank, pod_rank, regularization}; }
};

struct EvalSection {
    double probe_x = 0.98;
    Index test_horizon = 40000;
    SignalSpec test_input{0.0, 4.0, 10000, 404};
    std::vector<SignalSpec> test_params{{0.0, 1.0, 10000, 505}};
};

/// Resolved experiment description. Every output echoes to_json() of the
/// config that produced it.
struct ExperimentConfig {
    PlantSection plant;
    ExcitationSection excitation;
    BasisSection basis;
    FitSection fit;
    EvalSection eval;

    /// Defaults: the 49-state polynomial-gain setup.
    static ExperimentConfig experiment1();
    /// 99-state rational-gain setup with the given training horizon.
    static ExperimentConfig experiment2(Index horizon = 240000);

    void validate() const;
    nlohmann::json to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static ExperimentConfig from_json(const nlohmann::json& j);
};

ExperimentConfig load_config(const std::string& path);

/// Global training dataset and held-out test signals for a config.
SnapshotDataset make_training_data(const ExperimentConfig& config);
LocalDatasetBundle make_local_bundle(const ExperimentConfig& config);
TestSignals make_eval_signals(const ExperimentConfig& config);
/// Snapshot dataset driven by the eval signals (held-out one-step data).
SnapshotDataset make_eval_dataset(const ExperimentConfig& config);

} // namespace dmdlpv

#endif // DMDLPV_CONFIG_HPP
