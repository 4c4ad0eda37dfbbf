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
#ifndef DMDLPV_EVALUATION_HPP
#define DMDLPV_EVALUATION_HPP

#include "dmdlpv/lpv_local.hpp"

#include <string>
#include <variant>
#include <vector>

namespace dmdlpv {

/// The plant's own sample map wrapped as a model (reference runs).
struct ExactPlantModel {
    DiffusionPlant plant;
};

using Model = std::variant<ReducedLti, ReducedLpvModel, FullLpvModel, ExactPlantModel>;

std::string model_kind(const Model& model);

struct ProbeSeries {
    Index state_index = -1;
    double position = 0.0;
    Vector time;
    Vector truth;
    Vector model;
};

struct EvalReport {
    double mse = 0.0;
    Vector per_state_mse;
    Index samples = 0;  ///< columns that entered the average
    bool diverged = false;
    Index diverged_step = -1;
    ProbeSeries probe;
    nlohmann::json config = nlohmann::json::object();
};

/// Squared-error statistics of prediction against truth (same shape).
/// mse = mean(per_state_mse) = sum of squares / (n_s * N).
EvalReport compare_states(const Eigen::Ref<const Matrix>& truth,
                          const Eigen::Ref<const Matrix>& prediction);

/// Teacher-forced one-step prediction over every dataset column. Reduced
/// models project x[k], advance once, lift, and compare with y[k] in full space.
EvalReport one_step_mse(const Model& model, const SnapshotDataset& data);

struct TestSignals {
    Vector x0;
    Matrix u;  ///< n_u x N
    Matrix p;  ///< n_p x N
};

TestSignals make_test_signals(const DiffusionPlant& plant, const AprbsConfig& u_config,
                              const std::vector<AprbsConfig>& p_configs);

/// Free-run from x0 only. The truth comes from simulating the plant. If the
/// model diverges at step s the MSE covers steps 1..s-1 and the flag is set.
EvalReport free_run(const Model& model, const DiffusionPlant& plant, const TestSignals& signals,
                    double probe_x = 0.98);

/// States x[0..N] predicted by a model in free run; sets diverged/step.
struct FreeRunPrediction {
    Matrix states;
    bool diverged = false;
    Index diverged_step = -1;
};
FreeRunPrediction simulate_model(const Model& model, const TestSignals& signals);

/// Model container: header {"format": "dmdlpv-model", "kind", bases, ranks,
/// state_scale}; matrices A_tilde/B_tilde/W_yr, WA_tilde/WB_tilde/W_yr or WA/WB.
Container to_container(const Model& model);
Model model_from_container(const Container& c);

void write_probe_csv(const std::string& path, const ProbeSeries& probe);
nlohmann::json to_json(const EvalReport& report);

// ---------------------------------------------------------------------------
// Rank sweeps

enum class ModelKind { Dmdc, Global, FullLeastSquares, LocalFull, LocalLatent };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct SweepSpec {
    ModelKind kind = ModelKind::Global;
    SchedulingBasis basis_x = basis_exact_1p();
    SchedulingBasis basis_u = basis_exact_1p();
    /// 0 = full effective rank. Local kinds read the shared rank from here.
    std::vector<Index> procrustes_ranks{0};
    std::vector<Index> pod_ranks{0};
    double regularization = 0.0;
    const SnapshotDataset* train = nullptr;       ///< global / dmdc / full-ls
    const LocalDatasetBundle* bundle = nullptr;   ///< local kinds
    const SnapshotDataset* eval = nullptr;        ///< defaults to train
    unsigned threads = 1;
};

struct SweepRow {
    Index requested_pr = 0;   ///< axis value as requested (0 = full)
    Index requested_pod = 0;
    Index rank_pr = 0;        ///< ranks actually used after clamping
    Index rank_pod = 0;
    std::string basis;
    double mse = 0.0;
    bool diverged = false;
    std::string error;   ///< non-empty if the fit failed (mse is NaN)
};

struct SweepResult {
    ModelKind kind = ModelKind::Global;
    std::string basis;
    std::string axis;  ///< "procrustes" | "pod" | "rank" | "point"
    std::vector<SweepRow> rows;
    nlohmann::json config = nlohmann::json::object();

    bool operator==(const SweepResult& other) const;
};

/// One fit + one-step evaluation per rank point, rows in axis order. The axis
/// is whichever rank list has more than one entry; it must be strictly
/// increasing with 0 (full) ordered last.
SweepResult run_rank_sweep(const SweepSpec& spec);

/// Header "# config=<json>" then rank_pr,rank_pod,basis,mse,diverged with the
/// effective ranks. The requested axis lives in the config line and is restored
/// by the reader.
void write_sweep_csv(const std::string& path, const SweepResult& result);
std::string sweep_csv_string(const SweepResult& result);
SweepResult read_sweep_csv(const std::string& path);
SweepResult parse_sweep_csv(const std::string& text);

} // namespace dmdlpv

#endif // DMDLPV_EVALUATION_HPP
