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
#include "dmdlpv/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace dmdlpv {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where)
{
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

json signal_json(const SignalSpec& s)
{
    return {{"low", s.low}, {"high", s.high}, {"hold", s.hold}, {"seed", s.seed}};
}

SignalSpec signal_from(const json& j, SignalSpec s, const std::string& where)
{
    check_keys(j, {"low", "high", "hold", "seed"}, where);
    read(j, "low", s.low, where);
    read(j, "high", s.high, where);
    read(j, "hold", s.hold, where);
    read(j, "seed", s.seed, where);
    return s;
}

std::vector<SignalSpec> signals_from(const json& j, const std::vector<SignalSpec>& defaults,
                                     const std::string& where)
{
    if (!j.is_array()) {
        throw ConfigError(where + ": expected an array");
    }
    std::vector<SignalSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const SignalSpec base = i < defaults.size() ? defaults[i] : SignalSpec{};
        out.push_back(signal_from(j[i], base, where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

json signals_json(const std::vector<SignalSpec>& v)
{
    json a = json::array();
    for (const auto& s : v) {
        a.push_back(signal_json(s));
    }
    return a;
}

void validate_signal(const SignalSpec& s, Index horizon, const std::string& where)
{
    try {
        s.aprbs(horizon).validate();
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

} // namespace

DiffusionPlant PlantSection::build() const
{
    GainFunction g;
    switch (gain_kind_from_string(gain)) {
    case GainKind::Polynomial1p: g = GainFunction::polynomial(coefficients); break;
    case GainKind::Rational2p: g = GainFunction::rational(); break;
    default: throw ConfigError("plant.gain: custom gains cannot be configured from a file");
    }
    return build_plant(h, advection_w, std::move(g), dt, sample_time);
}

Index PlantSection::n_params() const
{
    return gain_kind_from_string(gain) == GainKind::Rational2p ? 2 : 1;
}

std::vector<Vector> LocalSection::thetas() const
{
    if (grid.empty()) {
        return default_local_grid();
    }
    std::vector<Vector> out;
    for (const auto& g : grid) {
        out.push_back(Eigen::Map<const Vector>(g.data(), static_cast<Index>(g.size())));
    }
    return out;
}

std::vector<AprbsConfig> ExcitationSection::param_configs(Index horizon_override) const
{
    std::vector<AprbsConfig> out;
    for (const auto& p : params) {
        out.push_back(p.aprbs(horizon_override > 0 ? horizon_override : horizon));
    }
    return out;
}

SchedulingBasis BasisSection::build(Index n_params) const
{
    return basis_by_name(kind, n_params, degree);
}

ExperimentConfig ExperimentConfig::experiment1()
{
    return {};
}

ExperimentConfig ExperimentConfig::experiment2(Index horizon)
{
    ExperimentConfig c;
    c.plant = {0.01, 0.1, "rational-2p", {}, 5e-4, 0.01};
    c.excitation.horizon = horizon;
    c.excitation.input = {0.0, 4.0, 2000, 701};
    c.excitation.params = {{0.0, 1.0, 150, 702}, {0.0, 1.0, 150, 703}};
    c.excitation.local.grid = {};
    c.basis = {"total-degree", 5};
    c.fit = {"global", 110, 5, 0.05};
    c.eval.probe_x = 0.99;
    c.eval.test_horizon = std::min<Index>(horizon, 24000);
    c.eval.test_input = {0.0, 4.0, 2000, 901};
    c.eval.test_params = {{0.0, 1.0, 150, 902}, {0.0, 1.0, 150, 903}};
    return c;
}

void ExperimentConfig::validate() const
{
    try {
        (void)plant.build();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("plant: ") + e.what());
    }
    const Index np = plant.n_params();
    if (excitation.horizon < 1) {
        throw ConfigError("excitation.horizon must be >= 1");
    }
    validate_signal(excitation.input, excitation.horizon, "excitation.input");
    if (static_cast<Index>(excitation.params.size()) != np) {
        throw ConfigError("excitation.params needs one entry per plant parameter (" +
                          std::to_string(np) + ")");
    }
    for (const auto& p : excitation.params) {
        validate_signal(p, excitation.horizon, "excitation.params");
    }
    if (excitation.local.horizon < 1) {
        throw ConfigError("excitation.local.horizon must be >= 1");
    }
    validate_signal(excitation.local.input, excitation.local.horizon, "excitation.local.input");
    for (const auto& g : excitation.local.grid) {
        if (static_cast<Index>(g.size()) != np) {
            throw ConfigError("excitation.local.grid entries need one value per parameter");
        }
    }
    try {
        (void)basis.build(np);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("basis: ") + e.what());
    }
    (void)model_kind_from_string(fit.kind);
    if (fit.procrustes_rank < 0 || fit.pod_rank < 0 || !(fit.regularization >= 0.0)) {
        throw ConfigError("fit: ranks must be >= 0 and regularization >= 0");
    }
    if (fit.kind == "global" && fit.procrustes_rank > 0 && fit.pod_rank > fit.procrustes_rank) {
        throw ConfigError("fit: pod_rank must not exceed procrustes_rank");
    }
    if (!(eval.probe_x > 0.0 && eval.probe_x < 1.0) || eval.test_horizon < 1) {
        throw ConfigError("eval: probe_x must be in (0, 1) and test_horizon >= 1");
    }
    validate_signal(eval.test_input, eval.test_horizon, "eval.test_input");
    if (static_cast<Index>(eval.test_params.size()) != np) {
        throw ConfigError("eval.test_params needs one entry per plant parameter");
    }
    for (const auto& p : eval.test_params) {
        validate_signal(p, eval.test_horizon, "eval.test_params");
    }
}

nlohmann::json ExperimentConfig::to_json() const
{
    return {{"plant",
             {{"h", plant.h},
              {"advection_w", plant.advection_w},
              {"gain", plant.gain},
              {"coefficients", plant.coefficients},
              {"dt", plant.dt},
              {"sample_time", plant.sample_time}}},
            {"excitation",
             {{"horizon", excitation.horizon},
              {"input", signal_json(excitation.input)},
              {"params", signals_json(excitation.params)},
              {"local",
               {{"grid", excitation.local.grid},
                {"horizon", excitation.local.horizon},
                {"input", signal_json(excitation.local.input)}}}}},
            {"basis", {{"kind", basis.kind}, {"degree", basis.degree}}},
            {"fit",
             {{"kind", fit.kind},
              {"procrustes_rank", fit.procrustes_rank},
              {"pod_rank", fit.pod_rank},
              {"regularization", fit.regularization}}},
            {"eval",
             {{"probe_x", eval.probe_x},
              {"test_horizon", eval.test_horizon},
              {"test_input", signal_json(eval.test_input)},
              {"test_params", signals_json(eval.test_params)}}}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j)
{
    check_keys(j, {"preset", "plant", "excitation", "basis", "fit", "eval"}, "config");
    ExperimentConfig c;
    if (j.contains("preset")) {
        const std::string preset = j.at("preset").get<std::string>();
        if (preset == "experiment1") {
            c = experiment1();
        } else if (preset == "experiment2") {
            c = experiment2();
        } else {
            throw ConfigError("config.preset: unknown preset '" + preset + "'");
        }
    }
    if (j.contains("plant")) {
        const json& p = j.at("plant");
        check_keys(p, {"h", "advection_w", "gain", "coefficients", "dt", "sample_time"}, "plant");
        read(p, "h", c.plant.h, "plant");
        read(p, "advection_w", c.plant.advection_w, "plant");
        read(p, "gain", c.plant.gain, "plant");
        read(p, "coefficients", c.plant.coefficients, "plant");
        read(p, "dt", c.plant.dt, "plant");
        read(p, "sample_time", c.plant.sample_time, "plant");
    }
    if (j.contains("excitation")) {
        const json& e = j.at("excitation");
        check_keys(e, {"horizon", "input", "params", "local"}, "excitation");
        read(e, "horizon", c.excitation.horizon, "excitation");
        if (e.contains("input")) {
            c.excitation.input = signal_from(e.at("input"), c.excitation.input, "excitation.input");
        }
        if (e.contains("params")) {
            c.excitation.params = signals_from(e.at("params"), c.excitation.params, "excitation.params");
        }
        if (e.contains("local")) {
            const json& l = e.at("local");
            check_keys(l, {"grid", "horizon", "input"}, "excitation.local");
            read(l, "grid", c.excitation.local.grid, "excitation.local");
            read(l, "horizon", c.excitation.local.horizon, "excitation.local");
            if (l.contains("input")) {
                c.excitation.local.input =
                    signal_from(l.at("input"), c.excitation.local.input, "excitation.local.input");
            }
        }
    }
    if (j.contains("basis")) {
        const json& b = j.at("basis");
        check_keys(b, {"kind", "degree"}, "basis");
        read(b, "kind", c.basis.kind, "basis");
        read(b, "degree", c.basis.degree, "basis");
    }
    if (j.contains("fit")) {
        const json& f = j.at("fit");
        check_keys(f, {"kind", "procrustes_rank", "pod_rank", "regularization"}, "fit");
        read(f, "kind", c.fit.kind, "fit");
        read(f, "procrustes_rank", c.fit.procrustes_rank, "fit");
        read(f, "pod_rank", c.fit.pod_rank, "fit");
        read(f, "regularization", c.fit.regularization, "fit");
    }
    if (j.contains("eval")) {
        const json& v = j.at("eval");
        check_keys(v, {"probe_x", "test_horizon", "test_input", "test_params"}, "eval");
        read(v, "probe_x", c.eval.probe_x, "eval");
        read(v, "test_horizon", c.eval.test_horizon, "eval");
        if (v.contains("test_input")) {
            c.eval.test_input = signal_from(v.at("test_input"), c.eval.test_input, "eval.test_input");
        }
        if (v.contains("test_params")) {
            c.eval.test_params = signals_from(v.at("test_params"), c.eval.test_params, "eval.test_params");
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw IoError("cannot open config " + path);
    }
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return ExperimentConfig::from_json(j);
}

SnapshotDataset make_training_data(const ExperimentConfig& config)
{
    const DiffusionPlant plant = config.plant.build();
    SnapshotDataset d = build_global_dataset(plant, config.excitation.input.aprbs(config.excitation.horizon),
                                             config.excitation.param_configs(),
                                             Vector::Zero(plant.n_states));
    d.provenance["config"] = config.to_json();
    return d;
}

LocalDatasetBundle make_local_bundle(const ExperimentConfig& config)
{
    const DiffusionPlant plant = config.plant.build();
    const auto& l = config.excitation.local;
    return build_local_bundle(plant, l.thetas(), l.input.aprbs(l.horizon), l.horizon);
}

TestSignals make_eval_signals(const ExperimentConfig& config)
{
    const DiffusionPlant plant = config.plant.build();
    std::vector<AprbsConfig> p;
    for (const auto& s : config.eval.test_params) {
        p.push_back(s.aprbs(config.eval.test_horizon));
    }
    return make_test_signals(plant, config.eval.test_input.aprbs(config.eval.test_horizon), p);
}

SnapshotDataset make_eval_dataset(const ExperimentConfig& config)
{
    const DiffusionPlant plant = config.plant.build();
    std::vector<AprbsConfig> p;
    for (const auto& s : config.eval.test_params) {
        p.push_back(s.aprbs(config.eval.test_horizon));
    }
    SnapshotDataset d = build_global_dataset(
        plant, config.eval.test_input.aprbs(config.eval.test_horizon), p, Vector::Zero(plant.n_states));
    d.provenance["config"] = config.to_json();
    d.provenance["role"] = "held-out";
    return d;
}

} // namespace dmdlpv
