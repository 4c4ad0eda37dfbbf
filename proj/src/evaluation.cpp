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
#include "dmdlpv/evaluation.hpp"

#include "dmdlpv/parallel.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dmdlpv {

namespace {

constexpr Index kEvalBlock = 4096;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Index model_states(const Model& model)
{
    return std::visit(overloaded{[](const ExactPlantModel& m) { return m.plant.n_states; },
                                 [](const auto& m) { return m.n_states(); }},
                      model);
}

} // namespace

std::string model_kind(const Model& model)
{
    return std::visit(overloaded{[](const ReducedLti&) { return std::string("dmdc"); },
                                 [](const ReducedLpvModel& m) { return m.kind; },
                                 [](const FullLpvModel&) { return std::string("full-ls"); },
                                 [](const ExactPlantModel&) { return std::string("plant"); }},
                      model);
}

EvalReport compare_states(const Eigen::Ref<const Matrix>& truth,
                          const Eigen::Ref<const Matrix>& prediction)
{
    if (truth.rows() != prediction.rows() || truth.cols() != prediction.cols()) {
        throw DimensionError("compare_states: shape mismatch");
    }
    EvalReport r;
    r.samples = truth.cols();
    if (truth.cols() == 0) {
        r.per_state_mse = Vector::Constant(truth.rows(), kNaN);
        r.mse = kNaN;
        return r;
    }
    r.per_state_mse = (prediction - truth).array().square().rowwise().sum().matrix() /
                      static_cast<double>(truth.cols());
    r.mse = r.per_state_mse.mean();
    return r;
}

EvalReport one_step_mse(const Model& model, const SnapshotDataset& data)
{
    data.validate();
    const Index ns = data.n_states();
    if (model_states(model) != ns) {
        throw DimensionError("one_step_mse: model has " + std::to_string(model_states(model)) +
                             " states, dataset " + std::to_string(ns));
    }
    Vector sse = Vector::Zero(ns);
    Matrix pred;
    Matrix feat;
    for (Index begin = 0; begin < data.size(); begin += kEvalBlock) {
        const Index take = std::min(kEvalBlock, data.size() - begin);
        const auto x = data.x.middleCols(begin, take);
        const auto u = data.u.middleCols(begin, take);
        const auto p = data.p.middleCols(begin, take);
        std::visit(
            overloaded{
                [&](const ReducedLti& m) {
                    const Matrix z = m.pod_transform.transpose() * x;
                    pred.noalias() = m.pod_transform * (m.a_tilde * z + m.b_tilde * u);
                },
                [&](const ReducedLpvModel& m) {
                    const Matrix z = m.pod_transform.transpose() * x;
                    feat.resize(m.basis_x.size() * z.rows() + m.basis_u.size() * u.rows(), take);
                    stacked_feature_block(z, u, p, m.basis_x, m.basis_u, 0, take, feat);
                    const Matrix zn = m.weights() * feat;
                    pred.noalias() = m.pod_transform * zn;
                },
                [&](const FullLpvModel& m) {
                    feat.resize(m.basis_x.size() * ns + m.basis_u.size() * u.rows(), take);
                    stacked_feature_block(x, u, p, m.basis_x, m.basis_u, 0, take, feat);
                    pred.noalias() = m.weights() * feat;
                },
                [&](const ExactPlantModel& m) {
                    pred.resize(ns, take);
                    for (Index k = 0; k < take; ++k) {
                        pred.col(k) = step(m.plant, x.col(k), u(0, k), p.col(k));
                    }
                }},
            model);
        sse += (pred - data.y.middleCols(begin, take)).array().square().rowwise().sum().matrix();
    }
    EvalReport r;
    r.samples = data.size();
    r.per_state_mse = sse / static_cast<double>(data.size());
    r.mse = r.per_state_mse.mean();
    r.diverged = !std::isfinite(r.mse);
    r.config = {{"mode", "one-step"}, {"model", model_kind(model)}, {"samples", data.size()}};
    return r;
}

TestSignals make_test_signals(const DiffusionPlant& plant, const AprbsConfig& u_config,
                              const std::vector<AprbsConfig>& p_configs)
{
    if (static_cast<Index>(p_configs.size()) != plant.n_params()) {
        throw ConfigError("one APRBS config per plant parameter is required");
    }
    TestSignals s;
    s.x0 = Vector::Zero(plant.n_states);
    s.u = aprbs(u_config).transpose();
    s.p.resize(plant.n_params(), u_config.horizon);
    for (std::size_t i = 0; i < p_configs.size(); ++i) {
        if (p_configs[i].horizon != u_config.horizon) {
            throw ConfigError("parameter and input horizons differ");
        }
        s.p.row(static_cast<Index>(i)) = aprbs(p_configs[i]).transpose();
    }
    return s;
}

FreeRunPrediction simulate_model(const Model& model, const TestSignals& signals)
{
    FreeRunPrediction out;
    auto from_lpv = [&](LpvPrediction&& p) {
        out.states = std::move(p.states);
        out.diverged = p.diverged;
        out.diverged_step = p.diverged_step;
    };
    std::visit(
        overloaded{
            [&](const ReducedLti& m) {
                const double bound = divergence_bound(m.state_scale);
                out.states.resize(m.n_states(), signals.u.cols() + 1);
                out.states.col(0) = signals.x0;
                Vector z = m.pod_transform.transpose() * signals.x0;
                for (Index k = 0; k < signals.u.cols(); ++k) {
                    z = m.a_tilde * z + m.b_tilde * signals.u.col(k);
                    out.states.col(k + 1).noalias() = m.pod_transform * z;
                    const auto x = out.states.col(k + 1);
                    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > bound) {
                        out.diverged = true;
                        out.diverged_step = k + 1;
                        out.states.rightCols(out.states.cols() - k - 1).setConstant(kNaN);
                        break;
                    }
                }
            },
            [&](const ReducedLpvModel& m) { from_lpv(predict_lpv(m, signals.x0, signals.u, signals.p)); },
            [&](const FullLpvModel& m) { from_lpv(predict_lpv(m, signals.x0, signals.u, signals.p)); },
            [&](const ExactPlantModel& m) {
                try {
                    out.states = simulate(m.plant, signals.x0, signals.u, signals.p).states;
                } catch (const DivergenceError& e) {
                    out.states = Matrix::Constant(m.plant.n_states, signals.u.cols() + 1, kNaN);
                    out.states.col(0) = signals.x0;
                    out.diverged = true;
                    out.diverged_step = e.step();
                }
            }},
        model);
    return out;
}

EvalReport free_run(const Model& model, const DiffusionPlant& plant, const TestSignals& signals,
                    double probe_x)
{
    if (model_states(model) != plant.n_states) {
        throw DimensionError("free_run: model and plant state dimensions differ");
    }
    const Matrix truth = simulate(plant, signals.x0, signals.u, signals.p).states;
    const FreeRunPrediction pred = simulate_model(model, signals);

    // Columns 1..last are compared; a divergence at step s keeps 1..s-1.
    const Index last = pred.diverged ? pred.diverged_step - 1 : signals.u.cols();
    EvalReport r = compare_states(truth.middleCols(1, last), pred.states.middleCols(1, last));
    r.diverged = pred.diverged;
    r.diverged_step = pred.diverged_step;

    ProbeSeries& probe = r.probe;
    probe.state_index = plant.probe_index(probe_x);
    probe.position = plant.grid()(probe.state_index);
    const Index len = last + 1;
    probe.time = Vector::LinSpaced(len, 0.0, static_cast<double>(len - 1)) * plant.sample_time;
    probe.truth = truth.row(probe.state_index).head(len).transpose();
    probe.model = pred.states.row(probe.state_index).head(len).transpose();
    r.config = {{"mode", "free-run"},
                {"model", model_kind(model)},
                {"samples", signals.u.cols()},
                {"probe_x", probe_x}};
    return r;
}

Container to_container(const Model& model)
{
    Container c;
    c.header = {{"format", "dmdlpv-model"}, {"kind", model_kind(model)}};
    std::visit(overloaded{[&](const ReducedLti& m) {
                              c.header["ranks"] = to_json(m.ranks);
                              c.header["state_scale"] = m.state_scale;
                              c.add("A_tilde", m.a_tilde);
                              c.add("B_tilde", m.b_tilde);
                              c.add("W_yr", m.pod_transform);
                          },
                          [&](const ReducedLpvModel& m) {
                              c.header["ranks"] = to_json(m.ranks);
                              c.header["state_scale"] = m.state_scale;
                              c.header["basis_x"] = m.basis_x.to_json();
                              c.header["basis_u"] = m.basis_u.to_json();
                              c.add("WA_tilde", m.wa_tilde);
                              c.add("WB_tilde", m.wb_tilde);
                              c.add("W_yr", m.pod_transform);
                          },
                          [&](const FullLpvModel& m) {
                              c.header["regularization"] = m.regularization;
                              c.header["state_scale"] = m.state_scale;
                              c.header["basis_x"] = m.basis_x.to_json();
                              c.header["basis_u"] = m.basis_u.to_json();
                              c.add("WA", m.wa);
                              c.add("WB", m.wb);
                          },
                          [&](const ExactPlantModel&) {
                              throw ConfigError("the exact plant model is not serializable");
                          }},
               model);
    return c;
}

Model model_from_container(const Container& c)
{
    if (c.header.value("format", "") != "dmdlpv-model") {
        throw IoError("container is not a dmdlpv model");
    }
    try {
        const std::string kind = c.header.at("kind").get<std::string>();
        if (kind == "dmdc") {
            ReducedLti m;
            m.a_tilde = c.matrix("A_tilde");
            m.b_tilde = c.matrix("B_tilde");
            m.pod_transform = c.matrix("W_yr");
            m.ranks = truncation_from_json(c.header.at("ranks"));
            m.state_scale = c.header.at("state_scale").get<double>();
            if (m.a_tilde.rows() != m.pod_transform.cols() || m.b_tilde.rows() != m.a_tilde.rows()) {
                throw DimensionError("DMDc model: inconsistent shapes");
            }
            return m;
        }
        if (kind == "global" || kind == "local-full" || kind == "local-latent") {
            ReducedLpvModel m;
            m.kind = kind;
            m.wa_tilde = c.matrix("WA_tilde");
            m.wb_tilde = c.matrix("WB_tilde");
            m.pod_transform = c.matrix("W_yr");
            m.basis_x = SchedulingBasis::from_json(c.header.at("basis_x"));
            m.basis_u = SchedulingBasis::from_json(c.header.at("basis_u"));
            m.ranks = truncation_from_json(c.header.at("ranks"));
            m.state_scale = c.header.at("state_scale").get<double>();
            m.validate();
            return m;
        }
        if (kind == "full-ls") {
            FullLpvModel m;
            m.wa = c.matrix("WA");
            m.wb = c.matrix("WB");
            m.basis_x = SchedulingBasis::from_json(c.header.at("basis_x"));
            m.basis_u = SchedulingBasis::from_json(c.header.at("basis_u"));
            m.regularization = c.header.at("regularization").get<double>();
            m.state_scale = c.header.at("state_scale").get<double>();
            m.validate();
            return m;
        }
        throw IoError("unknown model kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("model container header: ") + e.what());
    }
}

void write_probe_csv(const std::string& path, const ProbeSeries& probe)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open " + path + " for writing");
    }
    os << "# probe_index=" << probe.state_index << " x=" << format_double(probe.position) << "\n";
    os << "time,truth,model\n";
    for (Index k = 0; k < probe.time.size(); ++k) {
        os << format_double(probe.time(k)) << ',' << format_double(probe.truth(k)) << ','
           << format_double(probe.model(k)) << '\n';
    }
    if (!os) {
        throw IoError("write failed: " + path);
    }
}

nlohmann::json to_json(const EvalReport& report)
{
    nlohmann::json j = report.config;
    j["mse"] = format_double(report.mse);
    j["samples"] = report.samples;
    j["diverged"] = report.diverged;
    j["diverged_step"] = report.diverged_step;
    std::vector<std::string> per;
    for (Index i = 0; i < report.per_state_mse.size(); ++i) {
        per.push_back(format_double(report.per_state_mse(i)));
    }
    j["per_state_mse"] = per;
    return j;
}

// ---------------------------------------------------------------------------

std::string to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::Dmdc: return "dmdc";
    case ModelKind::Global: return "global";
    case ModelKind::FullLeastSquares: return "full-ls";
    case ModelKind::LocalFull: return "local-full";
    case ModelKind::LocalLatent: return "local-latent";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name)
{
    for (ModelKind k : {ModelKind::Dmdc, ModelKind::Global, ModelKind::FullLeastSquares,
                        ModelKind::LocalFull, ModelKind::LocalLatent}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ConfigError("unknown model kind '" + name + "'");
}

bool SweepResult::operator==(const SweepResult& other) const
{
    if (kind != other.kind || basis != other.basis || axis != other.axis ||
        rows.size() != other.rows.size() || config != other.config) {
        return false;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& a = rows[i];
        const auto& b = other.rows[i];
        const bool same_mse = (std::isnan(a.mse) && std::isnan(b.mse)) || a.mse == b.mse;
        if (a.requested_pr != b.requested_pr || a.requested_pod != b.requested_pod ||
            a.rank_pr != b.rank_pr || a.rank_pod != b.rank_pod || a.basis != b.basis ||
            !same_mse || a.diverged != b.diverged) {
            return false;
        }
    }
    return true;
}

namespace {

// 0 means full and sorts last.
void check_axis(const std::vector<Index>& ranks, const char* name)
{
    auto key = [](Index r) { return r == 0 ? std::numeric_limits<Index>::max() : r; };
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (ranks[i] < 0) {
            throw ConfigError(std::string(name) + " ranks must be >= 0");
        }
        if (i > 0 && key(ranks[i]) <= key(ranks[i - 1])) {
            throw ConfigError(std::string(name) + " rank axis must be strictly increasing");
        }
    }
    if (ranks.empty()) {
        throw ConfigError(std::string(name) + " rank list is empty");
    }
}

} // namespace

SweepResult run_rank_sweep(const SweepSpec& spec)
{
    const bool local = spec.kind == ModelKind::LocalFull || spec.kind == ModelKind::LocalLatent;
    if (local ? spec.bundle == nullptr : spec.train == nullptr) {
        throw ConfigError("sweep is missing its training data");
    }
    const SnapshotDataset* eval = spec.eval ? spec.eval : spec.train;
    if (eval == nullptr) {
        throw ConfigError("local sweeps need an evaluation dataset");
    }
    check_axis(spec.procrustes_ranks, "Procrustes");
    check_axis(spec.pod_ranks, "POD");

    SweepResult result;
    result.kind = spec.kind;
    result.basis = spec.basis_x.name();

    std::vector<std::pair<Index, Index>> points;
    if (spec.kind == ModelKind::FullLeastSquares) {
        result.axis = "point";
        points.emplace_back(0, 0);
    } else if (local) {
        result.axis = spec.procrustes_ranks.size() > 1 ? "rank" : "point";
        for (Index r : spec.procrustes_ranks) {
            points.emplace_back(r, r);
        }
    } else if (spec.procrustes_ranks.size() > 1 && spec.pod_ranks.size() > 1) {
        throw ConfigError("sweep over one rank axis at a time");
    } else if (spec.pod_ranks.size() > 1) {
        result.axis = "pod";
        for (Index r : spec.pod_ranks) {
            points.emplace_back(spec.procrustes_ranks.front(), r);
        }
    } else {
        result.axis = spec.procrustes_ranks.size() > 1 ? "procrustes" : "point";
        for (Index r : spec.procrustes_ranks) {
            points.emplace_back(r, spec.pod_ranks.front());
        }
    }

    std::unique_ptr<LpvRegression> regression;
    if (spec.kind == ModelKind::Global || spec.kind == ModelKind::FullLeastSquares) {
        regression = std::make_unique<LpvRegression>(*spec.train, spec.basis_x, spec.basis_u);
    }

    result.rows.resize(points.size());
    parallel_for(static_cast<Index>(points.size()), spec.threads, [&](Index i) {
        const auto [pr, pod] = points[static_cast<std::size_t>(i)];
        SweepRow& row = result.rows[static_cast<std::size_t>(i)];
        row.basis = result.basis;
        row.requested_pr = row.rank_pr = pr;
        row.requested_pod = row.rank_pod = pod;
        try {
            Model model;
            switch (spec.kind) {
            case ModelKind::Dmdc: {
                auto m = fit_dmdc(*spec.train, {pr, pod, spec.regularization}).model;
                row.rank_pr = m.ranks.procrustes_rank;
                row.rank_pod = m.ranks.pod_rank;
                model = std::move(m);
                break;
            }
            case ModelKind::Global: {
                auto m = regression->reduce({pr, pod, spec.regularization});
                row.rank_pr = m.ranks.procrustes_rank;
                row.rank_pod = m.ranks.pod_rank;
                model = std::move(m);
                break;
            }
            case ModelKind::FullLeastSquares:
                model = regression->full(spec.regularization);
                row.rank_pr = regression->factorization().effective_rank();
                row.rank_pod = regression->n_states();
                break;
            case ModelKind::LocalFull:
            case ModelKind::LocalLatent: {
                const LocalFitOptions opt{pr, spec.regularization, 1};
                auto fit = spec.kind == ModelKind::LocalFull
                               ? fit_local_fullspace(*spec.bundle, spec.basis_x, spec.basis_u, opt)
                               : fit_local_latent(*spec.bundle, spec.basis_x, spec.basis_u, opt);
                row.rank_pr = fit.model.ranks.procrustes_rank;
                row.rank_pod = fit.model.ranks.pod_rank;
                model = std::move(fit.model);
                break;
            }
            }
            const EvalReport rep = one_step_mse(model, *eval);
            row.mse = rep.mse;
            row.diverged = rep.diverged;
        } catch (const std::exception& e) {
            spdlog::warn("sweep point ({}, {}) failed: {}", pr, pod, e.what());
            row.error = e.what();
            row.mse = kNaN;
        }
    });

    result.config = {{"kind", to_string(spec.kind)},
                     {"axis", result.axis},
                     {"basis", result.basis},
                     {"regularization", spec.regularization},
                     {"basis_x", spec.basis_x.to_json()},
                     {"basis_u", spec.basis_u.to_json()},
                     {"procrustes_ranks", spec.procrustes_ranks},
                     {"pod_ranks", spec.pod_ranks}};
    return result;
}

std::string sweep_csv_string(const SweepResult& result)
{
    nlohmann::json cfg = result.config;
    cfg["kind"] = to_string(result.kind);
    cfg["axis"] = result.axis;
    cfg["basis"] = result.basis;
    std::ostringstream os;
    os << "# config=" << cfg.dump() << "\n";
    os << "rank_pr,rank_pod,basis,mse,diverged\n";
    for (const auto& row : result.rows) {
        os << row.rank_pr << ',' << row.rank_pod << ',' << row.basis << ','
           << format_double(row.mse) << ',' << (row.diverged ? 1 : 0) << '\n';
    }
    return os.str();
}

void write_sweep_csv(const std::string& path, const SweepResult& result)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open " + path + " for writing");
    }
    os << sweep_csv_string(result);
    if (!os) {
        throw IoError("write failed: " + path);
    }
}

namespace {

void restore_requested(SweepResult& r)
{
    const auto pr = r.config.value("procrustes_ranks", std::vector<Index>{});
    const auto pod = r.config.value("pod_ranks", std::vector<Index>{});
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        SweepRow& row = r.rows[i];
        auto at = [i](const std::vector<Index>& v) {
            return v.empty() ? Index{0} : v[std::min(i, v.size() - 1)];
        };
        if (r.kind == ModelKind::FullLeastSquares) {
            row.requested_pr = row.requested_pod = 0;
        } else if (r.kind == ModelKind::LocalFull || r.kind == ModelKind::LocalLatent) {
            row.requested_pr = row.requested_pod = at(pr);
        } else if (r.axis == "pod") {
            row.requested_pr = pr.empty() ? 0 : pr.front();
            row.requested_pod = at(pod);
        } else {
            row.requested_pr = at(pr);
            row.requested_pod = pod.empty() ? 0 : pod.front();
        }
    }
}

} // namespace

SweepResult parse_sweep_csv(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    const std::string prefix = "# config=";
    if (!std::getline(is, line) || line.rfind(prefix, 0) != 0) {
        throw IoError("sweep CSV: missing config line");
    }
    SweepResult r;
    try {
        r.config = nlohmann::json::parse(line.substr(prefix.size()));
        r.kind = model_kind_from_string(r.config.at("kind").get<std::string>());
        r.axis = r.config.at("axis").get<std::string>();
        r.basis = r.config.at("basis").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("sweep CSV: bad config line: ") + e.what());
    }
    if (!std::getline(is, line) || line != "rank_pr,rank_pod,basis,mse,diverged") {
        throw IoError("sweep CSV: unexpected header");
    }
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 5) {
            throw IoError("sweep CSV: expected 5 fields in '" + line + "'");
        }
        SweepRow row;
        try {
            row.rank_pr = std::stoll(f[0]);
            row.rank_pod = std::stoll(f[1]);
        } catch (const std::exception&) {
            throw IoError("sweep CSV: bad rank in '" + line + "'");
        }
        row.basis = f[2];
        row.mse = parse_double(f[3]);
        row.diverged = f[4] == "1";
        r.rows.push_back(std::move(row));
    }
    restore_requested(r);
    return r;
}

SweepResult read_sweep_csv(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_sweep_csv(ss.str());
}

} // namespace dmdlpv
