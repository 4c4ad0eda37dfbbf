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
// dmdlpv: command-line front end.
//
//   dmdlpv gen-data  [--config c.json] --out data.bin [--local] [--csv data.csv]
//   dmdlpv train     [--config c.json] --data data.bin --out model.bin [--kind ...]
//   dmdlpv eval      --model model.bin --mode one-step|free-run [--data d.bin] [--config c.json]
//   dmdlpv reproduce <target> [--config c.json] [--out-dir dir]
//   dmdlpv info      <file>
//
// Exit codes: 0 ok, 1 I/O or unexpected error, 2 config/schema error,
// 3 numeric or dimension error, 4 divergence, 5 reproduce checks failed.
// DMDLPV_OUTPUT_DIR and DMDLPV_THREADS supply defaults for --out-dir/--threads.

#include "dmdlpv/reproduce.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace dmdlpv;

namespace {

enum ExitCode : int {
    kOk = 0,
    kIoError = 1,
    kConfigError = 2,
    kNumericError = 3,
    kDiverged = 4,
    kChecksFailed = 5,
};

std::string env_or(const char* name, std::string fallback)
{
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

unsigned env_threads()
{
    const std::string v = env_or("DMDLPV_THREADS", "1");
    try {
        return static_cast<unsigned>(std::stoul(v));
    } catch (const std::exception&) {
        throw ConfigError("DMDLPV_THREADS must be a non-negative integer");
    }
}

ExperimentConfig config_or_default(const std::string& path, ExperimentConfig fallback)
{
    return path.empty() ? fallback : load_config(path);
}

void print_dataset(const SnapshotDataset& d)
{
    std::cout << "samples " << d.size() << ", states " << d.n_states() << ", inputs " << d.n_inputs()
              << ", params " << d.n_params() << "\n";
}

std::string describe(const Container& c)
{
    std::ostringstream os;
    nlohmann::json h = c.header;
    os << "format: " << h.value("format", "?") << "\n";
    if (h.contains("kind")) {
        os << "kind: " << h["kind"].get<std::string>() << "\n";
    }
    for (const auto& [name, m] : c.matrices) {
        os << "  " << name << ": " << m.rows() << " x " << m.cols() << "\n";
    }
    h.erase("provenance");
    os << "header: " << h.dump() << "\n";
    return os.str();
}

struct GenArgs {
    std::string config, out, csv;
    bool local = false;
};

int cmd_gen_data(const GenArgs& a)
{
    const ExperimentConfig cfg = config_or_default(a.config, ExperimentConfig::experiment1());
    if (a.local) {
        const LocalDatasetBundle b = make_local_bundle(cfg);
        Container c = to_container(b);
        c.header["config"] = cfg.to_json();
        write_container(a.out, c);
        std::cout << "local bundle: " << b.size() << " frozen datasets of "
                  << b.datasets.front().size() << " samples, " << b.datasets.front().n_states()
                  << " states\n";
        std::cout << "input seed " << cfg.excitation.local.input.seed << " (per-system seeds derived)\n";
    } else {
        const SnapshotDataset d = make_training_data(cfg);
        write_container(a.out, to_container(d));
        if (!a.csv.empty()) {
            write_dataset_csv(a.csv, d);
        }
        print_dataset(d);
        std::cout << "input seed " << cfg.excitation.input.seed << ", parameter seeds";
        for (const auto& p : cfg.excitation.params) {
            std::cout << ' ' << p.seed;
        }
        std::cout << "\n";
    }
    std::cout << "wrote " << a.out << "\n";
    return kOk;
}

struct TrainArgs {
    std::string config, data, out, kind, basis, lti_sidecar;
    Index rank_pr = -1, rank_pod = -1;
    double lambda = -1.0;
    unsigned threads = 1;
};

int cmd_train(const TrainArgs& a)
{
    ExperimentConfig cfg = config_or_default(a.config, ExperimentConfig::experiment1());
    if (!a.kind.empty()) cfg.fit.kind = a.kind;
    if (!a.basis.empty()) cfg.basis.kind = a.basis;
    if (a.rank_pr >= 0) cfg.fit.procrustes_rank = a.rank_pr;
    if (a.rank_pod >= 0) cfg.fit.pod_rank = a.rank_pod;
    if (a.lambda >= 0.0) cfg.fit.regularization = a.lambda;
    cfg.validate();

    const Container input = read_container(a.data);
    const ModelKind kind = model_kind_from_string(cfg.fit.kind);
    Model model;
    double train_mse = 0.0;
    if (kind == ModelKind::LocalFull || kind == ModelKind::LocalLatent) {
        const LocalDatasetBundle b = bundle_from_container(input);
        const SchedulingBasis basis = cfg.basis.build(b.datasets.front().n_params());
        const LocalFitOptions opt{cfg.fit.procrustes_rank, cfg.fit.regularization, a.threads};
        LocalFit fit = kind == ModelKind::LocalFull ? fit_local_fullspace(b, basis, basis, opt)
                                                    : fit_local_latent(b, basis, basis, opt);
        double sse = 0.0;
        Index count = 0;
        for (const auto& d : b.datasets) {
            sse += one_step_mse(fit.model, d).mse * static_cast<double>(d.size());
            count += d.size();
        }
        train_mse = sse / static_cast<double>(count);
        if (!a.lti_sidecar.empty()) {
            write_container(a.lti_sidecar, to_container(fit.ltis));
        }
        model = std::move(fit.model);
    } else {
        const SnapshotDataset d = dataset_from_container(input);
        const SchedulingBasis basis = cfg.basis.build(d.n_params());
        switch (kind) {
        case ModelKind::Dmdc: model = fit_dmdc(d, cfg.fit.truncation()).model; break;
        case ModelKind::Global: model = fit_global(d, basis, basis, cfg.fit.truncation()); break;
        default: model = fit_full_least_squares(d, basis, basis, cfg.fit.regularization); break;
        }
        train_mse = one_step_mse(model, d).mse;
    }
    Container c = to_container(model);
    c.header["config"] = cfg.to_json();
    c.header["train_mse"] = train_mse;
    write_container(a.out, c);
    std::cout << "kind " << model_kind(model) << ", training MSE " << format_double(train_mse) << "\n";
    std::cout << "wrote " << a.out << "\n";
    return kOk;
}

struct EvalArgs {
    std::string model, mode = "one-step", data, config, out_dir;
};

int cmd_eval(const EvalArgs& a)
{
    const Container mc = read_container(a.model);
    const Model model = model_from_container(mc);
    ExperimentConfig cfg = ExperimentConfig::experiment1();
    if (!a.config.empty()) {
        cfg = load_config(a.config);
    } else if (mc.header.contains("config")) {
        cfg = ExperimentConfig::from_json(mc.header.at("config"));
    }
    std::filesystem::create_directories(a.out_dir);
    const std::filesystem::path dir(a.out_dir);

    EvalReport rep;
    if (a.mode == "one-step") {
        const SnapshotDataset d = a.data.empty() ? make_training_data(cfg)
                                                 : dataset_from_container(read_container(a.data));
        rep = one_step_mse(model, d);
    } else if (a.mode == "free-run") {
        rep = free_run(model, cfg.plant.build(), make_eval_signals(cfg), cfg.eval.probe_x);
        write_probe_csv((dir / "probe.csv").string(), rep.probe);
    } else {
        throw ConfigError("--mode must be one-step or free-run");
    }
    rep.config["experiment"] = cfg.to_json();

    std::ofstream os(dir / "report.csv", std::ios::binary);
    os << "# config=" << rep.config.dump() << "\n";
    os << "mode,model,samples,mse,diverged,diverged_step\n";
    os << a.mode << ',' << model_kind(model) << ',' << rep.samples << ',' << format_double(rep.mse)
       << ',' << (rep.diverged ? 1 : 0) << ',' << rep.diverged_step << "\n";
    std::ofstream js(dir / "report.json", std::ios::binary);
    js << to_json(rep).dump(2) << "\n";
    if (!os || !js) {
        throw IoError("cannot write reports to " + a.out_dir);
    }

    std::cout << a.mode << " MSE " << format_double(rep.mse) << " over " << rep.samples
              << " samples\n";
    if (rep.diverged) {
        std::cout << "diverged at step " << rep.diverged_step << "\n";
        return kDiverged;
    }
    return kOk;
}

struct ReproArgs {
    std::string target, config, out_dir;
    unsigned threads = 1;
    bool paper_scale = false;
};

int cmd_reproduce(const ReproArgs& a)
{
    ExperimentConfig cfg = default_config_for(a.target);
    if (a.paper_scale && a.target == "exp2") {
        cfg = ExperimentConfig::experiment2(240000);
    }
    if (!a.config.empty()) {
        cfg = load_config(a.config);
    }
    const ReproduceReport rep = reproduce(a.target, cfg, a.out_dir, a.threads);
    std::cout << rep.summary();
    return rep.passed() ? kOk : kChecksFailed;
}

int cmd_info(const std::string& path)
{
    std::cout << describe(read_container(path));
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    auto logger = spdlog::stderr_color_mt("dmdlpv");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);

    CLI::App app{"Reduced-order LPV identification via DMD"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");

    unsigned threads = 1;
    std::string out_dir;
    try {
        threads = env_threads();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    out_dir = env_or("DMDLPV_OUTPUT_DIR", "out");

    GenArgs gen;
    auto* g = app.add_subcommand("gen-data", "Simulate the plant and write a dataset container");
    g->add_option("--config", gen.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    g->add_option("--out", gen.out, "Output container")->required();
    g->add_option("--csv", gen.csv, "Also export the global dataset as CSV");
    g->add_flag("--local", gen.local, "Write the frozen-parameter bundle instead");

    TrainArgs train;
    auto* t = app.add_subcommand("train", "Fit a model and write a model container");
    t->add_option("--config", train.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    t->add_option("--data", train.data, "Dataset or local bundle container")->required()->check(CLI::ExistingFile);
    t->add_option("--out", train.out, "Output model container")->required();
    t->add_option("--kind", train.kind, "dmdc|global|full-ls|local-full|local-latent");
    t->add_option("--basis", train.basis, "exact|under|over|constant|total-degree");
    t->add_option("--rank-pr", train.rank_pr, "Procrustes rank (0 = full)");
    t->add_option("--rank-pod", train.rank_pod, "POD rank (0 = automatic)");
    t->add_option("--lambda", train.lambda, "Regularization");
    t->add_option("--lti-sidecar", train.lti_sidecar, "Write the LTI collection (local kinds)");
    t->add_option("--threads", train.threads, "Worker threads")->default_val(threads);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Evaluate a model (one-step or free-run)");
    e->add_option("--model", ev.model, "Model container")->required()->check(CLI::ExistingFile);
    e->add_option("--mode", ev.mode, "one-step|free-run")->check(CLI::IsMember({"one-step", "free-run"}));
    e->add_option("--data", ev.data, "Dataset for one-step (default: regenerate from config)")
        ->check(CLI::ExistingFile);
    e->add_option("--config", ev.config, "Experiment config (default: the model's)")->check(CLI::ExistingFile);
    e->add_option("--out-dir", ev.out_dir, "Report directory")->default_val(out_dir);

    ReproArgs rp;
    auto* r = app.add_subcommand("reproduce", "Run a pinned-seed experiment pipeline");
    r->add_option("target", rp.target, "table1|pod-sweep|local-tables|sim-test|exp2")
        ->required()
        ->check(CLI::IsMember(reproduce_targets()));
    r->add_option("--config", rp.config, "Experiment config override")->check(CLI::ExistingFile);
    r->add_option("--out-dir", rp.out_dir, "Output directory")->default_val(out_dir);
    r->add_option("--threads", rp.threads, "Worker threads")->default_val(threads);
    r->add_flag("--paper-scale", rp.paper_scale, "exp2 with the full 240000-sample horizon");

    std::string info_path;
    auto* i = app.add_subcommand("info", "Describe a dataset or model container");
    i->add_option("file", info_path, "Container file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kOk : kConfigError;
    }
    if (verbose) {
        spdlog::set_level(spdlog::level::debug);
    }

    try {
        if (*g) return cmd_gen_data(gen);
        if (*t) return cmd_train(train);
        if (*e) return cmd_eval(ev);
        if (*r) return cmd_reproduce(rp);
        if (*i) return cmd_info(info_path);
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return kConfigError;
    } catch (const DivergenceError& err) {
        std::cerr << "divergence: " << err.what() << "\n";
        return kDiverged;
    } catch (const DimensionError& err) {
        std::cerr << "dimension error: " << err.what() << "\n";
        return kNumericError;
    } catch (const DomainError& err) {
        std::cerr << "numeric error: " << err.what() << "\n";
        return kNumericError;
    } catch (const IoError& err) {
        std::cerr << "I/O error: " << err.what() << "\n";
        return kIoError;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kIoError;
    }
    return kOk;
}
