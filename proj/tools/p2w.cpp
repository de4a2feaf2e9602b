// p2w: command-line front end for the power-to-weights pipeline.
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "p2w/common/error.hpp"
#include "p2w/common/rng.hpp"
#include "p2w/data/csv.hpp"
#include "p2w/data/synthetic.hpp"
#include "p2w/eval/experiment.hpp"
#include "p2w/eval/metrics.hpp"
#include "p2w/pipeline/config.hpp"

namespace fs = std::filesystem;
using namespace p2w;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::string out = "p2w-out";
    std::optional<std::string> scale;
    std::optional<int> threads;
};

void log(const std::string& stage, const std::string& msg) { std::cerr << stage << ": " << msg << '\n'; }

pipeline::RunConfig resolve_config(const Globals& g) {
    pipeline::RunConfig c;
    if (!g.config_path.empty()) {
        c = pipeline::load_run_config(g.config_path);
        if (g.scale && *g.scale != c.scale) {
            throw ValidationError("--scale " + *g.scale + " contradicts the config's scale '" + c.scale + "'");
        }
    } else {
        c = pipeline::default_config(g.scale.value_or("desk"));
    }
    if (g.seed) c.seed = *g.seed;
    if (g.threads) c.threads = *g.threads;
    c.validate();
    return c;
}

// Keeps every write under --out.
fs::path under_out(const Globals& g, const std::string& rel) { return fs::path(g.out) / rel; }

data::LabeledDataset load_or_draw(const std::string& dir, const data::TaskPreset& preset, int n, std::uint64_t seed) {
    if (!dir.empty()) return data::load_dataset(dir);
    return data::gen_synthetic(preset.spec, n, seed);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"p2w: extract a classifier's weights from one simulated power trace and transfer them"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Master seed (overrides the config)");
    app.add_option("--config", g.config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "Output directory; nothing is written outside it")->capture_default_str();
    app.add_option("--scale", g.scale, "Defaults to use without --config")->check(CLI::IsMember({"paper", "desk"}));
    app.add_option("--threads", g.threads, "Worker cap for pair preparation")->check(CLI::PositiveNumber);

    std::string task = "eeg";
    auto add_task = [&](CLI::App* sub) {
        sub->add_option("--task", task, "Task preset")->check(CLI::IsMember(data::task_preset_names()))->capture_default_str();
    };

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Draw a synthetic task dataset, or import a CSV");
    add_task(gen);
    int gen_n = 1000;
    std::string csv_path, label_column = "label";
    gen->add_option("-n,--count", gen_n, "Samples to draw")->check(CLI::PositiveNumber)->capture_default_str();
    gen->add_option("--csv", csv_path, "Import this CSV instead of drawing")->check(CLI::ExistingFile);
    gen->add_option("--label-column", label_column, "CSV label column")->capture_default_str();

    // prepare-pairs
    auto* prep = app.add_subcommand("prepare-pairs", "Train surrogates on public chunks and capture their traces");
    add_task(prep);
    int sub_chunks = 1;
    prep->add_option("--sub", sub_chunks, "Chunks in Sub")->check(CLI::PositiveNumber)->capture_default_str();

    // train-ednn
    auto* train = app.add_subcommand("train-ednn", "Phase 1: build the pair dataset and train the EDNN");
    add_task(train);

    // extract
    auto* extract = app.add_subcommand("extract", "Phase 2: recover a weights matrix from one target trace");
    add_task(extract);
    std::string run_dir, model_path, trace_dir;
    extract->add_option("--run", run_dir, "Phase-1 run directory (default <out>/<task>)");
    auto* model_opt = extract->add_option("--model", model_path, "Target model JSON to capture")->check(CLI::ExistingFile);
    extract->add_option("--trace", trace_dir, "Captured trace container to decode")
        ->check(CLI::ExistingDirectory)
        ->excludes(model_opt);

    // finetune
    auto* ft = app.add_subcommand("finetune", "Phase 3: initialise from a matrix and fine-tune on D_small");
    add_task(ft);
    std::string matrix_path, dsmall_dir, mode_name = "balanced";
    ft->add_option("--matrix", matrix_path, "Extracted matrix JSON (default <out>/<task>/extracted_matrix.json)");
    ft->add_option("--dsmall", dsmall_dir, "D_small dataset directory (default: drawn from the task)");
    ft->add_option("--mode", mode_name, "D_small sampling mode when drawn")
        ->check(CLI::IsMember({"balanced", "imbalanced2x"}))
        ->capture_default_str();

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Score a model on a dataset");
    add_task(ev);
    std::string eval_model, eval_data;
    ev->add_option("--model", eval_model, "Model JSON (default <out>/<task>/final_model.json)");
    ev->add_option("--data", eval_data, "Dataset directory (default: a fresh draw of the task)");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run the full comparison protocol and write report.json");
    bool no_build = false;
    exp->add_flag("--no-build", no_build, "Fail instead of building missing phase-1 artifacts");

    // validate-config
    auto* vc = app.add_subcommand("validate-config", "Check a run configuration and print its digest");
    bool dump = false;
    vc->add_flag("--dump", dump, "Print the resolved configuration instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::Usage);
    }

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        const pipeline::RunConfig cfg = resolve_config(g);
        const std::string digest = cfg.digest();
        const data::TaskPreset preset = data::task_preset(task);

        if (vc->parsed()) {
            if (dump) {
                std::cout << pipeline::to_json(cfg).dump(2) << '\n';
                return 0;
            }
            Json phase1 = Json::object();
            for (const auto& t : cfg.tasks) phase1[t] = pipeline::phase1_digest(cfg, t);
            std::cout << Json{{"valid", true}, {"config_digest", digest}, {"scale", cfg.scale}, {"phase1_digests", phase1}}
                             .dump()
                      << '\n';
            return 0;
        }
        fs::create_directories(g.out);

        if (gen->parsed()) {
            data::LabeledDataset ds;
            if (!csv_path.empty()) {
                ds = data::load_csv(csv_path, label_column);
            } else {
                ds = data::gen_synthetic(preset.spec, gen_n, pipeline::task_seed(cfg.seed, task));
            }
            const fs::path dir = under_out(g, "data");
            data::save_dataset(dir, ds);
            pipeline::stamp_config_digest(dir / "data.json", digest);
            log(stage, "wrote " + std::to_string(ds.size()) + " samples to " + dir.string());
            return 0;
        }

        const pipeline::PipelineConfig pc = pipeline::pipeline_config(cfg, preset);
        const fs::path task_dir = under_out(g, task);

        if (prep->parsed()) {
            auto chunks = pipeline::public_chunks(cfg, preset);
            if (sub_chunks > static_cast<int>(chunks.size())) {
                throw ValidationError("--sub " + std::to_string(sub_chunks) + " exceeds the " +
                                      std::to_string(chunks.size()) + " configured chunks");
            }
            chunks.resize(static_cast<std::size_t>(sub_chunks));
            const auto pairs = pipeline::prepare_pairs(chunks, pc.r, pc, pipeline::phase_fixed_input(pc));
            pipeline::save_pairs(task_dir / "pairs", pairs, digest);
            log(stage, "wrote " + std::to_string(pairs.size()) + " pairs to " + (task_dir / "pairs").string());
            return 0;
        }

        if (train->parsed()) {
            device::FixedInput fixed;
            fs::remove(task_dir / "phase1.json");
            const auto r = eval::ensure_phase1(cfg, preset, task_dir, true, fixed);
            log(stage, std::string(r.reached_threshold ? "reached" : "did not reach") + " theta after " +
                           std::to_string(r.history.size()) + " iteration(s)");
            return r.reached_threshold ? 0 : static_cast<int>(ExitCode::Numerical);
        }

        if (extract->parsed()) {
            const fs::path from = run_dir.empty() ? task_dir : fs::path(run_dir);
            device::FixedInput fixed;
            auto p1 = pipeline::load_phase1(from, fixed);
            codec::WeightsMatrix w;
            if (!trace_dir.empty()) {
                const auto set = device::read_trace_set(trace_dir);
                if (set.trace_count() != 1) throw ValidationError(trace_dir + ": expected exactly one trace");
                const auto row = set.row(0);
                w = pipeline::extract_from_trace(p1.ednn, p1.pca, p1.standardizer, {row.begin(), row.end()},
                                                 pc.topology);
            } else {
                nn::MlpModel target;
                if (!model_path.empty()) {
                    target = nn::mlp_from_json(read_json(model_path));
                } else {
                    // No model given: train a target on a private draw of the task.
                    const std::uint64_t s = derive_seed(pc.seed, 0x7a);
                    Rng rng(derive_seed(s, 1));
                    target = nn::MlpModel::random(pc.topology, rng);
                    nn::TrainConfig tc = cfg.target_train;
                    tc.rng_seed = derive_seed(s, 2);
                    pipeline::train_classifier(target, data::gen_synthetic(preset.spec, cfg.target_train_size, s), tc);
                    Json tj = nn::to_json(target);
                    tj["config_digest"] = digest;
                    write_json(task_dir / "target_model.json", tj);
                }
                w = pipeline::run_phase2(p1.ednn, p1.pca, p1.standardizer, target, fixed, pc.device,
                                         {fixed.digest(), p1.pca.digest()}, derive_seed(pc.seed, 0x7b));
                log(stage, "ednn accuracy against the target's matrix: " +
                               std::to_string(ednn::ednn_accuracy(w, codec::coefficients_to_matrix(target), pc.tau)));
            }
            Json wj = codec::to_json(w);
            wj["config_digest"] = digest;
            fs::create_directories(task_dir);
            write_json(task_dir / "extracted_matrix.json", wj);
            log(stage, "wrote " + (task_dir / "extracted_matrix.json").string());
            return 0;
        }

        if (ft->parsed()) {
            const fs::path mp = matrix_path.empty() ? task_dir / "extracted_matrix.json" : fs::path(matrix_path);
            const codec::WeightsMatrix w = codec::weights_matrix_from_json(read_json(mp));
            const std::uint64_t s = derive_seed(pc.seed, 0xf7);
            const data::LabeledDataset d_small =
                dsmall_dir.empty() ? data::sample_dsmall(data::gen_synthetic(preset.spec, cfg.small_pool_size, s),
                                                         preset.dsmall_size, data::sample_mode_from_string(mode_name),
                                                         derive_seed(s, 1))
                                   : data::load_dataset(dsmall_dir);
            pipeline::FinetuneConfig fc = cfg.finetune;
            fc.rng_seed = derive_seed(s, 2);
            const auto r = pipeline::run_phase3(w, pc.topology, d_small, fc);
            fs::create_directories(task_dir);
            Json mj = nn::to_json(r.model);
            mj["config_digest"] = digest;
            write_json(task_dir / "final_model.json", mj);
            std::ofstream curves(task_dir / "curves.csv");
            curves << "# config_digest " << digest << "\nepoch,split,accuracy\n";
            for (std::size_t e = 0; e < r.curves.train.size(); ++e) {
                curves << e << ",train," << r.curves.train[e] << '\n' << e << ",validation," << r.curves.validation[e] << '\n';
            }
            log(stage, "best epoch " + std::to_string(r.best_epoch) + ", stopped at " + std::to_string(r.stop_epoch));
            return 0;
        }

        if (ev->parsed()) {
            const fs::path mp = eval_model.empty() ? task_dir / "final_model.json" : fs::path(eval_model);
            const nn::MlpModel model = nn::mlp_from_json(read_json(mp));
            const data::LabeledDataset ds =
                load_or_draw(eval_data, preset, cfg.test_size, derive_seed(pc.seed, 0xe5));
            const auto cm = eval::confusion_matrix(model, ds);
            const Json result{{"config_digest", digest},
                              {"accuracy", eval::accuracy(model, ds)},
                              {"f1", eval::f1_score(cm, eval::default_averaging(cm.classes()))},
                              {"samples", ds.size()}};
            fs::create_directories(task_dir);
            write_json(task_dir / "evaluation.json", result);
            std::cout << result.dump() << '\n';
            return 0;
        }

        if (exp->parsed()) {
            const auto report = eval::run_experiments(cfg, g.out, !no_build);
            eval::write_report(g.out, report);
            log(stage, "report digest " + json_digest(eval::to_json(report)));
            return 0;
        }
    } catch (const Error& e) {
        log(stage, std::string("error: ") + e.what());
        return static_cast<int>(e.code());
    } catch (const nlohmann::json::exception& e) {
        log(stage, std::string("error: malformed JSON: ") + e.what());
        return static_cast<int>(ExitCode::Validation);
    } catch (const std::exception& e) {
        log(stage, std::string("error: ") + e.what());
        return static_cast<int>(ExitCode::Validation);
    }
    return static_cast<int>(ExitCode::Usage);
}
