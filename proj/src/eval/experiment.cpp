#include "p2w/eval/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "p2w/common/error.hpp"
#include "p2w/common/rng.hpp"
#include "p2w/eval/metrics.hpp"
#include "p2w/pipeline/pipeline.hpp"

namespace p2w::eval {

namespace {

enum Stream : std::uint64_t {
    kSeeds = 0x5eed,
    kTargetData = 1,
    kTestData,
    kSmallPool,
    kTargetInit,
    kTargetTrain,
    kCapture,
    kSmallDraw,
    kFreshInit,
    kFinetune,
};

void log(const std::string& msg) { std::cerr << msg << '\n'; }

std::string fmt(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(6) << v;
    return s.str();
}

VariantRun score(const pipeline::FinetuneResult& r, const data::LabeledDataset& test) {
    VariantRun v;
    const ConfusionMatrix cm = confusion_matrix(r.model, test);
    v.accuracy = accuracy(r.model, test);
    v.f1 = f1_score(cm, default_averaging(cm.classes()));
    v.curves = r.curves;
    // curve position 1 is the starting model, so the reported epoch is the training epoch
    if (const auto e = overfit_epoch(overfit_curve(r.curves))) v.overfit_epoch = *e - 1;
    return v;
}

Json to_json(const VariantRun& v) {
    return Json{{"accuracy", v.accuracy},
                {"f1", v.f1},
                {"overfit_epoch", v.overfit_epoch ? Json(*v.overfit_epoch) : Json(nullptr)}};
}

std::vector<double> collect(const TaskReport& t, auto&& fn) {
    std::vector<double> out;
    for (const auto& s : t.seeds) out.push_back(fn(s));
    return out;
}

Json summary_json(const Summary& s) { return Json{{"mean", s.mean}, {"std", s.stddev}}; }

double relative_drop(double balanced, double imbalanced) {
    return balanced > 0.0 ? (balanced - imbalanced) / balanced : 0.0;
}

} // namespace

const ModeRun* SeedRun::find(data::SampleMode m) const {
    for (const auto& r : modes) {
        if (r.mode == m) return &r;
    }
    return nullptr;
}

std::vector<std::uint64_t> experiment_seeds(const pipeline::RunConfig& cfg, const std::string& task) {
    std::vector<std::uint64_t> seeds;
    const std::uint64_t base = derive_seed(pipeline::task_seed(cfg.seed, task), kSeeds);
    for (int i = 0; i < cfg.seeds; ++i) seeds.push_back(derive_seed(base, static_cast<std::uint64_t>(i)));
    return seeds;
}

const std::vector<double>& overfit_curve(const pipeline::Curves& curves) {
    return curves.test.empty() ? curves.validation : curves.test;
}

SeedRun run_seed(const pipeline::RunConfig& cfg, const data::TaskPreset& preset, pipeline::Phase1Result& phase1,
                 const device::FixedInput& fixed_input, std::uint64_t seed) {
    const pipeline::PipelineConfig pc = pipeline::pipeline_config(cfg, preset);
    const auto& spec = preset.spec;
    SeedRun run;
    run.seed = seed;

    const data::LabeledDataset target_data = data::gen_synthetic(spec, cfg.target_train_size, derive_seed(seed, kTargetData));
    const data::LabeledDataset test = data::gen_synthetic(spec, cfg.test_size, derive_seed(seed, kTestData));
    const data::LabeledDataset pool = data::gen_synthetic(spec, cfg.small_pool_size, derive_seed(seed, kSmallPool));

    Rng target_rng(derive_seed(seed, kTargetInit));
    nn::MlpModel target = nn::MlpModel::random(pc.topology, target_rng);
    nn::TrainConfig tc = cfg.target_train;
    tc.rng_seed = derive_seed(seed, kTargetTrain);
    pipeline::train_classifier(target, target_data, tc);
    const ConfusionMatrix target_cm = confusion_matrix(target, test);
    run.acc_target = accuracy(target, test);
    run.f1_target = f1_score(target_cm, default_averaging(target_cm.classes()));

    const pipeline::Phase1Fingerprint fp{fixed_input.digest(), phase1.pca.digest()};
    const codec::WeightsMatrix w = pipeline::run_phase2(phase1.ednn, phase1.pca, phase1.standardizer, target,
                                                        fixed_input, pc.device, fp, derive_seed(seed, kCapture));
    run.extraction_accuracy = ednn::ednn_accuracy(w, codec::coefficients_to_matrix(target), pc.tau);

    const nn::MlpModel init_only = codec::matrix_to_coefficients(w, pc.topology);
    const ConfusionMatrix init_cm = confusion_matrix(init_only, test);
    run.acc_init_only = accuracy(init_only, test);
    run.f1_init_only = f1_score(init_cm, default_averaging(init_cm.classes()));

    pipeline::FinetuneConfig fc = cfg.finetune;
    fc.rng_seed = derive_seed(seed, kFinetune);
    Rng fresh_rng(derive_seed(seed, kFreshInit));
    const nn::MlpModel fresh = nn::MlpModel::random(pc.topology, fresh_rng);

    for (const auto mode : cfg.modes) {
        ModeRun m;
        m.mode = mode;
        const data::LabeledDataset d_small = data::sample_dsmall(pool, preset.dsmall_size, mode, derive_seed(seed, kSmallDraw));
        m.class_counts = d_small.class_counts();
        m.skewed_class = d_small.skewed_class;
        m.small_only = score(pipeline::finetune(fresh, d_small, fc, &test, true), test);
        m.p2w = score(pipeline::run_phase3(w, pc.topology, d_small, fc, &test, true), test);
        run.modes.push_back(std::move(m));
    }
    return run;
}

pipeline::Phase1Result ensure_phase1(const pipeline::RunConfig& cfg, const data::TaskPreset& preset,
                                     const std::filesystem::path& task_dir, bool build_missing,
                                     device::FixedInput& fixed_input) {
    const std::string digest = cfg.digest();
    const std::string p1_digest = pipeline::phase1_digest(cfg, preset.spec.name);
    if (pipeline::has_phase1(task_dir) && pipeline::stored_phase1_digest(task_dir) == p1_digest) {
        log("phase1: loading artifacts from " + task_dir.string());
        return pipeline::load_phase1(task_dir, fixed_input);
    }
    if (!build_missing) {
        throw ValidationError("phase1: no artifacts for this config under " + task_dir.string() +
                              " (rerun with --build-missing)");
    }
    pipeline::PipelineConfig pc = pipeline::pipeline_config(cfg, preset);
    pc.on_epoch = [&](int epoch, double loss, double acc) {
        log("ednn: task=" + preset.spec.name + " epoch=" + std::to_string(epoch) + " loss=" + fmt(loss) +
            " val_acc=" + fmt(acc));
    };
    fixed_input = pipeline::phase_fixed_input(pc);
    log("phase1: task=" + preset.spec.name + " building with r=" + std::to_string(pc.r) +
        " chunks=" + std::to_string(cfg.chunks));
    pipeline::Phase1Result r = pipeline::run_phase1(pc, pipeline::public_chunks(cfg, preset), fixed_input);
    for (const auto& h : r.history) {
        log("phase1: task=" + preset.spec.name + " iteration=" + std::to_string(h.iteration) +
            " pairs=" + std::to_string(h.pairs) + " epochs=" + std::to_string(h.epochs) +
            " val_acc=" + fmt(h.validation_accuracy) + " test_acc=" + fmt(h.test_accuracy));
    }
    std::filesystem::create_directories(task_dir);
    Json cj = pipeline::to_json(cfg);
    cj["config_digest"] = digest;
    write_json(task_dir / "config.json", cj);
    pipeline::save_phase1(task_dir, r, fixed_input, digest, p1_digest);
    return r;
}

TaskReport run_experiment(const pipeline::RunConfig& cfg, const std::string& task, const std::filesystem::path& out,
                          bool build_missing) {
    const data::TaskPreset preset = data::task_preset(task);
    device::FixedInput fixed_input;
    pipeline::Phase1Result phase1 = ensure_phase1(cfg, preset, out / task, build_missing, fixed_input);
    TaskReport report;
    report.task = task;
    report.phase1 = phase1.history;
    report.phase1_reached_threshold = phase1.reached_threshold;
    for (const auto seed : experiment_seeds(cfg, task)) {
        report.seeds.push_back(run_seed(cfg, preset, phase1, fixed_input, seed));
        const auto& s = report.seeds.back();
        std::ostringstream line;
        line << "experiment: task=" << task << " seed=" << seed << " target=" << fmt(s.acc_target)
             << " init_only=" << fmt(s.acc_init_only) << " extraction=" << fmt(s.extraction_accuracy);
        for (const auto& m : s.modes) {
            line << ' ' << data::to_string(m.mode) << ".small_only=" << fmt(m.small_only.accuracy) << ' '
                 << data::to_string(m.mode) << ".p2w=" << fmt(m.p2w.accuracy);
        }
        log(line.str());
    }
    return report;
}

ExperimentReport run_experiments(const pipeline::RunConfig& cfg, const std::filesystem::path& out, bool build_missing) {
    ExperimentReport r;
    r.config_digest = cfg.digest();
    for (const auto& task : cfg.tasks) r.tasks.push_back(run_experiment(cfg, task, out, build_missing));
    return r;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size()));
    return s;
}

Json to_json(const ExperimentReport& r) {
    Json tasks = Json::array();
    for (const auto& t : r.tasks) {
        Json seeds = Json::array();
        for (const auto& s : t.seeds) {
            Json modes = Json::object();
            for (const auto& m : s.modes) {
                modes[data::to_string(m.mode)] = Json{{"class_counts", m.class_counts},
                                                      {"skewed_class", m.skewed_class ? Json(*m.skewed_class) : Json(nullptr)},
                                                      {"small_only", to_json(m.small_only)},
                                                      {"p2w", to_json(m.p2w)}};
            }
            seeds.push_back(Json{{"seed", s.seed},
                                 {"acc_target", s.acc_target},
                                 {"f1_target", s.f1_target},
                                 {"acc_init_only", s.acc_init_only},
                                 {"f1_init_only", s.f1_init_only},
                                 {"extraction_accuracy", s.extraction_accuracy},
                                 {"modes", modes}});
        }
        Json means = {{"acc_target", summary_json(summarize(collect(t, [](const SeedRun& s) { return s.acc_target; })))},
                      {"acc_init_only",
                       summary_json(summarize(collect(t, [](const SeedRun& s) { return s.acc_init_only; })))},
                      {"extraction_accuracy",
                       summary_json(summarize(collect(t, [](const SeedRun& s) { return s.extraction_accuracy; })))}};
        Json per_mode = Json::object();
        for (const auto mode : {data::SampleMode::Balanced, data::SampleMode::Imbalanced2x}) {
            if (t.seeds.empty() || !t.seeds.front().find(mode)) continue;
            auto field = [&](auto&& fn) {
                return summary_json(summarize(collect(t, [&](const SeedRun& s) { return fn(*s.find(mode)); })));
            };
            per_mode[data::to_string(mode)] = {
                {"acc_small_only", field([](const ModeRun& m) { return m.small_only.accuracy; })},
                {"acc_p2w", field([](const ModeRun& m) { return m.p2w.accuracy; })},
                {"f1_small_only", field([](const ModeRun& m) { return m.small_only.f1; })},
                {"f1_p2w", field([](const ModeRun& m) { return m.p2w.f1; })}};
        }
        means["modes"] = per_mode;
        if (per_mode.contains("balanced") && per_mode.contains("imbalanced2x")) {
            auto mean_of = [&](const char* mode, const char* key) {
                return per_mode.at(mode).at(key).at("mean").get<double>();
            };
            const double fs_b = mean_of("balanced", "f1_small_only"), fs_i = mean_of("imbalanced2x", "f1_small_only");
            const double fp_b = mean_of("balanced", "f1_p2w"), fp_i = mean_of("imbalanced2x", "f1_p2w");
            const double ap_b = mean_of("balanced", "acc_p2w"), ap_i = mean_of("imbalanced2x", "acc_p2w");
            means["imbalance_drop"] = {
                {"f1_small_only", {{"absolute", fs_b - fs_i}, {"relative", relative_drop(fs_b, fs_i)}}},
                {"f1_p2w", {{"absolute", fp_b - fp_i}, {"relative", relative_drop(fp_b, fp_i)}}},
                {"acc_p2w", {{"absolute", ap_b - ap_i}, {"relative", relative_drop(ap_b, ap_i)}}}};
        }
        Json phase1 = Json::array();
        for (const auto& h : t.phase1) phase1.push_back(pipeline::to_json(h));
        tasks.push_back(Json{{"task", t.task},
                             {"phase1", {{"reached_threshold", t.phase1_reached_threshold}, {"iterations", phase1}}},
                             {"means", means},
                             {"seeds", seeds}});
    }
    return Json{{"config_digest", r.config_digest}, {"tasks", tasks}};
}

void write_report(const std::filesystem::path& out, const ExperimentReport& r) {
    std::filesystem::create_directories(out);
    write_json(out / "report.json", to_json(r));

    std::ofstream summary(out / "summary.csv");
    summary << "config_digest,task,mode,seeds,acc_small_only_mean,acc_small_only_std,acc_init_only_mean,"
               "acc_init_only_std,acc_p2w_mean,acc_p2w_std,acc_target_mean,acc_target_std,f1_small_only_mean,"
               "f1_small_only_std,f1_p2w_mean,f1_p2w_std\n";
    summary << std::setprecision(6) << std::fixed;
    for (const auto& t : r.tasks) {
        if (t.seeds.empty()) continue;
        for (const auto& m0 : t.seeds.front().modes) {
            const auto mode = m0.mode;
            auto stat = [&](auto&& fn) {
                const Summary s = summarize(collect(t, fn));
                summary << ',' << s.mean << ',' << s.stddev;
            };
            summary << r.config_digest << ',' << t.task << ',' << data::to_string(mode) << ',' << t.seeds.size();
            stat([&](const SeedRun& s) { return s.find(mode)->small_only.accuracy; });
            stat([](const SeedRun& s) { return s.acc_init_only; });
            stat([&](const SeedRun& s) { return s.find(mode)->p2w.accuracy; });
            stat([](const SeedRun& s) { return s.acc_target; });
            stat([&](const SeedRun& s) { return s.find(mode)->small_only.f1; });
            stat([&](const SeedRun& s) { return s.find(mode)->p2w.f1; });
            summary << '\n';
        }
    }

    std::ofstream curves(out / "curves.csv");
    curves << "config_digest,task,seed,mode,variant,epoch,split,accuracy\n";
    curves << std::setprecision(6) << std::fixed;
    for (const auto& t : r.tasks) {
        for (const auto& s : t.seeds) {
            for (const auto& m : s.modes) {
                for (const auto& [variant, run] : {std::pair{"small_only", &m.small_only}, std::pair{"p2w", &m.p2w}}) {
                    for (const auto& [split, curve] :
                         {std::pair{"train", &run->curves.train}, std::pair{"validation", &run->curves.validation},
                          std::pair{"test", &run->curves.test}}) {
                        for (std::size_t e = 0; e < curve->size(); ++e) {
                            curves << r.config_digest << ',' << t.task << ',' << s.seed << ',' << data::to_string(m.mode)
                                   << ',' << variant << ',' << e << ',' << split << ',' << (*curve)[e] << '\n';
                        }
                    }
                }
            }
        }
    }
}

} // namespace p2w::eval
