#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "p2w/common/error.hpp"
#include "p2w/data/synthetic.hpp"
#include "p2w/eval/metrics.hpp"
#include "p2w/pipeline/config.hpp"
#include "p2w/pipeline/pipeline.hpp"

using namespace p2w;
using namespace p2w::pipeline;

namespace {

data::SyntheticTaskSpec tiny_task() {
    data::SyntheticTaskSpec s;
    s.name = "tiny";
    s.d = 3;
    s.C = 2;
    s.cluster_separation = 1.5;
    s.rng_seed = 21;
    return s;
}

// [3, 4, 1]: 21 MACs, enough trace samples for a 16-component PCA.
PipelineConfig tiny_config() {
    PipelineConfig c;
    c.topology.layer_sizes = {3, 4, 1};
    c.r = 20;
    c.pca_k = 16;
    c.theta = 1.1;
    c.surrogate_train.epochs = 5;
    c.ednn_train.epochs = 2;
    c.ednn_train.batch_size = 8;
    c.seed = 5;
    return c;
}

std::vector<data::LabeledDataset> tiny_chunks(int n) {
    return data::chunk(data::gen_synthetic(tiny_task(), 40 * n, 1), n);
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "p2w_pipeline_test" / name;
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("split_pairs is a 75/20/5 partition") {
    for (int n : {20, 100, 301}) {
        const auto s = split_pairs(n, 9);
        CHECK(s.train.size() == static_cast<std::size_t>(std::lround(0.75 * n)));
        CHECK(s.test.size() == static_cast<std::size_t>(std::lround(0.20 * n)));
        std::set<int> all(s.train.begin(), s.train.end());
        all.insert(s.test.begin(), s.test.end());
        all.insert(s.validation.begin(), s.validation.end());
        CHECK(all.size() == static_cast<std::size_t>(n));
        CHECK(s.train.size() + s.test.size() + s.validation.size() == static_cast<std::size_t>(n));
        CHECK(*all.rbegin() == n - 1);
    }
    CHECK(split_pairs(100, 9).train == split_pairs(100, 9).train);
    CHECK(split_pairs(100, 9).train != split_pairs(100, 10).train);
}

TEST_CASE("pair count is |sub| * r") {
    auto cfg = tiny_config();
    cfg.r = 3;
    const auto chunks = tiny_chunks(3);
    const auto fi = phase_fixed_input(cfg);
    const auto pairs = prepare_pairs(chunks, cfg.r, cfg, fi);
    CHECK(pairs.size() == 9);
    CHECK(pairs.traces.trace_count() == 9);
    CHECK(pairs.traces.trace_length == 21);
    const auto [rows, cols] = codec::matrix_shape(cfg.topology);
    CHECK(pairs.matrices.cols() == rows * cols);
    CHECK(pairs.fixed_input_digest == fi.digest());
    CHECK(prepare_pairs(chunks, cfg.r, cfg, fi).matrices == pairs.matrices);
    CHECK(prepare_pairs(chunks, cfg.r, cfg, fi, 2).matrices != pairs.matrices);
    CHECK_THROWS_AS(prepare_pairs({}, 3, cfg, fi), ValidationError);
}

TEST_CASE("theta zero stops after the first chunk") {
    auto cfg = tiny_config();
    cfg.theta = 0.0;
    const auto chunks = tiny_chunks(2);
    const auto r = run_phase1(cfg, chunks, phase_fixed_input(cfg));
    REQUIRE(r.history.size() == 1);
    CHECK(r.history[0].pairs == cfg.r);
    CHECK(r.history[0].epochs == 1);
    CHECK(r.reached_threshold);
    CHECK_FALSE(r.below_threshold());
}

TEST_CASE("an unreachable theta exhausts the chunks") {
    auto cfg = tiny_config();
    const auto one = run_phase1(cfg, tiny_chunks(1), phase_fixed_input(cfg));
    CHECK(one.history.size() == 1);
    CHECK(one.below_threshold());

    const auto two = run_phase1(cfg, tiny_chunks(2), phase_fixed_input(cfg));
    REQUIRE(two.history.size() == 2);
    CHECK(two.history[0].pairs == 20);
    CHECK(two.history[1].pairs == 40);
    CHECK(two.validation_curve.size() == 4);
    CHECK(two.below_threshold());
}

TEST_CASE("too few pairs for the PCA is reported") {
    auto cfg = tiny_config();
    cfg.r = 10;
    CHECK_THROWS_AS(run_phase1(cfg, tiny_chunks(1), phase_fixed_input(cfg)), ValidationError);
    cfg.initial_chunks = 2;
    CHECK_NOTHROW(run_phase1(cfg, tiny_chunks(2), phase_fixed_input(cfg)));
}

TEST_CASE("phase 2 guards and determinism") {
    auto cfg = tiny_config();
    const auto fi = phase_fixed_input(cfg);
    auto p1 = run_phase1(cfg, tiny_chunks(1), fi);
    const Phase1Fingerprint fp{fi.digest(), p1.pca.digest()};

    const auto zero = nn::MlpModel::zeros(cfg.topology);
    auto quiet = cfg.device;
    quiet.noise_sigma = 0.0;
    const auto m = run_phase2(p1.ednn, p1.pca, p1.standardizer, zero, fi, quiet, fp, 1);
    CHECK(std::pair{m.rows(), m.cols()} == codec::matrix_shape(cfg.topology));
    CHECK(m.entries.allFinite());

    Rng rng(3);
    const auto target = nn::MlpModel::random(cfg.topology, rng);
    const auto a = run_phase2(p1.ednn, p1.pca, p1.standardizer, target, fi, cfg.device, fp, 11);
    const auto b = run_phase2(p1.ednn, p1.pca, p1.standardizer, target, fi, cfg.device, fp, 11);
    CHECK(a.entries == b.entries);

    auto other = fi;
    other.values(0) += 0.25;
    CHECK_THROWS_AS(run_phase2(p1.ednn, p1.pca, p1.standardizer, target, other, cfg.device, fp, 11), ValidationError);
    const Phase1Fingerprint stale{fi.digest(), "0000"};
    CHECK_THROWS_AS(run_phase2(p1.ednn, p1.pca, p1.standardizer, target, fi, cfg.device, stale, 11), ValidationError);

    std::string msg;
    try {
        extract_from_trace(p1.ednn, p1.pca, p1.standardizer, std::vector<float>(22, 1.0f), cfg.topology);
    } catch (const ShapeError& e) {
        msg = e.what();
    }
    CHECK(msg.find("topology violation") != std::string::npos);

    nn::Topology wider = cfg.topology;
    wider.layer_sizes = {3, 5, 1};
    CHECK_THROWS_AS(extract_from_trace(p1.ednn, p1.pca, p1.standardizer, std::vector<float>(21, 1.0f), wider),
                    ValidationError);
}

TEST_CASE("phase-1 artifacts round trip") {
    auto cfg = tiny_config();
    auto fi = phase_fixed_input(cfg);
    auto p1 = run_phase1(cfg, tiny_chunks(1), fi);
    const auto dir = scratch("phase1");
    save_phase1(dir, p1, fi, "cfg", "p1");
    CHECK(has_phase1(dir));
    CHECK(stored_phase1_digest(dir) == "p1");
    device::FixedInput fi2;
    auto back = load_phase1(dir, fi2, true);
    CHECK(fi2.digest() == fi.digest());
    CHECK(back.pca.digest() == p1.pca.digest());
    CHECK(back.ednn.digest() == p1.ednn.digest());
    CHECK(back.history.size() == p1.history.size());
    CHECK(back.pairs.matrices == p1.pairs.matrices);
    CHECK(back.pairs.splits.test == p1.pairs.splits.test);
    CHECK(back.pairs.traces.trace_count() == p1.pairs.traces.trace_count());
    std::filesystem::remove_all(dir);
}

TEST_CASE("zero epochs returns the initial model") {
    auto cfg = tiny_config();
    Rng rng(4);
    const auto init = nn::MlpModel::random(cfg.topology, rng);
    const auto ds = data::gen_synthetic(tiny_task(), 30, 2);
    FinetuneConfig fc;
    fc.epochs_max = 0;
    const auto r = run_phase3(codec::coefficients_to_matrix(init), cfg.topology, ds, fc);
    CHECK(codec::coefficients_to_matrix(r.model).entries == codec::coefficients_to_matrix(init).entries);
    CHECK(r.curves.validation.size() == 1);
    CHECK(r.best_epoch == 0);
}

TEST_CASE("exact target coefficients keep the target's accuracy") {
    nn::Topology t;
    t.layer_sizes = {3, 8, 8, 1};
    const auto spec = tiny_task();
    Rng rng(6);
    auto target = nn::MlpModel::random(t, rng);
    nn::TrainConfig tc;
    tc.epochs = 40;
    tc.batch_size = 32;
    tc.learning_rate = 0.003;
    train_classifier(target, data::gen_synthetic(spec, 2000, 3), tc);
    const auto test = data::gen_synthetic(spec, 2000, 4);
    const double acc_target = eval::accuracy(target, test);

    const auto d_small = data::sample_dsmall(data::gen_synthetic(spec, 400, 5), 22, data::SampleMode::Balanced, 1);
    const auto r = run_phase3(codec::coefficients_to_matrix(target), t, d_small, FinetuneConfig{});
    CAPTURE(acc_target);
    CHECK(eval::accuracy(r.model, test) >= acc_target - 0.02);
}

TEST_CASE("fine-tuning rejects unusable D_small") {
    nn::Topology t;
    t.layer_sizes = {3, 4, 1};
    const auto init = nn::MlpModel::zeros(t);
    data::LabeledDataset empty;
    empty.class_count = 2;
    empty.samples.resize(0, 3);
    CHECK_THROWS_AS(finetune(init, empty, FinetuneConfig{}), ValidationError);

    auto single = data::gen_synthetic(tiny_task(), 10, 1);
    std::fill(single.labels.begin(), single.labels.end(), 1);
    CHECK_THROWS_AS(finetune(init, single, FinetuneConfig{}), ValidationError);

    const auto wrong_width = data::gen_synthetic(data::task_preset("eeg").spec, 20, 1);
    CHECK_THROWS_AS(finetune(init, wrong_width, FinetuneConfig{}), ValidationError);
}

TEST_CASE("early stopping restores the best validation checkpoint") {
    nn::Topology t;
    t.layer_sizes = {3, 8, 1};
    Rng rng(8);
    const auto init = nn::MlpModel::random(t, rng);
    const auto d_small = data::sample_dsmall(data::gen_synthetic(tiny_task(), 400, 6), 40, data::SampleMode::Balanced, 2);
    FinetuneConfig fc;
    fc.epochs_max = 60;
    fc.early_stop_patience = 4;
    fc.rng_seed = 3;
    const auto r = finetune(init, d_small, fc, nullptr, true);
    CHECK(r.curves.validation.size() == 61);
    const double best = *std::max_element(r.curves.validation.begin(), r.curves.validation.begin() + r.stop_epoch + 1);
    CHECK(r.curves.validation[static_cast<std::size_t>(r.best_epoch)] == best);
    if (r.stop_epoch < fc.epochs_max) CHECK(r.stop_epoch - r.best_epoch == fc.early_stop_patience);
}

}

TEST_SUITE("config") {

TEST_CASE("desk defaults validate and digest stably") {
    const auto c = desk_config();
    CHECK_NOTHROW(c.validate());
    CHECK(c.digest() == desk_config().digest());
    CHECK(run_config_from_json(to_json(c)).digest() == c.digest());
    auto d = c;
    d.tau = 0.06;
    CHECK(d.digest() != c.digest());
    CHECK_NOTHROW(paper_config().validate());
}

TEST_CASE("missing keys default, unknown keys fail") {
    const auto c = run_config_from_json(Json{{"scale", "desk"}, {"seed", 11}});
    CHECK(c.seed == 11);
    CHECK(c.r == desk_config().r);
    CHECK_THROWS_AS(run_config_from_json(Json{{"scale", "desk"}, {"sede", 11}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json(Json{{"scale", "huge"}}), ValidationError);
    CHECK_THROWS_AS(run_config_from_json(Json{{"scale", "desk"}, {"tau", -1.0}}), ValidationError);
}

TEST_CASE("phase-1 digest ignores the evaluation protocol") {
    auto c = desk_config();
    const auto base = phase1_digest(c, "eeg");
    c.seeds = 3;
    c.finetune.epochs_max = 7;
    CHECK(phase1_digest(c, "eeg") == base);
    c.r = 17;
    CHECK(phase1_digest(c, "eeg") != base);
    CHECK(phase1_digest(desk_config(), "sleep") != base);
}

}
