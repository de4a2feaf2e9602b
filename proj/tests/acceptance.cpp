// Acceptance gate: one PASS/FAIL line per criterion. Criteria 5 to 9 run the desk experiment
// (seed 7) twice through the p2w binary, into <work>/A and <work>/B.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "p2w/codec/weights_matrix.hpp"
#include "p2w/common/json_io.hpp"
#include "p2w/pipeline/config.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace p2w;

namespace {

int failures = 0;

void verdict(int n, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

std::string fmt(double v, int digits = 3) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

// Per-task details are joined with "; "; drop the trailing one.
std::string joined(std::string s) {
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "; ") == 0) s.resize(s.size() - 2);
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool run_experiment(const fs::path& out) {
    fs::remove_all(out);
    fs::create_directories(out);
    const std::string cmd = std::string(P2W_BINARY) + " experiment --scale desk --seed 7 --out " + out.string() +
                            " 2> " + (out / "log.txt").string();
    std::cerr << "running: " << cmd << std::endl;
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
}

void numerics() {
    bool pass = true;
    std::string detail;
    for (auto kind : {nn::LayerKind::Dense, nn::LayerKind::Conv1D, nn::LayerKind::ConvTranspose1D,
                      nn::LayerKind::Activation, nn::LayerKind::Dropout, nn::LayerKind::Reshape}) {
        const auto t = oracle::gradcheck_layer(kind, 100, 0xacc0 + static_cast<int>(kind), 1e-4);
        pass = pass && t.ok();
        detail += nn::to_string(kind) + " " + std::to_string(t.passed) + "/" + std::to_string(t.instances) + ", ";
    }
    const auto mlp = oracle::gradcheck_mlp(100, 0xacc9, 1e-4);
    pass = pass && mlp.ok();
    const double adam = std::max(oracle::adam_max_deviation(100, 2, 0xacca), oracle::adam_max_deviation(20, 500, 0xaccb));
    pass = pass && adam <= 1e-10;
    verdict(1, pass, "gradchecks (rel err < 1e-4): " + detail + "mlp " + std::to_string(mlp.passed) + "/" +
                         std::to_string(mlp.instances) + "; adam max deviation " + sci(adam));
}

void oracles() {
    const auto pca = oracle::pca_eigen_check(20, 0xacd0, 1e-8);
    const auto f1 = oracle::macro_f1_check(100, 0xacd1);
    verdict(2, pca.ok() && f1.ok(),
            "PCA eigenvalues within 1e-8: " + std::to_string(pca.passed) + "/20 (worst " + sci(pca.worst) +
                "); macro F1 exact: " + std::to_string(f1.passed) + "/100");
}

void codec_law() {
    const auto rt = oracle::codec_round_trip_check(1000, 0xace0);
    nn::Topology fig;
    fig.layer_sizes = {2, 3, 3, 1};
    const auto shape = codec::matrix_shape(fig);
    verdict(3, rt.ok() && shape == std::pair{7, 4},
            "bit-exact round trips " + std::to_string(rt.passed) + "/1000; matrix_shape([2,3,3,1]) = (" +
                std::to_string(shape.first) + "," + std::to_string(shape.second) + ")");
}

void device_law() {
    const auto len = oracle::trace_length_check(200, 0xacf0);
    const auto loc = oracle::locality_check(300, 0xacf1);
    // The criterion asks that nothing but the perturbed slot moves. Hidden-layer coefficients also
    // change the next layer's activations, which leak as MAC operands, so that can only hold when
    // the perturbation stays out of every downstream operand word.
    verdict(4, len.ok() && loc.slots.ok() && loc.strictly_local == loc.slots.instances,
            "trace-length law " + std::to_string(len.passed) + "/200; single-slot change " +
                std::to_string(loc.strictly_local) + "/" + std::to_string(loc.slots.instances) +
                " (output layer " + std::to_string(loc.output_layer_local) + "/" +
                std::to_string(loc.output_layer_cases) + ", " + std::to_string(loc.propagated) +
                " hidden-layer cases moved downstream operand slots; leakage oracle agreement " +
                std::to_string(loc.slots.passed) + "/" + std::to_string(loc.slots.instances) + ")");
}

double mean_at(const Json& task, const char* mode, const char* key) {
    return task.at("means").at("modes").at(mode).at(key).at("mean").get<double>();
}

void phase1_gate(const Json& report, const fs::path& run) {
    const auto cfg = pipeline::desk_config();
    bool pass = true;
    std::string detail;
    for (const auto& t : report.at("tasks")) {
        const std::string name = t.at("task").get<std::string>();
        const bool reached = t.at("phase1").at("reached_threshold").get<bool>();
        double best = 0.0;
        for (const auto& it : t.at("phase1").at("iterations")) best = std::max(best, it.at("validation_accuracy").get<double>());
        device::FixedInput fi;
        const auto p1 = pipeline::load_phase1(run / name, fi, true);
        const double ceiling = oracle::hamming_decoder_ceiling(p1.pairs.matrices,
                                                               codec::coefficient_mask(p1.pairs.topology), cfg.tau,
                                                               cfg.device.fixed_point_bits, cfg.device.fraction_bits);
        pass = pass && reached;
        detail += name + " val " + fmt(best) + (reached ? " reached" : " below") + " (HW-only decoder ceiling " +
                  fmt(ceiling) + "); ";
    }
    verdict(5, pass && report.at("tasks").size() == 3, "theta 0.85: " + joined(detail));
}

void transfer(const Json& report) {
    bool pass = true;
    std::string detail;
    for (const auto& t : report.at("tasks")) {
        const double small = mean_at(t, "balanced", "acc_small_only");
        const double p2w = mean_at(t, "balanced", "acc_p2w");
        const double init = t.at("means").at("acc_init_only").at("mean").get<double>();
        const double target = t.at("means").at("acc_target").at("mean").get<double>();
        const bool ok = t.at("seeds").size() == 20 && small <= 0.55 && init >= 0.60 * target && p2w >= small + 0.30 &&
                        p2w >= target - 0.10;
        pass = pass && ok;
        detail += t.at("task").get<std::string>() + " small " + fmt(small) + " init " + fmt(init) + " p2w " + fmt(p2w) +
                  " target " + fmt(target) + (ok ? "" : " (fails)") + "; ";
    }
    verdict(6, pass, joined(detail));
}

void overfitting(const Json& report) {
    bool pass = true;
    std::string detail;
    for (const auto& t : report.at("tasks")) {
        int hits = 0;
        for (const auto& s : t.at("seeds")) {
            const auto& m = s.at("modes").at("balanced");
            const Json& so = m.at("small_only").at("overfit_epoch");
            const Json& pw = m.at("p2w").at("overfit_epoch");
            if (!so.is_null() && (pw.is_null() || pw.get<int>() > so.get<int>())) ++hits;
        }
        const int n = static_cast<int>(t.at("seeds").size());
        pass = pass && n == 20 && hits >= 15;
        detail += t.at("task").get<std::string>() + " " + std::to_string(hits) + "/" + std::to_string(n) + "; ";
    }
    verdict(7, pass, "seeds with small-only overfitting and P2W not earlier (need >= 15/20): " + joined(detail));
}

void imbalance(const Json& report) {
    bool pass = true;
    std::string detail;
    for (const auto& t : report.at("tasks")) {
        const auto& drop = t.at("means").at("imbalance_drop");
        const double f1_small = drop.at("f1_small_only").at("absolute").get<double>();
        const double f1_p2w = drop.at("f1_p2w").at("absolute").get<double>();
        const double acc_p2w = drop.at("acc_p2w").at("absolute").get<double>();
        const bool ok = f1_small > f1_p2w && acc_p2w <= 0.10;
        pass = pass && ok;
        detail += t.at("task").get<std::string>() + " F1 drop small " + fmt(f1_small) + " vs p2w " + fmt(f1_p2w) +
                  ", p2w acc drop " + fmt(acc_p2w) + (ok ? "" : " (fails)") + "; ";
    }
    verdict(8, pass, joined(detail));
}

} // namespace

int main(int argc, char** argv) {
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::current_path() / "acceptance_runs";

    numerics();
    oracles();
    codec_law();
    device_law();

    const fs::path a = work / "A", b = work / "B";
    const bool ran_a = run_experiment(a);
    if (!ran_a) {
        for (int n : {5, 6, 7, 8, 9}) verdict(n, false, "experiment run failed, see " + (a / "log.txt").string());
        return 1;
    }
    const Json report = read_json(a / "report.json");
    phase1_gate(report, a);
    transfer(report);
    overfitting(report);
    imbalance(report);

    const bool ran_b = run_experiment(b);
    const bool same = ran_b && slurp(a / "report.json") == slurp(b / "report.json");
    verdict(9, same, ran_b ? std::string("report.json ") + (same ? "byte-identical" : "differs") + " across two fresh runs"
                           : "second run failed");
    return failures == 0 ? 0 : 1;
}
