#include "p2w/pipeline/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "p2w/common/error.hpp"
#include "p2w/common/rng.hpp"
#include "p2w/eval/metrics.hpp"

namespace p2w::pipeline {

namespace {

Eigen::MatrixXd gather(const Eigen::MatrixXd& m, std::span<const int> rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

void check_compatible(const nn::MlpModel& model, const data::LabeledDataset& ds, const char* what) {
    if (ds.features() != model.topology.input_width()) {
        throw ValidationError(std::string(what) + " '" + ds.name + "' has " + std::to_string(ds.features()) +
                              " features, topology expects " + std::to_string(model.topology.input_width()));
    }
    if (ds.class_count != model.topology.class_count()) {
        throw ValidationError(std::string(what) + " '" + ds.name + "' has " + std::to_string(ds.class_count) +
                              " classes, topology expects " + std::to_string(model.topology.class_count()));
    }
}

// One pass over `order` in mini-batches; `order` is reshuffled first.
void run_epoch(nn::MlpModel& model, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::vector<int>& order,
               int batch_size, nn::GradientOptimizer& opt, Rng& shuffle_rng, Rng& dropout_rng) {
    shuffle_rng.shuffle(std::span<int>(order));
    Rng* drop = model.topology.dropout_rate > 0.0 ? &dropout_rng : nullptr;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::span<const int> idx(order.data() + start,
                                       std::min<std::size_t>(static_cast<std::size_t>(batch_size), order.size() - start));
        const auto grads = nn::mlp_backward(model, gather(x, idx), gather(y, idx), nn::Loss::CrossEntropy, drop);
        const auto params = model.parameter_blocks();
        const auto g = grads.blocks();
        opt.step(params, g);
    }
}

// Mean cross-entropy of the model's predictions.
double mean_cross_entropy(const nn::MlpModel& model, const data::LabeledDataset& ds) {
    const Eigen::MatrixXd p = nn::mlp_predict(model, ds.samples);
    constexpr double kFloor = 1e-12;
    double sum = 0.0;
    for (int i = 0; i < ds.size(); ++i) {
        const int y = ds.labels[static_cast<std::size_t>(i)];
        const double py = p.cols() == 1 ? (y == 1 ? p(i, 0) : 1.0 - p(i, 0)) : p(i, y);
        sum -= std::log(std::max(py, kFloor));
    }
    return sum / ds.size();
}

} // namespace

double train_classifier(nn::MlpModel& model, const data::LabeledDataset& dataset, const nn::TrainConfig& cfg) {
    cfg.validate();
    dataset.validate();
    check_compatible(model, dataset, "training set");
    const Eigen::MatrixXd targets = dataset.targets(model.topology.output_width());
    std::vector<int> order(static_cast<std::size_t>(dataset.size()));
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(cfg.rng_seed, 1));
    Rng dropout_rng(derive_seed(cfg.rng_seed, 2));
    nn::GradientOptimizer opt(cfg);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        run_epoch(model, dataset.samples, targets, order, cfg.batch_size, opt, shuffle_rng, dropout_rng);
    }
    return eval::accuracy(model, dataset);
}

nn::TrainConfig default_surrogate_training() {
    nn::TrainConfig c;
    c.epochs = 150;
    c.batch_size = 16;
    c.learning_rate = 0.003;
    c.optimizer = nn::Optimizer::Adam;
    return c;
}

void FinetuneConfig::validate() const {
    if (epochs_max < 0) throw ValidationError("finetune: epochs_max must be >= 0");
    if (!(learning_rate > 0.0)) throw ValidationError("finetune: learning_rate must be positive");
    if (early_stop_patience < 1 || lr_halve_patience < 1) {
        throw ValidationError("finetune: patience values must be >= 1");
    }
    if (batch_size < 1) throw ValidationError("finetune: batch_size must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ValidationError("finetune: validation_fraction must lie in (0, 1)");
    }
}

Json to_json(const FinetuneConfig& c) {
    return Json{{"epochs_max", c.epochs_max},
                {"learning_rate", c.learning_rate},
                {"early_stop_patience", c.early_stop_patience},
                {"lr_halve_patience", c.lr_halve_patience},
                {"batch_size", c.batch_size},
                {"validation_fraction", c.validation_fraction},
                {"rng_seed", c.rng_seed}};
}

FinetuneConfig finetune_config_from_json(const Json& j) {
    FinetuneConfig c;
    c.epochs_max = j.value("epochs_max", c.epochs_max);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    c.lr_halve_patience = j.value("lr_halve_patience", c.lr_halve_patience);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.rng_seed = j.value("rng_seed", c.rng_seed);
    c.validate();
    return c;
}

FinetuneResult finetune(const nn::MlpModel& init, const data::LabeledDataset& d_small, const FinetuneConfig& cfg,
                        const data::LabeledDataset* monitor, bool full_budget) {
    cfg.validate();
    init.validate();
    if (d_small.size() == 0) throw ValidationError("finetune: D_small is empty");
    const auto counts = d_small.class_counts();
    if (std::count_if(counts.begin(), counts.end(), [](int n) { return n > 0; }) < 2) {
        throw ValidationError("finetune: D_small holds a single class, too little data to fine-tune");
    }
    d_small.validate();
    check_compatible(init, d_small, "D_small");
    if (monitor) check_compatible(init, *monitor, "monitor set");

    auto [train_rows, val_rows] = data::stratified_split(d_small, 1.0 - cfg.validation_fraction,
                                                         derive_seed(cfg.rng_seed, 3));
    const data::LabeledDataset train = d_small.subset(train_rows, "/train");
    const data::LabeledDataset val = d_small.subset(val_rows, "/validation");
    const Eigen::MatrixXd targets = train.targets(init.topology.output_width());

    nn::TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.batch_size = cfg.batch_size;
    nn::GradientOptimizer opt(tc);
    Rng shuffle_rng(derive_seed(cfg.rng_seed, 1));
    Rng dropout_rng(derive_seed(cfg.rng_seed, 2));

    FinetuneResult result{init, {}, 0, cfg.epochs_max};
    nn::MlpModel model = init;
    auto record = [&] {
        result.curves.train.push_back(eval::accuracy(model, train));
        result.curves.validation.push_back(eval::accuracy(model, val));
        if (monitor) result.curves.test.push_back(eval::accuracy(model, *monitor));
    };
    record();
    double best = result.curves.validation.back();
    double best_loss = mean_cross_entropy(model, val);
    int since_best = 0;
    int since_halve = 0;
    bool stopped = false;

    std::vector<int> order(static_cast<std::size_t>(train.size()));
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 1; epoch <= cfg.epochs_max; ++epoch) {
        if (stopped && !full_budget) break;
        run_epoch(model, train.samples, targets, order, cfg.batch_size, opt, shuffle_rng, dropout_rng);
        record();
        if (stopped) continue;
        // Higher validation accuracy wins; a tie goes to the lower validation loss.
        const double acc = result.curves.validation.back();
        const double loss = mean_cross_entropy(model, val);
        if (acc > best || (acc == best && loss < best_loss)) {
            best = acc;
            best_loss = loss;
            since_best = 0;
            since_halve = 0;
            result.model = model;
            result.best_epoch = epoch;
        } else {
            ++since_best;
            if (++since_halve >= cfg.lr_halve_patience) {
                opt.set_learning_rate(opt.learning_rate() * 0.5);
                since_halve = 0;
            }
            if (since_best >= cfg.early_stop_patience) {
                stopped = true;
                result.stop_epoch = epoch;
            }
        }
    }
    return result;
}

FinetuneResult run_phase3(const codec::WeightsMatrix& matrix, const nn::Topology& topology,
                          const data::LabeledDataset& d_small, const FinetuneConfig& cfg,
                          const data::LabeledDataset* monitor, bool full_budget) {
    const auto [rows, cols] = codec::matrix_shape(topology);
    if (matrix.rows() != rows || matrix.cols() != cols) {
        throw ShapeError("phase 3: extracted matrix is " + std::to_string(matrix.rows()) + "x" +
                         std::to_string(matrix.cols()) + ", topology needs " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    }
    return finetune(codec::matrix_to_coefficients(matrix, topology), d_small, cfg, monitor, full_budget);
}

} // namespace p2w::pipeline
