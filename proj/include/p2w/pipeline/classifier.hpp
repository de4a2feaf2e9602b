#pragma once

#include <cstdint>
#include <vector>

#include "p2w/codec/weights_matrix.hpp"
#include "p2w/data/dataset.hpp"
#include "p2w/nn/mlp.hpp"
#include "p2w/nn/optim.hpp"

namespace p2w::pipeline {

/// Plain mini-batch training with cross-entropy; dropout follows the topology's rate.
/// Returns the final training-set accuracy.
double train_classifier(nn::MlpModel& model, const data::LabeledDataset& dataset, const nn::TrainConfig& cfg);

/// Surrogate defaults: 150 epochs, batch 16, learning rate 0.003, Adam.
nn::TrainConfig default_surrogate_training();

struct FinetuneConfig {
    int epochs_max = 100;
    double learning_rate = 0.005;
    int early_stop_patience = 10;
    int lr_halve_patience = 5;
    int batch_size = 8;
    /// Share of D_small held out (stratified) for validation.
    double validation_fraction = 0.2;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

Json to_json(const FinetuneConfig& c);
FinetuneConfig finetune_config_from_json(const Json& j);

/// Per-epoch accuracies. Index 0 is the starting model, before any update.
struct Curves {
    std::vector<double> train;
    std::vector<double> validation;
    std::vector<double> test; // empty unless a monitor set was supplied
};

struct FinetuneResult {
    nn::MlpModel model; // best validation checkpoint up to the early-stop point
    Curves curves;
    int best_epoch = 0;
    int stop_epoch = 0; // epoch at which early stopping fired, epochs_max when it never did
};

/// Cross-entropy + Adam from `init`. Validation accuracy drives early stopping (restoring the
/// best checkpoint) and learning-rate halving. With `full_budget`, training continues to
/// epochs_max after the stop point so the curves span the whole budget; the returned model is
/// unaffected. `monitor` (optional) is scored every epoch into curves.test.
FinetuneResult finetune(const nn::MlpModel& init, const data::LabeledDataset& d_small, const FinetuneConfig& cfg,
                        const data::LabeledDataset* monitor = nullptr, bool full_budget = false);

/// Phase 3: initialise from the extracted matrix, then fine-tune on D_small.
FinetuneResult run_phase3(const codec::WeightsMatrix& matrix, const nn::Topology& topology,
                          const data::LabeledDataset& d_small, const FinetuneConfig& cfg,
                          const data::LabeledDataset* monitor = nullptr, bool full_budget = false);

} // namespace p2w::pipeline
