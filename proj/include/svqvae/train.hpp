#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "svqvae/dataset.hpp"
#include "svqvae/model.hpp"

namespace svqvae {

struct EpochRecord {
    std::size_t epoch = 0;
    LossTerms loss;          // per-term means over the epoch's samples
    double perplexity = 0.0; // from training-pass nearest-code assignments
    double wall_seconds = 0.0;
    std::optional<double> eval_mse;
    std::optional<double> eval_accuracy;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    Model model;
    AdamState adam;
    TrainHistory history;
};

// Deterministic batch partition for one epoch: a seeded permutation of
// 0..n-1 chopped into batch_size chunks, keeping a short final batch.
std::vector<std::vector<std::size_t>> make_epoch_batches(std::size_t n, std::size_t batch_size,
                                                         Rng& rng);

// Full training loop. Emits one machine-parseable progress line per epoch to
// `log` when given. eval_ds, when present, adds held-out MSE/accuracy to the
// history (not to the progress line).
TrainResult train(const ModelConfig& config, const Dataset& train_ds, const Dataset* eval_ds,
                  Rng& rng, std::ostream* log);

// Checkpoints are single JSON documents; doubles are printed in shortest
// round-trip form so save/load is bit-exact.
inline constexpr int kCheckpointFormatVersion = 1;

void save_checkpoint(const Model& model, const AdamState* adam, const std::string& path);

struct Checkpoint {
    Model model;
    std::optional<AdamState> adam;
};

Checkpoint load_checkpoint(const std::string& path);

void write_history_csv(const TrainHistory& history, const std::string& path);

}  // namespace svqvae
