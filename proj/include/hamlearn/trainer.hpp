#pragma once

#include "hamlearn/checkpoint.hpp"
#include "hamlearn/dataset.hpp"
#include "hamlearn/lstm.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hamlearn {

struct TrainConfig {
    std::size_t epochs = 10000;
    std::size_t T = 100;
    SamplingOptions sampling;  // sigma, sigma_in, parameter range, time grid, loss kind
    ModelKind model = ModelKind::TFIM;
    std::size_t n_qubits = 4;
    std::size_t validate_every = 100;
    std::size_t n_validation_problems = 32;
    double meta_lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 1.0;          // <= 0 disables clipping
    std::size_t truncation = 0;      // 0 = full unroll, otherwise BPTT window length
    MetaOptConfig meta;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const;
};

nlohmann::json train_config_to_json(const TrainConfig& c);

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double meta_loss = 0.0;
    bool finite = true;
    bool clipped = false;
    double grad_norm = 0.0;
    std::uint64_t problem_seed = 0;
    std::optional<double> val_mean_final;
    std::optional<double> val_mean_trajectory;
    double seconds = 0.0;
};

struct TrainLog {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;  // 0 = initial weights
    double best_validation = 0.0;
    std::vector<std::uint64_t> validation_seeds;
    std::size_t clip_events = 0;
    std::size_t nonfinite_epochs = 0;
};

struct ValidationSummary {
    double mean_final = 0.0;
    double mean_trajectory = 0.0;  // mean over problems of sum_{k=1}^T f / T
};

/// Forward unrolls only; diverged runs keep their padded losses.
ValidationSummary validate(const LstmWeights& weights, const MetaOptConfig& config,
                           const std::vector<ProblemInstance>& problems, std::size_t T, std::size_t threads = 1);

/// Adam state for phi plus everything needed to continue a run.
struct TrainState {
    LstmWeights weights;
    Eigen::VectorXd adam_m;
    Eigen::VectorXd adam_v;
    std::size_t step = 0;
    std::size_t epochs_done = 0;
    LstmWeights best_weights;
    std::size_t best_epoch = 0;
    double best_validation = 0.0;
};

struct TrainResult {
    Checkpoint best;
    TrainLog log;
    TrainState state;
};

/// Problem seed for training epoch `epoch` (1-based).
std::uint64_t training_problem_seed(std::uint64_t seed, std::size_t epoch);
/// Held-out problems derived from seed + 1.
std::vector<ProblemInstance> validation_problems(const TrainConfig& config);

/// One sampled problem per epoch: unroll T steps, backpropagate, one Adam
/// update of phi. Validates every validate_every epochs
/// (and after the last epoch) and returns the weights with the lowest
/// validation mean final loss. Aborts if more than 10% of epochs are
/// non-finite. `resume` continues a previous run's epoch numbering.
TrainResult meta_train(const TrainConfig& config, const std::optional<TrainState>& resume = std::nullopt,
                       const std::function<void(const EpochRecord&)>& on_epoch = {});

nlohmann::json train_state_to_json(const TrainState& s, const MetaOptConfig& config);
TrainState train_state_from_json(const nlohmann::json& doc, const MetaOptConfig& config);

}  // namespace hamlearn
