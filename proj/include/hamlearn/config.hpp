#pragma once

#include "hamlearn/baselines.hpp"
#include "hamlearn/dataset.hpp"
#include "hamlearn/lstm.hpp"
#include "hamlearn/trainer.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hamlearn {

/// One entry of the benchmark's optimizer list.
struct OptimizerSpec {
    bool is_lstm = false;
    BaselineConfig baseline;  // unused for the LSTM
    std::string label;        // e.g. "lstm", "adam(0.03)"
};

OptimizerSpec parse_optimizer(std::string_view kind);
std::string default_label(const OptimizerSpec& spec);

/// Everything one experiment needs; parsed from a TOML file. Tables:
/// top level (seed, threads), [model], [data], [lstm], [train], [gen],
/// [bench] with [[bench.optimizers]], and [sweep].
struct ExperimentConfig {
    ModelKind model = ModelKind::TFIM;
    std::size_t n_qubits = 4;
    SamplingOptions sampling;
    MetaOptConfig lstm;

    // [train]
    std::size_t epochs = 10000;
    std::size_t train_T = 100;
    std::size_t validate_every = 100;
    std::size_t n_validation_problems = 32;
    double meta_lr = 1e-3;
    double clip_norm = 1.0;
    std::size_t truncation = 0;

    // [gen]
    std::size_t gen_problems = 0;  // 0 = n_test_problems

    // [bench]
    std::size_t n_test_problems = 300;
    std::size_t T = 100;
    std::vector<OptimizerSpec> optimizers;
    std::string checkpoint;
    std::size_t bootstrap_resamples = 1000;
    double ci_level = 0.95;
    std::size_t histogram_bins = 30;

    // [sweep]
    BaselineKind sweep_kind = BaselineKind::Adam;
    std::vector<double> sweep_etas{0.001, 0.003, 0.01, 0.03, 0.1};
    std::size_t sweep_problems = 0;  // 0 = n_test_problems

    std::uint64_t seed = 0;
    std::size_t threads = 1;

    TrainConfig train_config() const;
    void validate() const;
};

/// Default optimizer list: lstm, adam(0.03), sgd(0.001), lbfgs, nelder-mead.
std::vector<OptimizerSpec> default_optimizers();

ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::string& path);

/// Effective configuration, written next to every output.
nlohmann::json config_to_json(const ExperimentConfig& c);

}  // namespace hamlearn
