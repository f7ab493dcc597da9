#pragma once

#include "hamlearn/checkpoint.hpp"
#include "hamlearn/config.hpp"
#include "hamlearn/stats.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hamlearn {

/// Test instance seeds: derive_seed(seed, test, i).
std::vector<ProblemInstance> test_problems(const ExperimentConfig& config, std::size_t n);

/// FNV-1a 64 hash of an instance's JSON document, as 16 hex digits.
std::string instance_hash(const ProblemInstance& p);

/// One optimizer run; the LSTM path needs `checkpoint`. Failures are padded
/// and flagged like divergences instead of propagating.
Trajectory run_optimizer(const OptimizerSpec& opt, const Checkpoint* checkpoint, const ProblemInstance& problem,
                         std::size_t T);

struct GenResult {
    std::vector<std::string> files;
    nlohmann::json manifest;
};

/// Writes datasets/instance_NNNN.json and manifest.json under `out`.
GenResult cmd_gen(const ExperimentConfig& config, const std::filesystem::path& out);

struct TrainOptions {
    bool resume = false;  // continue from out/train_state.json
    bool timing = false;  // also write train_timing.csv
};

/// Writes checkpoint.json (best weights), train_state.json, train_log.csv
/// and config_echo.json under `out`.
TrainResult cmd_train(const ExperimentConfig& config, const std::filesystem::path& out, const TrainOptions& options = {});

struct OptimizerResult {
    std::string label;
    std::vector<std::vector<double>> losses;  // [instance][iteration], T + 1 entries each
    std::vector<double> final_losses;
    std::vector<double> mean_curve;
    std::vector<Interval> ci;
    std::vector<double> mean_log10_curve;
    std::vector<double> mean_delta_theta2;  // per parameter
    std::vector<bool> diverged;
    std::size_t n_diverged = 0;
    Summary summary;
    Histogram histogram;
    double mean_gradient_calls = 0.0;
    double mean_value_calls = 0.0;
    std::string instances_hash;
};

struct BenchResult {
    std::vector<std::uint64_t> seeds;
    std::vector<OptimizerResult> optimizers;
};

/// Overrides the learning rate of every optimizer whose kind has a row
/// flagged best in a sweep.csv written by cmd_sweep.
void apply_best_eta(ExperimentConfig& config, const std::filesystem::path& sweep_csv);

/// Runs every optimizer on the same n_test_problems instances and writes
/// curves.csv, final_losses.csv, delta_theta.csv, summary.json and
/// config_echo.json under `out`.
BenchResult cmd_bench(const ExperimentConfig& config, const std::filesystem::path& out);

/// Same as cmd_bench on caller-supplied instances.
BenchResult cmd_bench(const ExperimentConfig& config, const std::vector<ProblemInstance>& problems,
                      const std::filesystem::path& out);

/// Writes sweep.csv and sweep_curves.csv under `out`.
SweepTable cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& out);

/// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double x);

}  // namespace hamlearn
