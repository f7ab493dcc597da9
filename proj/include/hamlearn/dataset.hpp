#pragma once

#include "hamlearn/model.hpp"
#include "hamlearn/rng.hpp"
#include "hamlearn/spectral.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace hamlearn {

/// Noisy populations y[j](t, i) for initial state j, time index t, basis state i.
struct QuenchDataset {
    std::vector<double> times;
    std::vector<InitialState> initial_states;
    std::vector<Eigen::MatrixXd> observed;  // one (n_times x dim) block per initial state
    double noise_sigma = 0.0;
};

/// `n` equally spaced times covering [0, t_max] including both endpoints.
std::vector<double> default_time_grid(std::size_t n = 50, double t_max = 10.0);

inline const std::vector<InitialState> kDefaultInitialStates{InitialState::AllPlusX, InitialState::AllZeroZ};

/// Exact populations at theta_true plus i.i.d. N(0, sigma^2) noise, clipped to [0, 1].
QuenchDataset generate_dataset(const ModelSpec& spec, const Eigen::VectorXd& theta_true, std::vector<double> times,
                               double sigma, Rng& rng,
                               const std::vector<InitialState>& states = kDefaultInitialStates);

enum class LossKind { SquaredError, KL };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct ProblemInstance {
    ModelSpec spec;
    Eigen::VectorXd theta_true;
    QuenchDataset dataset;
    Eigen::VectorXd theta_init;
    LossKind loss_kind = LossKind::SquaredError;
    std::uint64_t rng_seed = 0;
};

struct SamplingOptions {
    double sigma = 0.001;
    double sigma_in = 0.1;
    double param_lo = 1.0;
    double param_hi = 2.0;
    std::size_t n_times = 50;
    double t_max = 10.0;
    std::vector<InitialState> initial_states = kDefaultInitialStates;
    LossKind loss_kind = LossKind::SquaredError;
};

/// theta* ~ U(lo, hi) i.i.d., theta0 ~ N(theta*, sigma_in^2 I), then the
/// dataset, all drawn from one generator seeded with `seed`.
ProblemInstance sample_problem(const ModelSpec& spec, std::uint64_t seed, const SamplingOptions& opts = {});

/// Same instance with parameters relabeled (new index a holds old index perm[a]).
ProblemInstance permute_problem(const ProblemInstance& p, const std::vector<std::size_t>& perm);

// JSON document: {model_kind, n_qubits, times, sigma, seed, theta_true,
// theta_init, initial_states, loss_kind, observed[j][t][i]}.
nlohmann::json problem_to_json(const ProblemInstance& p);
ProblemInstance problem_from_json(const nlohmann::json& doc);

}  // namespace hamlearn
