#pragma once

#include "hamlearn/objective.hpp"
#include "hamlearn/rng.hpp"
#include "hamlearn/trajectory.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace hamlearn {

enum class Preprocess { Raw, LogSign };

std::string to_string(Preprocess p);
Preprocess parse_preprocess(std::string_view name);

struct MetaOptConfig {
    std::size_t hidden_size = 20;
    std::size_t n_layers = 2;
    Preprocess preprocess = Preprocess::LogSign;
    double logsign_p = 10.0;
    double output_scale = 1.0;

    std::size_t input_dim() const noexcept { return preprocess == Preprocess::Raw ? 1 : 2; }
    void validate() const;
};

/// Gate blocks are stacked as [input; forget; cell; output], each hidden_size rows.
struct LstmLayer {
    Eigen::MatrixXd w_in;   // 4H x input
    Eigen::MatrixXd w_rec;  // 4H x H
    Eigen::VectorXd bias;   // 4H
};

/// Shared weights of the coordinate-wise meta-optimizer. Also used as the
/// container for dL/dphi.
struct LstmWeights {
    std::vector<LstmLayer> layers;
    Eigen::VectorXd readout;  // H
    double readout_bias = 0.0;

    static LstmWeights zeros(const MetaOptConfig& config);

    std::size_t size() const;
    Eigen::VectorXd flatten() const;
    void assign(const Eigen::VectorXd& flat);
    bool all_finite() const;
    /// Throws std::invalid_argument if shapes do not match `config`.
    void check_shape(const MetaOptConfig& config) const;
};

/// Gate weights ~ U(-s, s) with s = 1/sqrt(H), forget bias 1, other biases 0,
/// readout ~ 0.01 * U(-s, s), readout bias 0.
LstmWeights init_weights(const MetaOptConfig& config, Rng& rng);

/// Raw: (g). LogSign(p): (log|g| / p, sign g) if |g| >= e^{-p}, else (-1, e^p g).
Eigen::VectorXd preprocess_gradient(double g, const MetaOptConfig& config);

struct CoordinateState {
    std::vector<Eigen::VectorXd> h;  // per layer
    std::vector<Eigen::VectorXd> c;
};

struct LstmState {
    std::vector<CoordinateState> coords;

    static LstmState zeros(std::size_t n_coords, const MetaOptConfig& config);
    std::size_t n_coords() const noexcept { return coords.size(); }
};

/// Activations of one LSTM cell, kept for the backward pass.
struct CellRecord {
    Eigen::VectorXd x, h_prev, c_prev;
    Eigen::VectorXd i, f, g, o, c, tanh_c;
};

/// tape[a][layer] for one step.
using StepTape = std::vector<std::vector<CellRecord>>;

struct LstmStepResult {
    Eigen::VectorXd update;
    LstmState state;
};

/// One meta-optimizer step: every coordinate runs the same stacked LSTM on
/// its own preprocessed gradient and hidden state. Throws on a non-finite
/// gradient entry, naming the coordinate.
LstmStepResult lstm_step(const LstmWeights& weights, const MetaOptConfig& config, const LstmState& state,
                         const Eigen::VectorXd& grad, StepTape* tape = nullptr);

enum class DivergencePolicy { Throw, Pad };

struct UnrollOptions {
    bool record_tape = true;
    DivergencePolicy on_divergence = DivergencePolicy::Throw;
};

struct Unroll {
    Trajectory trajectory;
    std::vector<StepTape> tape;  // one per step k = 0..T-1
};

/// T meta-optimizer steps from the problem's theta^(0) with a zero state.
Unroll unroll_forward(const LstmWeights& weights, const MetaOptConfig& config, const Eigen::VectorXd& theta0,
                      Objective& objective, std::size_t T, const UnrollOptions& options = {});

/// dL/dphi for L = sum_{k=1}^T f(theta^(k)). Gradients of f enter as
/// constants, so the only dependence on phi is through the updates and the
/// recurrent state.
///
/// With truncation = W > 0 the unroll is cut into windows of W steps; each
/// window only sees its own losses and no gradient crosses a window boundary.
LstmWeights unroll_backward(const LstmWeights& weights, const MetaOptConfig& config, const Unroll& unroll,
                            std::size_t truncation = 0);

/// sum_{k=1}^T f(theta^(k)).
double meta_loss(const Trajectory& traj);

}  // namespace hamlearn
