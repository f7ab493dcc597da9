#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace hamlearn {

/// Loss above which a run counts as diverged.
inline constexpr double kDivergenceThreshold = 1e6;

/// Iterates theta^(0..T) and their losses, as produced by any optimizer.
///
/// `gradients[k]` is the gradient the optimizer saw at theta^(k) for
/// k < T; `final_gradient` is the one at theta^(T) when it was evaluated.
/// Derivative-free methods leave both empty.
struct Trajectory {
    std::vector<Eigen::VectorXd> thetas;
    std::vector<double> losses;
    std::vector<Eigen::VectorXd> gradients;
    Eigen::VectorXd final_gradient;

    std::size_t gradient_calls = 0;
    std::size_t value_calls = 0;
    std::size_t fallback_steps = 0;  // L-BFGS line-search failures
    bool diverged = false;
    std::size_t diverged_at = 0;     // first iteration padded after divergence

    std::size_t steps() const noexcept { return thetas.empty() ? 0 : thetas.size() - 1; }
    double final_loss() const { return losses.back(); }
};

/// Truncates after a non-finite or exploding loss at iteration `k` and pads
/// with the last finite iterate up to T.
void pad_diverged(Trajectory& traj, std::size_t k, std::size_t T);

inline bool is_divergent(double f) noexcept {
    return !(f <= kDivergenceThreshold);
}

}  // namespace hamlearn
