#include "hamlearn/trajectory.hpp"

namespace hamlearn {

void pad_diverged(Trajectory& traj, std::size_t k, std::size_t T) {
    traj.diverged = true;
    traj.diverged_at = k;
    traj.final_gradient.resize(0);
    while (traj.thetas.size() < T + 1) {
        traj.thetas.push_back(traj.thetas.back());
        traj.losses.push_back(traj.losses.back());
    }
}

}  // namespace hamlearn
