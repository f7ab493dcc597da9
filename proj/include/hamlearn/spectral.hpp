#pragma once

#include "hamlearn/model.hpp"
#include "hamlearn/pauli.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>

namespace hamlearn {

/// H = V diag(eigenvalues) V^dagger with eigenvalues ascending.
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;

    Eigen::Index dim() const noexcept { return eigenvalues.size(); }
};

/// Throws std::runtime_error if the eigensolver does not converge.
SpectralDecomposition diagonalize(const Eigen::MatrixXcd& hamiltonian);

/// Normalized pure state.
class StateVector {
public:
    explicit StateVector(Eigen::VectorXcd amplitudes);

    const Eigen::VectorXcd& amplitudes() const noexcept { return amps_; }
    Eigen::Index dim() const noexcept { return amps_.size(); }

private:
    Eigen::VectorXcd amps_;
};

enum class InitialState { AllPlusX, AllZeroZ };

std::string to_string(InitialState s);
InitialState parse_initial_state(std::string_view name);

/// AllZeroZ is |0...0>, AllPlusX is |+...+> (every amplitude 2^{-N/2}).
StateVector initial_state(InitialState kind, std::size_t n_qubits);

/// exp(-i H t) |psi>.
Eigen::VectorXcd evolve_state(const SpectralDecomposition& decomp, const Eigen::VectorXcd& psi, double t);

/// exp(-i H t) as a dense matrix.
Eigen::MatrixXcd propagator(const SpectralDecomposition& decomp, double t);

/// Row k holds |<i| exp(-i H(theta) t_k) |psi0>|^2 over basis states i.
Eigen::MatrixXd evolve_populations(const ModelSpec& spec, const Eigen::VectorXd& theta, const StateVector& state0,
                                   std::span<const double> times);

/// Same, reusing an existing decomposition of H(theta).
Eigen::MatrixXd evolve_populations(const SpectralDecomposition& decomp, const StateVector& state0,
                                   std::span<const double> times);

/// Divided-difference kernel K_mn = (e^{-i l_m t} - e^{-i l_n t}) / (l_m - l_n),
/// with the diagonal limit -i t e^{-i l_m t} for (near-)degenerate pairs.
Eigen::MatrixXcd derivative_kernel(const Eigen::VectorXd& eigenvalues, double t);

/// Degeneracy threshold 1e-10 * max(1, max|lambda|).
double degeneracy_threshold(const Eigen::VectorXd& eigenvalues);

/// d exp(-i H t) / d theta_a for H depending linearly on theta_a through `term`:
/// V [K o (V^dagger P_a V)] V^dagger.
Eigen::MatrixXcd propagator_derivative(const SpectralDecomposition& decomp, const PauliString& term, double t);

/// V^dagger P V, computed from the signed-permutation structure of P.
Eigen::MatrixXcd to_eigenbasis(const SpectralDecomposition& decomp, const PauliString& term);

}  // namespace hamlearn
