#include "hamlearn/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace hamlearn {

SpectralDecomposition diagonalize(const Eigen::MatrixXcd& hamiltonian) {
    if (hamiltonian.rows() != hamiltonian.cols())
        throw std::invalid_argument("diagonalize: matrix is not square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hamiltonian);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("diagonalize: eigendecomposition did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

StateVector::StateVector(Eigen::VectorXcd amplitudes) : amps_(std::move(amplitudes)) {
    if (amps_.size() == 0) throw std::invalid_argument("StateVector: empty");
    if (std::abs(amps_.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("StateVector: state is not normalized");
}

std::string to_string(InitialState s) {
    return s == InitialState::AllPlusX ? "X" : "Z";
}

InitialState parse_initial_state(std::string_view name) {
    if (name == "X" || name == "AllPlusX" || name == "x") return InitialState::AllPlusX;
    if (name == "Z" || name == "AllZeroZ" || name == "z") return InitialState::AllZeroZ;
    throw std::invalid_argument("unknown initial state: " + std::string(name));
}

StateVector initial_state(InitialState kind, std::size_t n_qubits) {
    if (n_qubits == 0) throw std::invalid_argument("initial_state: n_qubits must be >= 1");
    const auto d = static_cast<Eigen::Index>(std::size_t{1} << n_qubits);
    if (kind == InitialState::AllZeroZ) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d);
        v[0] = 1.0;
        return StateVector(std::move(v));
    }
    return StateVector(Eigen::VectorXcd::Constant(d, cplx(std::pow(2.0, -0.5 * static_cast<double>(n_qubits)), 0.0)));
}

namespace {

Eigen::VectorXcd phases(const Eigen::VectorXd& lambda, double t) {
    Eigen::VectorXcd e(lambda.size());
    for (Eigen::Index m = 0; m < lambda.size(); ++m) e[m] = std::polar(1.0, -lambda[m] * t);
    return e;
}

}  // namespace

Eigen::VectorXcd evolve_state(const SpectralDecomposition& decomp, const Eigen::VectorXcd& psi, double t) {
    if (psi.size() != decomp.dim()) throw std::invalid_argument("evolve_state: dimension mismatch");
    const Eigen::VectorXcd c = decomp.eigenvectors.adjoint() * psi;
    return decomp.eigenvectors * phases(decomp.eigenvalues, t).cwiseProduct(c);
}

Eigen::MatrixXcd propagator(const SpectralDecomposition& decomp, double t) {
    const auto& v = decomp.eigenvectors;
    return v * phases(decomp.eigenvalues, t).asDiagonal() * v.adjoint();
}

Eigen::MatrixXd evolve_populations(const SpectralDecomposition& decomp, const StateVector& state0,
                                   std::span<const double> times) {
    if (state0.dim() != decomp.dim()) throw std::invalid_argument("evolve_populations: dimension mismatch");
    const Eigen::Index d = decomp.dim();
    const auto nt = static_cast<Eigen::Index>(times.size());
    const Eigen::VectorXcd c = decomp.eigenvectors.adjoint() * state0.amplitudes();
    Eigen::MatrixXcd coeffs(d, nt);
    for (Eigen::Index k = 0; k < nt; ++k) coeffs.col(k) = phases(decomp.eigenvalues, times[k]).cwiseProduct(c);
    const Eigen::MatrixXcd psi = decomp.eigenvectors * coeffs;
    return psi.cwiseAbs2().transpose();
}

Eigen::MatrixXd evolve_populations(const ModelSpec& spec, const Eigen::VectorXd& theta, const StateVector& state0,
                                   std::span<const double> times) {
    if (static_cast<std::size_t>(state0.dim()) != spec.dim())
        throw std::invalid_argument("evolve_populations: state dimension does not match model");
    return evolve_populations(diagonalize(assemble_hamiltonian(spec, theta)), state0, times);
}

double degeneracy_threshold(const Eigen::VectorXd& eigenvalues) {
    const double scale = eigenvalues.size() > 0 ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    return 1e-10 * std::max(1.0, scale);
}

Eigen::MatrixXcd derivative_kernel(const Eigen::VectorXd& lambda, double t) {
    const Eigen::Index d = lambda.size();
    const double delta = degeneracy_threshold(lambda);
    const Eigen::VectorXcd e = phases(lambda, t);
    const cplx minus_i_t(0.0, -t);
    Eigen::MatrixXcd k(d, d);
    for (Eigen::Index n = 0; n < d; ++n) {
        for (Eigen::Index m = 0; m < d; ++m) {
            const double gap = lambda[m] - lambda[n];
            if (std::abs(gap) <= delta) {
                k(m, n) = minus_i_t * e[m];
            } else if (std::abs(gap * t) < 1e-3) {
                // -i t e^{-i t mean} sinc(gap t / 2); the difference quotient cancels here.
                const double x = 0.5 * gap * t;
                const double x2 = x * x;
                const double sinc = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
                k(m, n) = minus_i_t * std::polar(sinc, -0.5 * (lambda[m] + lambda[n]) * t);
            } else {
                k(m, n) = (e[m] - e[n]) / gap;
            }
        }
    }
    return k;
}

Eigen::MatrixXcd to_eigenbasis(const SpectralDecomposition& decomp, const PauliString& term) {
    const auto& v = decomp.eigenvectors;
    if (static_cast<Eigen::Index>(term.dim()) != v.rows())
        throw std::invalid_argument("to_eigenbasis: term dimension does not match decomposition");
    // (P V)_{r,:} = P_{r, r^flip} V_{r^flip,:}
    Eigen::MatrixXcd pv(v.rows(), v.cols());
    const std::uint64_t flip = term.flip_mask();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        const auto src = static_cast<std::uint64_t>(r) ^ flip;
        pv.row(r) = term.phase(src) * v.row(static_cast<Eigen::Index>(src));
    }
    return v.adjoint() * pv;
}

Eigen::MatrixXcd propagator_derivative(const SpectralDecomposition& decomp, const PauliString& term, double t) {
    const auto& v = decomp.eigenvectors;
    const Eigen::MatrixXcd inner = derivative_kernel(decomp.eigenvalues, t).cwiseProduct(to_eigenbasis(decomp, term));
    return v * inner * v.adjoint();
}

}  // namespace hamlearn
