#pragma once

// Independent reference implementations used as test oracles.

#include "hamlearn/dataset.hpp"
#include "hamlearn/lstm.hpp"
#include "hamlearn/model.hpp"
#include "hamlearn/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using hamlearn::cplx;

inline Eigen::Matrix2cd pauli_matrix(char letter) {
    Eigen::Matrix2cd m;
    switch (letter) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("bad letter");
    }
    return m;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Leftmost letter is the most significant tensor factor.
inline Eigen::MatrixXcd kron_pauli(const std::string& letters) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
    for (char c : letters) m = kron(m, pauli_matrix(c));
    return m;
}

inline Eigen::MatrixXcd kron_hamiltonian(const hamlearn::ModelSpec& spec, const Eigen::VectorXd& theta) {
    const auto d = static_cast<Eigen::Index>(spec.dim());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t a = 0; a < spec.n_params(); ++a)
        h += theta[static_cast<Eigen::Index>(a)] * kron_pauli(spec.parameterized_terms()[a].str());
    for (const auto& f : spec.fixed_terms()) h += f.coefficient * kron_pauli(f.op.str());
    return h;
}

/// Symmetric product formula: each step applies exp(-i c P dt/2) for every
/// term in order, then again in reverse order. exp(-i x P) = cos x - i sin x P.
inline Eigen::MatrixXd trotter_populations(const hamlearn::ModelSpec& spec, const Eigen::VectorXd& theta,
                                           const Eigen::VectorXcd& psi0, const std::vector<double>& times,
                                           double step) {
    std::vector<Eigen::MatrixXcd> factors;
    std::vector<double> coeffs;
    for (std::size_t a = 0; a < spec.n_params(); ++a) {
        factors.push_back(kron_pauli(spec.parameterized_terms()[a].str()));
        coeffs.push_back(theta[static_cast<Eigen::Index>(a)]);
    }
    for (const auto& f : spec.fixed_terms()) {
        factors.push_back(kron_pauli(f.op.str()));
        coeffs.push_back(f.coefficient);
    }
    const auto d = psi0.size();
    auto half_step = [&](std::size_t k, double dt) {
        const double x = coeffs[k] * dt / 2.0;
        return Eigen::MatrixXcd(std::cos(x) * Eigen::MatrixXcd::Identity(d, d) - cplx(0, std::sin(x)) * factors[k]);
    };
    Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), d);
    Eigen::VectorXcd psi = psi0;
    double t_now = 0.0;
    for (std::size_t r = 0; r < times.size(); ++r) {
        const double span = times[r] - t_now;
        const auto n = static_cast<std::size_t>(std::ceil(span / step - 1e-9));
        if (n > 0) {
            const double dt = span / static_cast<double>(n);
            Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(d, d);
            for (std::size_t k = 0; k < factors.size(); ++k) u = half_step(k, dt) * u;
            for (std::size_t k = factors.size(); k-- > 0;) u = half_step(k, dt) * u;
            for (std::size_t s = 0; s < n; ++s) psi = u * psi;
        }
        t_now = times[r];
        out.row(static_cast<Eigen::Index>(r)) = psi.cwiseAbs2().transpose();
    }
    return out;
}

inline Eigen::VectorXd uniform_theta(std::size_t n, hamlearn::Rng& rng, double lo = 1.0, double hi = 2.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = u(rng);
    return v;
}

inline std::vector<std::size_t> random_permutation(std::size_t n, hamlearn::Rng& rng) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

/// Largest per-component |a - b| / max(|b|, floor).
inline double max_rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor = 1e-8) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), floor));
    return worst;
}

/// Small sampling options that keep unit tests fast.
inline hamlearn::SamplingOptions small_sampling(std::size_t n_times = 12, double t_max = 3.0) {
    hamlearn::SamplingOptions o;
    o.n_times = n_times;
    o.t_max = t_max;
    return o;
}

/// Meta-loss of an unroll that feeds the LSTM a fixed sequence of gradients,
/// so the loss depends on phi only through the updates and recurrent state.
inline double frozen_meta_loss(const hamlearn::LstmWeights& w, const hamlearn::MetaOptConfig& cfg,
                               const Eigen::VectorXd& theta0, const std::vector<Eigen::VectorXd>& grads,
                               const std::function<double(const Eigen::VectorXd&)>& f) {
    hamlearn::LstmState state = hamlearn::LstmState::zeros(static_cast<std::size_t>(theta0.size()), cfg);
    Eigen::VectorXd theta = theta0;
    double total = 0.0;
    for (const auto& g : grads) {
        hamlearn::LstmStepResult step = hamlearn::lstm_step(w, cfg, state, g);
        state = std::move(step.state);
        theta += step.update;
        total += f(theta);
    }
    return total;
}

}  // namespace oracle
