#include "hamlearn/objective.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hamlearn {

namespace {

// Writes dF/dy~ for one (j, t) row into `dfdy` and returns the row's loss.
double row_loss(LossKind kind, const Eigen::Ref<const Eigen::VectorXd>& model,
                const Eigen::Ref<const Eigen::VectorXd>& observed, Eigen::Ref<Eigen::VectorXd> dfdy, bool want_grad) {
    const Eigen::Index d = model.size();
    if (kind == LossKind::SquaredError) {
        double f = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double r = model[i] - observed[i];
            f += r * r;
            if (want_grad) dfdy[i] = 2.0 * r;
        }
        return f;
    }

    const double p_sum = observed.sum();
    if (!(p_sum > 0.0)) throw std::invalid_argument("KL loss: observed row sums to zero and cannot be renormalized");
    double q_sum = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) q_sum += std::max(model[i], kKlFloor);
    double f = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double p = observed[i] / p_sum;
        const double q = std::max(model[i], kKlFloor) / q_sum;
        if (p > 0.0) f += p * std::log(p / q);
        if (want_grad) dfdy[i] = model[i] > kKlFloor ? (1.0 - p / q) / q_sum : 0.0;
    }
    return f;
}

LossEvaluation evaluate_loss(const ModelSpec& spec, const Eigen::VectorXd& theta, const QuenchDataset& data,
                             LossKind kind, bool want_grad) {
    if (data.observed.size() != data.initial_states.size())
        throw std::invalid_argument("loss: dataset has inconsistent initial-state blocks");
    const SpectralDecomposition decomp = diagonalize(assemble_hamiltonian(spec, theta));
    const Eigen::MatrixXcd& v = decomp.eigenvectors;
    const Eigen::VectorXd& lambda = decomp.eigenvalues;
    const Eigen::Index d = decomp.dim();
    const auto nt = static_cast<Eigen::Index>(data.times.size());

    // Pair classification for the divided-difference kernel.
    const double delta = degeneracy_threshold(lambda);
    Eigen::MatrixXd gap(d, d);
    for (Eigen::Index n = 0; n < d; ++n)
        for (Eigen::Index m = 0; m < d; ++m) gap(m, n) = lambda[m] - lambda[n];

    LossEvaluation out;
    Eigen::MatrixXcd b_total;
    if (want_grad) b_total = Eigen::MatrixXcd::Zero(d, d);

    Eigen::MatrixXcd phase(d, nt);
    for (Eigen::Index k = 0; k < nt; ++k)
        for (Eigen::Index m = 0; m < d; ++m) phase(m, k) = std::polar(1.0, -lambda[m] * data.times[static_cast<std::size_t>(k)]);

    Eigen::VectorXd dfdy(d);
    for (std::size_t j = 0; j < data.initial_states.size(); ++j) {
        const Eigen::MatrixXd& y = data.observed[j];
        if (y.rows() != nt || y.cols() != d) throw std::invalid_argument("loss: observed block has wrong shape");
        const StateVector psi0 = initial_state(data.initial_states[j], spec.n_qubits());
        const Eigen::VectorXcd c = v.adjoint() * psi0.amplitudes();
        const Eigen::MatrixXcd psi = v * (phase.array().colwise() * c.array()).matrix();  // d x nt
        const Eigen::MatrixXd pops = psi.cwiseAbs2();

        Eigen::MatrixXcd r;
        if (want_grad) r.resize(d, nt);
        for (Eigen::Index k = 0; k < nt; ++k) {
            out.value += row_loss(kind, pops.col(k), y.row(k).transpose(), dfdy, want_grad);
            if (want_grad) r.col(k) = (2.0 * dfdy).cast<cplx>().cwiseProduct(psi.col(k));
        }
        if (!want_grad) continue;

        // grad_a = Re sum_mn conj(s_m) K_mn(t) c_n (V^dagger P_a V)_mn, with s = V^dagger r.
        const Eigen::MatrixXcd s = v.adjoint() * r;
        for (Eigen::Index k = 0; k < nt; ++k) {
            const double t = data.times[static_cast<std::size_t>(k)];
            const cplx minus_i_t(0.0, -t);
            for (Eigen::Index n = 0; n < d; ++n) {
                const cplx cn = c[n];
                const cplx en = phase(n, k);
                for (Eigen::Index m = 0; m < d; ++m) {
                    const double g = gap(m, n);
                    cplx kmn;
                    if (std::abs(g) <= delta) {
                        kmn = minus_i_t * phase(m, k);
                    } else if (std::abs(g * t) < 1e-3) {
                        const double x = 0.5 * g * t;
                        const double x2 = x * x;
                        kmn = minus_i_t * std::polar(1.0 - x2 / 6.0 * (1.0 - x2 / 20.0),
                                                     -0.5 * (lambda[m] + lambda[n]) * t);
                    } else {
                        kmn = (phase(m, k) - en) / g;
                    }
                    b_total(m, n) += std::conj(s(m, k)) * kmn * cn;
                }
            }
        }
    }

    if (want_grad) {
        // sum_mn B_mn (V^dagger P V)_mn = tr(V B^T V^dagger P)
        const Eigen::MatrixXcd m = v * b_total.transpose() * v.adjoint();
        out.gradient.resize(static_cast<Eigen::Index>(spec.n_params()));
        for (std::size_t a = 0; a < spec.n_params(); ++a) {
            const PauliString& p = spec.parameterized_terms()[a];
            const std::uint64_t flip = p.flip_mask();
            cplx tr = 0.0;
            for (Eigen::Index row = 0; row < d; ++row) {
                const auto col = static_cast<std::uint64_t>(row);
                tr += m(row, static_cast<Eigen::Index>(col ^ flip)) * p.phase(col);
            }
            out.gradient[static_cast<Eigen::Index>(a)] = tr.real();
        }
    }
    return out;
}

}  // namespace

LossEvaluation loss_and_grad(const ModelSpec& spec, const Eigen::VectorXd& theta, const QuenchDataset& data,
                             LossKind kind) {
    return evaluate_loss(spec, theta, data, kind, true);
}

double loss_value(const ModelSpec& spec, const Eigen::VectorXd& theta, const QuenchDataset& data, LossKind kind) {
    return evaluate_loss(spec, theta, data, kind, false).value;
}

Eigen::VectorXd finite_diff_grad(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& theta,
                                 double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be > 0");
    Eigen::VectorXd g(theta.size());
    Eigen::VectorXd x = theta;
    for (Eigen::Index a = 0; a < theta.size(); ++a) {
        x[a] = theta[a] + h;
        const double fp = f(x);
        x[a] = theta[a] - h;
        const double fm = f(x);
        x[a] = theta[a];
        g[a] = (fp - fm) / (2.0 * h);
    }
    return g;
}

Eigen::VectorXd finite_diff_grad(const ModelSpec& spec, const Eigen::VectorXd& theta, const QuenchDataset& data,
                                 LossKind kind, double h) {
    return finite_diff_grad([&](const Eigen::VectorXd& x) { return loss_value(spec, x, data, kind); }, theta, h);
}

Objective::Objective(const ProblemInstance& problem)
    : value_([&problem](const Eigen::VectorXd& x) {
          return loss_value(problem.spec, x, problem.dataset, problem.loss_kind);
      }),
      grad_([&problem](const Eigen::VectorXd& x) {
          return loss_and_grad(problem.spec, x, problem.dataset, problem.loss_kind);
      }),
      n_params_(problem.spec.n_params()) {}

Objective::Objective(ValueFn value, GradFn grad, std::size_t n_params)
    : value_(std::move(value)), grad_(std::move(grad)), n_params_(n_params) {}

LossEvaluation Objective::evaluate(const Eigen::VectorXd& theta) {
    if (static_cast<std::size_t>(theta.size()) != n_params_)
        throw std::invalid_argument("Objective: expected " + std::to_string(n_params_) + " parameters");
    ++gradient_calls_;
    if (!theta.allFinite())
        return {std::numeric_limits<double>::infinity(),
                Eigen::VectorXd::Constant(theta.size(), std::numeric_limits<double>::quiet_NaN())};
    return grad_(theta);
}

double Objective::value(const Eigen::VectorXd& theta) {
    if (static_cast<std::size_t>(theta.size()) != n_params_)
        throw std::invalid_argument("Objective: expected " + std::to_string(n_params_) + " parameters");
    ++value_calls_;
    if (!theta.allFinite()) return std::numeric_limits<double>::infinity();
    return value_(theta);
}

Objective quadratic_objective(const Eigen::VectorXd& center) {
    return Objective([center](const Eigen::VectorXd& x) { return (x - center).squaredNorm(); },
                     [center](const Eigen::VectorXd& x) {
                         return LossEvaluation{(x - center).squaredNorm(), 2.0 * (x - center)};
                     },
                     static_cast<std::size_t>(center.size()));
}

}  // namespace hamlearn
