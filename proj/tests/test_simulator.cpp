#include "doctest.h"

#include "oracles.hpp"

#include "hamlearn/model.hpp"
#include "hamlearn/pauli.hpp"
#include "hamlearn/spectral.hpp"

#include <stdexcept>

using namespace hamlearn;

namespace {

const std::vector<ModelKind> kKinds{ModelKind::TFIM, ModelKind::AllToAllIsing, ModelKind::XY};

std::string random_letters(std::size_t n, Rng& rng) {
    static const char letters[] = "IXYZ";
    std::uniform_int_distribution<int> pick(0, 3);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += letters[pick(rng)];
    return s;
}

}  // namespace

TEST_CASE("pauli strings match the Kronecker product") {
    Rng rng(11);
    for (std::size_t n = 1; n <= 4; ++n)
        for (int rep = 0; rep < 25; ++rep) {
            const std::string s = random_letters(n, rng);
            const PauliString p(s);
            const Eigen::MatrixXcd ref = oracle::kron_pauli(s);
            CHECK((p.dense() - ref).norm() == 0.0);
            for (std::uint64_t col = 0; col < p.dim(); ++col)
                CHECK(p.phase(col) == ref(static_cast<Eigen::Index>(col ^ p.flip_mask()), static_cast<Eigen::Index>(col)));
        }
}

TEST_CASE("pauli string validation") {
    CHECK_THROWS_AS(PauliString("XQ"), std::invalid_argument);
    CHECK_THROWS_AS(PauliString(""), std::invalid_argument);
    CHECK_THROWS_AS(PauliString::pair(3, 1, 'X', 1, 'X'), std::invalid_argument);
    CHECK(PauliString("III").is_identity());
    CHECK(PauliString::pair(4, 0, 'X', 3, 'X').str() == "XIIX");
}

TEST_CASE("model term lists") {
    const ModelSpec tfim = build_model(ModelKind::TFIM, 4);
    std::vector<std::string> names;
    for (const auto& t : tfim.parameterized_terms()) names.push_back(t.str());
    CHECK(names == std::vector<std::string>{"XXII", "IXXI", "IIXX", "XIIX", "ZIII", "IZII", "IIZI", "IIIZ"});
    CHECK(tfim.fixed_terms().empty());

    const ModelSpec ising = build_model(ModelKind::AllToAllIsing, 4);
    CHECK(ising.n_params() == 10);
    CHECK(ising.parameterized_terms()[0].str() == "XXII");
    CHECK(ising.parameterized_terms()[5].str() == "IIXX");
    CHECK(ising.parameterized_terms()[6].str() == "ZIII");

    const ModelSpec xy = build_model(ModelKind::XY, 4);
    CHECK(xy.n_params() == 8);
    CHECK(xy.parameterized_terms()[4].str() == "YYII");
    REQUIRE(xy.fixed_terms().size() == 4);
    for (const auto& f : xy.fixed_terms()) CHECK(f.coefficient == 1.0);

    CHECK(build_model(ModelKind::TFIM, 7).n_params() == 14);
    CHECK_THROWS_AS(build_model(ModelKind::TFIM, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_model(ModelKind::XY, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_model(ModelKind::AllToAllIsing, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_model(ModelKind::TFIM, 13), std::invalid_argument);
    CHECK_THROWS_AS(parse_model_kind("heisenberg"), std::invalid_argument);
}

TEST_CASE("hamiltonian assembly") {
    const ModelSpec spec = build_model(ModelKind::TFIM, 3);
    Eigen::VectorXd theta(6);
    theta << 0, 0, 0, 1, 1, 1;
    const Eigen::MatrixXcd h = assemble_hamiltonian(spec, theta);
    Eigen::VectorXd diag(8);
    diag << 3, 1, 1, -1, 1, -1, -1, -3;
    CHECK((h - Eigen::MatrixXcd(diag.cast<cplx>().asDiagonal())).norm() == 0.0);
    CHECK(assemble_hamiltonian(spec, Eigen::VectorXd::Zero(6)).norm() == 0.0);
    CHECK_THROWS_AS(assemble_hamiltonian(spec, Eigen::VectorXd::Zero(5)), std::invalid_argument);

    Rng rng(3);
    for (ModelKind kind : kKinds)
        for (std::size_t n : {3u, 4u}) {
            const ModelSpec s = build_model(kind, n);
            const Eigen::VectorXd th = oracle::uniform_theta(s.n_params(), rng);
            const Eigen::MatrixXcd hh = assemble_hamiltonian(s, th);
            CHECK((hh - oracle::kron_hamiltonian(s, th)).norm() < 1e-12);
            CHECK((hh - hh.adjoint()).norm() == 0.0);
        }
}

TEST_CASE("relabeling parameters leaves the hamiltonian bitwise unchanged") {
    Rng rng(5);
    for (ModelKind kind : kKinds)
        for (int rep = 0; rep < 20; ++rep) {
            const ModelSpec s = build_model(kind, 4);
            const Eigen::VectorXd th = oracle::uniform_theta(s.n_params(), rng);
            const auto perm = oracle::random_permutation(s.n_params(), rng);
            Eigen::VectorXd th_p(th.size());
            for (std::size_t a = 0; a < perm.size(); ++a) th_p[static_cast<Eigen::Index>(a)] = th[static_cast<Eigen::Index>(perm[a])];
            const ModelSpec sp = permute_parameters(s, perm);
            CHECK(assemble_hamiltonian(sp, th_p) == assemble_hamiltonian(s, th));
        }
}

TEST_CASE("initial states") {
    CHECK(initial_state(InitialState::AllZeroZ, 2).amplitudes() == Eigen::Vector4cd(1, 0, 0, 0));
    const auto plus2 = initial_state(InitialState::AllPlusX, 2).amplitudes();
    for (auto a : plus2) CHECK(a == cplx(0.5, 0.0));
    const auto plus4 = initial_state(InitialState::AllPlusX, 4).amplitudes();
    CHECK(plus4.size() == 16);
    for (auto a : plus4) CHECK(a == cplx(0.25, 0.0));
    CHECK(plus4.norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(StateVector(Eigen::Vector2cd(1, 1)), std::invalid_argument);
    CHECK(parse_initial_state("X") == InitialState::AllPlusX);
    CHECK_THROWS(parse_initial_state("Q"));
}

TEST_CASE("spectral decomposition and propagator") {
    Rng rng(8);
    for (ModelKind kind : kKinds) {
        const ModelSpec s = build_model(kind, 3);
        const Eigen::VectorXd th = oracle::uniform_theta(s.n_params(), rng);
        const Eigen::MatrixXcd h = assemble_hamiltonian(s, th);
        const SpectralDecomposition d = diagonalize(h);
        for (Eigen::Index i = 1; i < d.dim(); ++i) CHECK(d.eigenvalues[i - 1] <= d.eigenvalues[i]);
        const Eigen::MatrixXcd rebuilt =
            d.eigenvectors * d.eigenvalues.cast<cplx>().asDiagonal() * d.eigenvectors.adjoint();
        CHECK((rebuilt - h).norm() < 1e-12);
        for (double t : {0.0, 0.3, 2.5, 10.0}) {
            const Eigen::MatrixXcd u = propagator(d, t);
            CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-12);
        }
        CHECK((propagator(d, 0.0) - Eigen::MatrixXcd::Identity(8, 8)).norm() < 1e-14);
    }
}

TEST_CASE("populations") {
    Rng rng(9);
    const std::vector<double> times{0.0, 0.7, 1.9, 5.0};
    for (ModelKind kind : kKinds) {
        const ModelSpec s = build_model(kind, 3);
        const Eigen::VectorXd th = oracle::uniform_theta(s.n_params(), rng);
        for (InitialState st : {InitialState::AllPlusX, InitialState::AllZeroZ}) {
            const StateVector psi0 = initial_state(st, 3);
            const Eigen::MatrixXd pop = evolve_populations(s, th, psi0, times);
            for (Eigen::Index r = 0; r < pop.rows(); ++r) {
                CHECK(pop.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(pop.row(r).minCoeff() >= 0.0);
            }
            CHECK((pop.row(0).transpose() - psi0.amplitudes().cwiseAbs2()).norm() < 1e-14);
            const Eigen::MatrixXd ref = oracle::trotter_populations(s, th, psi0.amplitudes(), times, 1e-4);
            CHECK((pop - ref).cwiseAbs().maxCoeff() < 1e-6);
        }
    }

    // A single Z rotation leaves |+> populations at one half.
    const ModelSpec z1(ModelKind::Custom, 1, {PauliString("Z")});
    Eigen::VectorXd b(1);
    b << 1.7;
    const Eigen::MatrixXd pop = evolve_populations(z1, b, initial_state(InitialState::AllPlusX, 1), times);
    CHECK((pop.array() - 0.5).abs().maxCoeff() < 1e-15);
}

TEST_CASE("derivative kernel") {
    Eigen::VectorXd one(1);
    one << 0.8;
    const double t = 1.3;
    const Eigen::MatrixXcd k = derivative_kernel(one, t);
    CHECK(std::abs(k(0, 0) - cplx(0, -t) * std::exp(cplx(0, -0.8 * t))) < 1e-15);

    // Near-degenerate pairs agree with the exact difference quotient.
    for (double gap : {1e-2, 1e-4, 1e-6, 1e-9}) {
        Eigen::VectorXd l(2);
        l << 0.5, 0.5 + gap;
        const cplx exact = (std::exp(cplx(0, -l[0] * t)) - std::exp(cplx(0, -l[1] * t))) / (l[0] - l[1]);
        const cplx limit = cplx(0, -t) * std::exp(cplx(0, -0.5 * t));
        const cplx got = derivative_kernel(l, t)(0, 1);
        CHECK(std::abs(got - (gap > 1e-7 ? exact : limit)) < 1e-8);
        CHECK(std::abs(got - derivative_kernel(l, t)(1, 0)) == 0.0);
    }
    CHECK(derivative_kernel(one, 0.0).norm() == 0.0);
}

TEST_CASE("propagator derivative matches finite differences") {
    Rng rng(21);
    const double h = 1e-5;
    for (ModelKind kind : kKinds) {
        const ModelSpec s = build_model(kind, 3);
        const Eigen::VectorXd th = oracle::uniform_theta(s.n_params(), rng);
        const SpectralDecomposition d = diagonalize(assemble_hamiltonian(s, th));
        for (std::size_t a = 0; a < s.n_params(); ++a) {
            const Eigen::MatrixXcd du = propagator_derivative(d, s.parameterized_terms()[a], 1.3);
            Eigen::VectorXd tp = th, tm = th;
            tp[static_cast<Eigen::Index>(a)] += h;
            tm[static_cast<Eigen::Index>(a)] -= h;
            const Eigen::MatrixXcd fd = (propagator(diagonalize(assemble_hamiltonian(s, tp)), 1.3) -
                                         propagator(diagonalize(assemble_hamiltonian(s, tm)), 1.3)) /
                                        (2 * h);
            CHECK((du - fd).norm() / fd.norm() < 1e-5);
            CHECK(propagator_derivative(d, s.parameterized_terms()[a], 0.0).norm() == 0.0);
        }
    }
}

TEST_CASE("propagator derivative on a degenerate spectrum") {
    // Equal fields and zero couplings: H = B sum Z_i has highly degenerate levels.
    const ModelSpec s = build_model(ModelKind::TFIM, 3);
    Eigen::VectorXd th(6);
    th << 0, 0, 0, 1.25, 1.25, 1.25;
    const SpectralDecomposition d = diagonalize(assemble_hamiltonian(s, th));
    const double h = 1e-5;
    for (std::size_t a = 0; a < s.n_params(); ++a) {
        Eigen::VectorXd tp = th, tm = th;
        tp[static_cast<Eigen::Index>(a)] += h;
        tm[static_cast<Eigen::Index>(a)] -= h;
        const Eigen::MatrixXcd fd = (propagator(diagonalize(assemble_hamiltonian(s, tp)), 2.0) -
                                     propagator(diagonalize(assemble_hamiltonian(s, tm)), 2.0)) /
                                    (2 * h);
        const Eigen::MatrixXcd du = propagator_derivative(d, s.parameterized_terms()[a], 2.0);
        CHECK(du.allFinite());
        CHECK((du - fd).norm() / fd.norm() < 1e-5);
    }
}

TEST_CASE("eigenbasis transform") {
    Rng rng(4);
    const ModelSpec s = build_model(ModelKind::XY, 3);
    const SpectralDecomposition d = diagonalize(assemble_hamiltonian(s, oracle::uniform_theta(6, rng)));
    for (const char* p : {"XXI", "IYY", "ZIZ", "XYZ"}) {
        const PauliString ps(p);
        const Eigen::MatrixXcd ref = d.eigenvectors.adjoint() * oracle::kron_pauli(p) * d.eigenvectors;
        CHECK((to_eigenbasis(d, ps) - ref).norm() < 1e-13);
    }
    CHECK_THROWS_AS(to_eigenbasis(d, PauliString("XX")), std::invalid_argument);
}
