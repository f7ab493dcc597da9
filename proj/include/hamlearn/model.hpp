#pragma once

#include "hamlearn/pauli.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hamlearn {

enum class ModelKind { TFIM, AllToAllIsing, XY, Custom };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct FixedTerm {
    PauliString op;
    double coefficient;
};

/// Parameterized Hamiltonian H(theta) = sum_a theta_a P_a + sum fixed terms.
class ModelSpec {
public:
    ModelSpec(ModelKind kind, std::size_t n_qubits, std::vector<PauliString> parameterized,
              std::vector<FixedTerm> fixed = {});

    ModelKind kind() const noexcept { return kind_; }
    std::size_t n_qubits() const noexcept { return n_qubits_; }
    std::size_t dim() const noexcept { return std::size_t{1} << n_qubits_; }
    std::size_t n_params() const noexcept { return terms_.size(); }
    const std::vector<PauliString>& parameterized_terms() const noexcept { return terms_; }
    const std::vector<FixedTerm>& fixed_terms() const noexcept { return fixed_; }

    /// Parameter indices sorted by Pauli string. Hamiltonian assembly sums in
    /// this order so that relabeling the parameters leaves H bitwise unchanged.
    const std::vector<std::size_t>& canonical_order() const noexcept { return canonical_; }

private:
    ModelKind kind_;
    std::size_t n_qubits_;
    std::vector<PauliString> terms_;
    std::vector<FixedTerm> fixed_;
    std::vector<std::size_t> canonical_;
};

/// Standard models. Periodic chains (TFIM, XY) need n_qubits >= 3, the
/// all-to-all Ising model needs n_qubits >= 2.
///
///  TFIM:          theta = {J_1..J_N, B_1..B_N}, terms X_i X_{i+1}, Z_i
///  AllToAllIsing: theta = {J_ij for i<j in row-major order, B_1..B_N}
///  XY:            theta = {Jx_1..Jx_N, Jy_1..Jy_N}, fixed sum_i Z_i
ModelSpec build_model(ModelKind kind, std::size_t n_qubits);

Eigen::MatrixXcd assemble_hamiltonian(const ModelSpec& spec, const Eigen::VectorXd& theta);

/// Same model with parameters relabeled: new term a is old term perm[a].
ModelSpec permute_parameters(const ModelSpec& spec, const std::vector<std::size_t>& perm);

}  // namespace hamlearn
