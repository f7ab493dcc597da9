#include "hamlearn/model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hamlearn {

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::TFIM: return "TFIM";
    case ModelKind::AllToAllIsing: return "AllToAllIsing";
    case ModelKind::XY: return "XY";
    case ModelKind::Custom: return "Custom";
    }
    return "Custom";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "TFIM" || name == "tfim") return ModelKind::TFIM;
    if (name == "AllToAllIsing" || name == "all_to_all" || name == "all-to-all") return ModelKind::AllToAllIsing;
    if (name == "XY" || name == "xy") return ModelKind::XY;
    if (name == "Custom" || name == "custom") return ModelKind::Custom;
    throw std::invalid_argument("unknown model kind: " + std::string(name));
}

ModelSpec::ModelSpec(ModelKind kind, std::size_t n_qubits, std::vector<PauliString> parameterized,
                     std::vector<FixedTerm> fixed)
    : kind_(kind), n_qubits_(n_qubits), terms_(std::move(parameterized)), fixed_(std::move(fixed)) {
    if (n_qubits_ == 0 || n_qubits_ > 12)
        throw std::invalid_argument("ModelSpec: n_qubits must be in [1, 12]");
    for (const auto& t : terms_)
        if (t.n_qubits() != n_qubits_)
            throw std::invalid_argument("ModelSpec: term " + t.str() + " has wrong qubit count");
    for (const auto& f : fixed_)
        if (f.op.n_qubits() != n_qubits_)
            throw std::invalid_argument("ModelSpec: fixed term " + f.op.str() + " has wrong qubit count");

    canonical_.resize(terms_.size());
    std::iota(canonical_.begin(), canonical_.end(), std::size_t{0});
    std::sort(canonical_.begin(), canonical_.end(),
              [&](std::size_t a, std::size_t b) { return terms_[a] < terms_[b]; });
    for (std::size_t k = 1; k < canonical_.size(); ++k)
        if (terms_[canonical_[k]] == terms_[canonical_[k - 1]])
            throw std::invalid_argument("ModelSpec: duplicate parameterized term " + terms_[canonical_[k]].str());
}

ModelSpec build_model(ModelKind kind, std::size_t n) {
    std::vector<PauliString> terms;
    std::vector<FixedTerm> fixed;
    switch (kind) {
    case ModelKind::TFIM:
        if (n < 3) throw std::invalid_argument("TFIM requires n_qubits >= 3");
        for (std::size_t i = 0; i < n; ++i) terms.push_back(PauliString::pair(n, i, 'X', (i + 1) % n, 'X'));
        for (std::size_t i = 0; i < n; ++i) terms.push_back(PauliString::single(n, i, 'Z'));
        break;
    case ModelKind::AllToAllIsing:
        if (n < 2) throw std::invalid_argument("AllToAllIsing requires n_qubits >= 2");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) terms.push_back(PauliString::pair(n, i, 'X', j, 'X'));
        for (std::size_t i = 0; i < n; ++i) terms.push_back(PauliString::single(n, i, 'Z'));
        break;
    case ModelKind::XY:
        if (n < 3) throw std::invalid_argument("XY requires n_qubits >= 3");
        for (std::size_t i = 0; i < n; ++i) terms.push_back(PauliString::pair(n, i, 'X', (i + 1) % n, 'X'));
        for (std::size_t i = 0; i < n; ++i) terms.push_back(PauliString::pair(n, i, 'Y', (i + 1) % n, 'Y'));
        for (std::size_t i = 0; i < n; ++i) fixed.push_back({PauliString::single(n, i, 'Z'), 1.0});
        break;
    case ModelKind::Custom:
        throw std::invalid_argument("build_model: Custom models are constructed directly");
    }
    return ModelSpec(kind, n, std::move(terms), std::move(fixed));
}

namespace {

void add_term(Eigen::MatrixXcd& h, const PauliString& p, double coef) {
    const std::uint64_t flip = p.flip_mask();
    for (std::uint64_t col = 0; col < p.dim(); ++col)
        h(static_cast<Eigen::Index>(col ^ flip), static_cast<Eigen::Index>(col)) += coef * p.phase(col);
}

}  // namespace

Eigen::MatrixXcd assemble_hamiltonian(const ModelSpec& spec, const Eigen::VectorXd& theta) {
    if (static_cast<std::size_t>(theta.size()) != spec.n_params())
        throw std::invalid_argument("assemble_hamiltonian: expected " + std::to_string(spec.n_params()) +
                                    " parameters, got " + std::to_string(theta.size()));
    const auto d = static_cast<Eigen::Index>(spec.dim());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t a : spec.canonical_order()) add_term(h, spec.parameterized_terms()[a], theta[a]);
    for (const auto& f : spec.fixed_terms()) add_term(h, f.op, f.coefficient);
    return h;
}

ModelSpec permute_parameters(const ModelSpec& spec, const std::vector<std::size_t>& perm) {
    if (perm.size() != spec.n_params())
        throw std::invalid_argument("permute_parameters: permutation size mismatch");
    std::vector<PauliString> terms;
    terms.reserve(perm.size());
    for (std::size_t a : perm) terms.push_back(spec.parameterized_terms().at(a));
    return ModelSpec(ModelKind::Custom, spec.n_qubits(), std::move(terms), spec.fixed_terms());
}

}  // namespace hamlearn
