#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace hamlearn {

using cplx = std::complex<double>;

/// Tensor product of single-qubit Pauli operators, e.g. "XXIZ".
///
/// Qubit 0 is the leftmost letter and the most significant bit of a
/// computational-basis index, so |q0 q1 ... q_{N-1}> has index
/// q0*2^{N-1} + ... + q_{N-1}. Every Pauli string is a signed permutation
/// matrix: P|b> = phase(b) |b ^ flip_mask>.
class PauliString {
public:
    explicit PauliString(std::string letters);

    /// Identity everywhere except `letter` on `site`.
    static PauliString single(std::size_t n_qubits, std::size_t site, char letter);
    /// Identity everywhere except `a` on site `i` and `b` on site `j` (i != j).
    static PauliString pair(std::size_t n_qubits, std::size_t i, char a, std::size_t j, char b);

    std::size_t n_qubits() const noexcept { return letters_.size(); }
    std::size_t dim() const noexcept { return std::size_t{1} << letters_.size(); }
    char operator[](std::size_t site) const { return letters_[site]; }
    const std::string& str() const noexcept { return letters_; }
    bool is_identity() const noexcept;

    /// Bits flipped by the X/Y letters.
    std::uint64_t flip_mask() const noexcept { return flip_; }

    /// Matrix element <col ^ flip_mask | P | col>.
    cplx phase(std::uint64_t col) const noexcept;

    Eigen::MatrixXcd dense() const;

    friend bool operator==(const PauliString&, const PauliString&) = default;
    friend auto operator<=>(const PauliString& a, const PauliString& b) { return a.letters_ <=> b.letters_; }

private:
    std::string letters_;
    std::uint64_t flip_ = 0;
    std::uint64_t y_mask_ = 0;
    std::uint64_t z_mask_ = 0;  // Z or Y letters, both contribute a sign
    int n_y_ = 0;
};

}  // namespace hamlearn
