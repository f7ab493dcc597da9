#include "hamlearn/pauli.hpp"

#include <bit>
#include <stdexcept>

namespace hamlearn {

PauliString::PauliString(std::string letters) : letters_(std::move(letters)) {
    if (letters_.empty())
        throw std::invalid_argument("PauliString: empty letter sequence");
    if (letters_.size() > 62)
        throw std::invalid_argument("PauliString: too many qubits");
    const std::size_t n = letters_.size();
    for (std::size_t q = 0; q < n; ++q) {
        const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
        switch (letters_[q]) {
        case 'I':
            break;
        case 'X':
            flip_ |= bit;
            break;
        case 'Y':
            flip_ |= bit;
            y_mask_ |= bit;
            z_mask_ |= bit;
            ++n_y_;
            break;
        case 'Z':
            z_mask_ |= bit;
            break;
        default:
            throw std::invalid_argument("PauliString: invalid letter '" + std::string(1, letters_[q]) +
                                        "' in \"" + letters_ + "\"");
        }
    }
}

PauliString PauliString::single(std::size_t n_qubits, std::size_t site, char letter) {
    if (site >= n_qubits)
        throw std::invalid_argument("PauliString::single: site out of range");
    std::string s(n_qubits, 'I');
    s[site] = letter;
    return PauliString(std::move(s));
}

PauliString PauliString::pair(std::size_t n_qubits, std::size_t i, char a, std::size_t j, char b) {
    if (i >= n_qubits || j >= n_qubits || i == j)
        throw std::invalid_argument("PauliString::pair: invalid sites");
    std::string s(n_qubits, 'I');
    s[i] = a;
    s[j] = b;
    return PauliString(std::move(s));
}

bool PauliString::is_identity() const noexcept {
    return flip_ == 0 && z_mask_ == 0;
}

cplx PauliString::phase(std::uint64_t col) const noexcept {
    // Z|b> = (-1)^b |b>, Y|b> = i (-1)^b |1-b>.
    const bool negative = (std::popcount(col & z_mask_) & 1) != 0;
    static constexpr cplx i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const cplx p = i_pow[n_y_ & 3];
    return negative ? -p : p;
}

Eigen::MatrixXcd PauliString::dense() const {
    const auto d = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (std::uint64_t col = 0; col < dim(); ++col)
        m(static_cast<Eigen::Index>(col ^ flip_), static_cast<Eigen::Index>(col)) = phase(col);
    return m;
}

}  // namespace hamlearn
