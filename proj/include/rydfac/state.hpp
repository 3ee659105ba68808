#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rydfac {

using cplx = std::complex<double>;

enum class Representation { pure, density };

inline constexpr std::size_t max_density_sites = 12;
inline constexpr std::size_t max_pure_sites = 24;

/// Throws InvalidConfig("initial") unless bits is a non-empty string of '0'/'1'.
void validate_bitstring(std::string_view bits);

/// Basis index of a product-state bitstring: character j is site j, '1' is the
/// Rydberg state, and site j maps to bit j of the index.
std::uint64_t parse_bitstring(std::string_view bits);

/// Many-body state over the 2^N product basis. PURE keeps the amplitude vector,
/// DENSITY a row-major 2^N x 2^N matrix.
class ManyBodyState {
public:
    static ManyBodyState product_pure(std::string_view bits);
    static ManyBodyState product_density(std::string_view bits);
    static ManyBodyState from_amplitudes(std::size_t n_sites, std::vector<cplx> amplitudes);
    static ManyBodyState from_density(std::size_t n_sites, std::vector<cplx> rho);

    std::size_t n_sites() const noexcept { return n_sites_; }
    std::size_t dim() const noexcept { return std::size_t{1} << n_sites_; }
    Representation representation() const noexcept { return representation_; }

    std::span<const cplx> data() const noexcept { return data_; }
    std::span<cplx> data() noexcept { return data_; }

    ManyBodyState to_density() const;

    /// <n_j> for every site.
    std::vector<double> populations() const;
    /// Probability of each basis state (diagonal of rho or |psi|^2).
    std::vector<double> basis_probabilities() const;

    double trace() const;  // squared norm for PURE
    double purity() const;
    double hermiticity_residual() const;  // max |rho - rho^dagger|, 0 for PURE
    double min_eigenvalue() const;        // of rho; 0 for PURE

private:
    ManyBodyState(std::size_t n_sites, Representation rep, std::vector<cplx> data);

    std::size_t n_sites_ = 0;
    Representation representation_ = Representation::pure;
    std::vector<cplx> data_;
};

}  // namespace rydfac
